"""Occupation statistics: distribution functions, the smooth cutoff,
Fermi-level conservation solve, truncation of the level series, and the
resulting electron density field.

The cutoff is exactly 1 below the window edge and exactly 0 one unit
above it, so occupations vanish identically past a finite index and the
density is always a finite sum of squared eigenfunctions.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import fem
from .errors import ConvergenceError, InfeasibleOccupationError, \
    TruncationOverflowError
from .quadrature import tet_rule

BOLTZMANN = "boltzmann"
FERMI_DIRAC = "fermi_dirac"

FERMI_REL_TOL = 1e-12


@dataclass(frozen=True)
class DistributionParams:
    """Occupation model: kind, amplitude f0, decay rate mu, electron
    count N0."""

    kind: str = BOLTZMANN
    f0: float = 1.0
    mu: float = 0.1
    N0: float = 100.0

    def __post_init__(self):
        if self.kind not in (BOLTZMANN, FERMI_DIRAC):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        for name in ("f0", "mu", "N0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def distribution(p, t):
    """Occupation weight at energy offset t; positive and decreasing."""
    t = np.asarray(t, dtype=float)
    if p.kind == BOLTZMANN:
        out = p.f0 * np.exp(-p.mu * t)
    else:
        out = p.f0 * expit(-p.mu * t)
    return out if out.ndim else float(out)


def distribution_derivative(p, t):
    t = np.asarray(t, dtype=float)
    if p.kind == BOLTZMANN:
        out = -p.mu * p.f0 * np.exp(-p.mu * t)
    else:
        s = expit(-p.mu * t)
        out = -p.mu * p.f0 * s * (1.0 - s)
    return out if out.ndim else float(out)


def _bump(s):
    """exp(-1/s) continued by 0 for s <= 0; smooth at 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _bump_derivative(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos]) / s[pos] ** 2
    return out


def cutoff_chi(M, t):
    """Smooth cutoff: 1 for t <= M, 0 for t >= M + 1, decreasing between."""
    t = np.asarray(t, dtype=float)
    a = _bump(M + 1.0 - t)
    b = _bump(t - M)
    out = a / (a + b)
    return out if out.ndim else float(out)


def cutoff_chi_derivative(M, t):
    t = np.asarray(t, dtype=float)
    a = _bump(M + 1.0 - t)
    b = _bump(t - M)
    da = _bump_derivative(M + 1.0 - t)
    db = _bump_derivative(t - M)
    out = -(da * b + a * db) / (a + b) ** 2
    return out if out.ndim else float(out)


def truncated_distribution(p, M, t):
    """Cutoff-weighted occupation; identically 0 for t >= M + 1."""
    return cutoff_chi(M, t) * distribution(p, t)


def truncated_distribution_derivative(p, M, t):
    return cutoff_chi_derivative(M, t) * distribution(p, t) \
        + cutoff_chi(M, t) * distribution_derivative(p, t)


def truncation_bound(h, p):
    """Energy window 2|ln h|/mu tied to the mesh size."""
    if not 0.0 < h < 1.0:
        raise ValueError(f"mesh size must lie in (0, 1), got {h}")
    return 2.0 * abs(math.log(h)) / p.mu


def _occupation_sum(eigenvalues, p, M, y):
    return float(np.sum(truncated_distribution(p, M, eigenvalues - y)))


def solve_fermi(eigenvalues, p, M=np.inf):
    """Fermi level making the truncated occupations sum to N0.

    The root is isolated by bracketing and bisection, then polished by
    a safeguarded Newton iteration using the analytic derivative; the
    cutoff can flatten the occupation sum, in which case Newton falls
    back to bisection steps.
    """
    eps = np.asarray(eigenvalues, dtype=float)
    L = len(eps)
    if L == 0:
        raise ValueError("need at least one eigenvalue")
    if p.kind == FERMI_DIRAC and p.f0 * L <= p.N0:
        raise InfeasibleOccupationError(
            f"occupation sum saturates at f0*L = {p.f0 * L:g} < N0 = {p.N0:g}")

    lo = eps[0] - math.log(p.f0 * L / p.N0) / p.mu - 10.0
    hi = eps[-1] + math.log(p.N0 / p.f0) / p.mu + 10.0
    width = max(hi - lo, 1.0)
    for _ in range(200):
        if _occupation_sum(eps, p, M, lo) <= p.N0:
            break
        lo -= width
        width *= 2.0
    else:
        raise ConvergenceError("failed to bracket the Fermi level from below")
    width = max(hi - lo, 1.0)
    for _ in range(200):
        if _occupation_sum(eps, p, M, hi) >= p.N0:
            break
        hi += width
        width *= 2.0
    else:
        raise InfeasibleOccupationError(
            f"occupation sum never reaches N0 = {p.N0:g} "
            "(too few levels or cutoff too tight)")

    while hi - lo > 1e-2:
        mid = 0.5 * (lo + hi)
        if _occupation_sum(eps, p, M, mid) < p.N0:
            lo = mid
        else:
            hi = mid

    y = 0.5 * (lo + hi)
    tol = FERMI_REL_TOL * p.N0
    for _ in range(300):
        g = _occupation_sum(eps, p, M, y)
        if abs(g - p.N0) <= tol:
            return float(y)
        if g < p.N0:
            lo = y
        else:
            hi = y
        dg = float(np.sum(-truncated_distribution_derivative(p, M, eps - y)))
        step_ok = dg > 1e-300
        if step_ok:
            y_new = y - (g - p.N0) / dg
            step_ok = lo < y_new < hi
        y = y_new if step_ok else 0.5 * (lo + hi)
    raise ConvergenceError("Fermi solve stalled",
                           residual=abs(g - p.N0) / p.N0)


@dataclass
class OccupationState:
    """Truncation window, Fermi level, per-level occupations, and the
    1-based index of the first identically-zero occupation."""

    window: float
    fermi_level: float
    occupations: np.ndarray
    level_count: int

    @property
    def occupied(self):
        """Occupations of the strictly positive levels."""
        return self.occupations[:self.level_count - 1]


def determine_occupation(mesh, solve, p, h, L_max=512, L0=None):
    """Compute eigenpairs and occupations with a block-doubling level
    budget.

    ``solve`` maps a level count L to a SpectralSet.  Starting from
    L0 = max(16, ceil((2|ln h|)^{3/2})), the budget doubles until the
    topmost computed level sits strictly beyond the truncation window,
    at which point the tail occupations vanish identically and the
    partial Fermi solve is exact.
    """
    M = truncation_bound(h, p)
    required = M + 1.0
    cap = min(L_max, mesh.n_interior)
    if L0 is None:
        L0 = max(16, math.ceil((2.0 * abs(math.log(h))) ** 1.5))
    L = min(cap, L0)

    while True:
        spectral = solve(L)
        fermi = solve_fermi(spectral.eigenvalues, p, M)
        tail_offset = float(spectral.eigenvalues[-1] - fermi)
        if tail_offset > required:
            break
        if L >= cap:
            raise TruncationOverflowError(
                f"window {required:.6g} not reachable with {L} levels "
                f"(reached offset {tail_offset:.6g}; cap {cap})",
                achieved_window=tail_offset, required_window=required,
                levels=L)
        L = min(2 * L, cap)

    occ = truncated_distribution(p, M, spectral.eigenvalues - fermi)
    zero = np.flatnonzero(occ == 0.0)
    level_count = int(zero[0]) + 1
    assert level_count < mesh.n_interior
    state = OccupationState(window=M, fermi_level=fermi,
                            occupations=occ, level_count=level_count)
    return spectral, state


class DensityField:
    """Electron density: occupation-weighted sum of squared
    eigenfunctions, piecewise quadratic on the mesh."""

    def __init__(self, spectral, occupations, level_count=None):
        occupations = np.asarray(occupations, dtype=float)
        if level_count is None:
            nonzero = np.flatnonzero(occupations > 0.0)
            level_count = int(nonzero[-1]) + 2 if len(nonzero) else 1
        n_active = min(level_count - 1, len(occupations), spectral.count)
        self.spectral = spectral
        self.occupations = occupations
        self.level_count = level_count
        self.n_active = n_active
        self.mesh = spectral.mesh
        self.name = f"density[{spectral.tag}]"

    def element_values(self, mesh, rule):
        psi = self.spectral.element_values(mesh, rule, levels=self.n_active)
        return np.einsum("nql,l->nq", psi * psi,
                         self.occupations[:self.n_active])

    def element_gradients(self, mesh, rule):
        psi = self.spectral.element_values(mesh, rule, levels=self.n_active)
        gpsi = self.spectral.element_gradients(mesh, rule,
                                               levels=self.n_active)
        return 2.0 * np.einsum("nql,nqdl,l->nqd", psi, gpsi,
                               self.occupations[:self.n_active])

    def integral(self):
        """Exact integral (degree-2 quadrature of a piecewise quadratic)."""
        rule = tet_rule(2)
        vals = self.element_values(self.mesh, rule)
        return float((vals @ rule.weights) @ self.mesh.volumes)

    def evaluate(self, points):
        """Density at arbitrary points, located in the structured mesh."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        mesh = self.mesh
        m = mesh.m
        cells = np.minimum((points * m).astype(int), m - 1)
        out = np.empty(len(points))
        coeffs = self.spectral.coefficients[:, :self.n_active]
        w = self.occupations[:self.n_active]
        for row, (x, cell) in enumerate(zip(points, cells)):
            base = ((cell[0] * m + cell[1]) * m + cell[2]) * 6
            for k in range(6):
                tet = mesh.tets[base + k]
                corner = mesh.vertices[tet[0]]
                lam123 = np.linalg.solve(
                    (mesh.vertices[tet[1:]] - corner).T, x - corner)
                lam = np.concatenate([[1.0 - lam123.sum()], lam123])
                if np.all(lam >= -1e-12):
                    psi = lam @ coeffs[tet]
                    out[row] = float((psi * psi) @ w)
                    break
            else:
                raise ValueError(f"point {x} not located in any element")
        return out if len(out) > 1 else float(out[0])

    def __sub__(self, other):
        return fem.LinearCombination([(1.0, self), (-1.0, other)])


def build_density(spectral, occ):
    """DensityField for a consistent spectral/occupation pair."""
    if len(occ.occupations) > spectral.count:
        raise ValueError("occupation list longer than available spectrum")
    return DensityField(spectral, occ.occupations, occ.level_count)
