"""Analytic ground truth on the unit cube: Laplacian eigenpairs, the
continuum Fermi level, the exact density series, and manufactured
problems whose exact potential is known in closed form.

The density series is truncated with a certified tail bound, computed
from the product structure of the mode sums, so every evaluation is
accurate to a requested relative tolerance.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericsError
from .fem import ScalarFunction
from .occupancy import BOLTZMANN, FERMI_REL_TOL, distribution

PI2 = math.pi ** 2


@dataclass(frozen=True)
class CubeMode:
    """Laplacian eigenmode sin(i pi x) sin(j pi y) sin(k pi z), unit
    L2 norm."""

    i: int
    j: int
    k: int

    @property
    def lam(self):
        return (self.i ** 2 + self.j ** 2 + self.k ** 2) * PI2

    def phi(self, points):
        points = np.asarray(points, dtype=float)
        return (2.0 * math.sqrt(2.0)
                * np.sin(self.i * math.pi * points[..., 0])
                * np.sin(self.j * math.pi * points[..., 1])
                * np.sin(self.k * math.pi * points[..., 2]))


def cube_eigensequence(count):
    """First ``count`` modes sorted by eigenvalue, ties by (i, j, k)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    bound = 4
    while True:
        modes = [(i * i + j * j + k * k, (i, j, k))
                 for i in range(1, bound + 1)
                 for j in range(1, bound + 1)
                 for k in range(1, bound + 1)]
        modes.sort()
        if len(modes) >= count:
            s_count = modes[count - 1][0]
            # complete iff no mode with an index beyond the bound can
            # undercut the count-th eigenvalue
            if s_count < (bound + 1) ** 2 + 2:
                break
        bound *= 2
    return [CubeMode(*ijk) for _, ijk in modes[:count]]


def _axis_sum(mu):
    """sum_{i >= 1} exp(-mu pi^2 i^2), summed to machine tail."""
    total = 0.0
    i = 1
    while True:
        term = math.exp(-mu * PI2 * i * i)
        total += term
        if term <= 1e-18 * max(total, 1e-300):
            return total
        i += 1


def continuous_fermi(p):
    """Fermi level of the continuum spectrum.

    Boltzmann admits the closed form mu^{-1} ln(N0 / (f0 Z)) with Z the
    cube partition sum; the Fermi-Dirac level is solved from the series
    with a certified Boltzmann-majorant tail.
    """
    if p.kind == BOLTZMANN:
        Z = _axis_sum(p.mu) ** 3
        return math.log(p.N0 / (p.f0 * Z)) / p.mu

    tol = FERMI_REL_TOL * p.N0
    count = 512
    for _ in range(16):
        if p.f0 * count <= 2.0 * p.N0:   # saturation: need more levels
            count *= 2
            continue
        modes = cube_eigensequence(count)
        lams = np.array([m.lam for m in modes])

        def g(y):
            return float(np.sum(distribution(p, lams - y)))

        lo, hi = lams[0] - 10.0 / p.mu, lams[0] + 10.0 / p.mu
        while g(lo) > p.N0:
            lo -= (hi - lo)
        while g(hi) < p.N0:
            hi += (hi - lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) < p.N0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13 * (1.0 + abs(mid)):
                break
        y = 0.5 * (lo + hi)
        # Boltzmann majorant of the dropped tail at the solved level
        tail = (p.f0 * math.exp(p.mu * y)
                * (_axis_sum(p.mu) ** 3 - float(np.sum(np.exp(-p.mu * lams)))))
        if tail <= tol:
            return y
        count *= 2
    raise NumericsError("continuum Fermi series cannot certify tolerance")


class SeriesDensity:
    """Exact electron density as a certified truncated mode series."""

    def __init__(self, p, rel_tol=1e-8):
        self.params = p
        self.rel_tol = rel_tol
        self.fermi_level = continuous_fermi(p)
        self.name = f"exact-density(mu={p.mu},f0={p.f0},N0={p.N0})"
        self._select_modes()

    def _select_modes(self):
        p = self.params
        budget = self.rel_tol * p.N0
        full = _axis_sum(p.mu) ** 3
        amplitude = 8.0 * p.f0 * math.exp(p.mu * self.fermi_level)
        s_max = 12
        for _ in range(40):
            bound = math.ceil(math.sqrt(s_max))
            i = np.arange(1, bound + 1)
            ii, jj, kk = np.meshgrid(i, i, i, indexing="ij")
            s = (ii * ii + jj * jj + kk * kk).ravel()
            keep = s <= s_max
            partial = float(np.sum(np.exp(-p.mu * PI2 * s[keep])))
            if amplitude * (full - partial) <= budget:
                order = np.argsort(s[keep], kind="stable")
                self.modes_i = ii.ravel()[keep][order]
                self.modes_j = jj.ravel()[keep][order]
                self.modes_k = kk.ravel()[keep][order]
                lams = s[keep][order] * PI2
                self.lambdas = lams
                self.weights = np.asarray(
                    distribution(p, lams - self.fermi_level))
                return
            s_max *= 2
        raise NumericsError("density series cannot certify tolerance")

    @property
    def mode_count(self):
        return len(self.weights)

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        flat = points.reshape(-1, 3)
        imax = int(max(self.modes_i.max(), self.modes_j.max(),
                       self.modes_k.max()))
        freq = np.arange(1, imax + 1)[:, None] * math.pi
        sx2 = np.sin(freq * flat[None, :, 0]) ** 2
        sy2 = np.sin(freq * flat[None, :, 1]) ** 2
        sz2 = np.sin(freq * flat[None, :, 2]) ** 2
        out = np.zeros(len(flat))
        for w, i, j, k in zip(self.weights, self.modes_i, self.modes_j,
                              self.modes_k):
            out += (8.0 * w) * sx2[i - 1] * sy2[j - 1] * sz2[k - 1]
        return out.reshape(points.shape[:-1])


@lru_cache(maxsize=8)
def _cached_series(p, rel_tol):
    return SeriesDensity(p, rel_tol)


def exact_density(p, x, rel_tol=1e-8):
    """Exact density at point(s) x, certified to rel_tol * ||n||_L2."""
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    return _cached_series(p, rel_tol)(x)


def _example1_fields():
    pi = math.pi

    def v0(pts):
        return (np.sin(pi * pts[..., 0]) * np.sin(pi * pts[..., 1])
                * np.sin(pi * pts[..., 2]))

    def v0_grad(pts):
        sx, sy, sz = (np.sin(pi * pts[..., d]) for d in range(3))
        cx, cy, cz = (np.cos(pi * pts[..., d]) for d in range(3))
        return pi * np.stack([cx * sy * sz, sx * cy * sz, sx * sy * cz],
                             axis=-1)

    def lap_v0(pts):
        return -3.0 * PI2 * v0(pts)

    return (ScalarFunction(v0, grad=v0_grad, name="sine-product"),
            ScalarFunction(lap_v0, name="lap(sine-product)"))


def _example2_fields():
    def g(t):
        return np.exp(t * (1.0 - t)) - 1.0

    def gp(t):
        return (1.0 - 2.0 * t) * np.exp(t * (1.0 - t))

    def gpp(t):
        return np.exp(t * (1.0 - t)) * ((1.0 - 2.0 * t) ** 2 - 2.0)

    def v0(pts):
        return g(pts[..., 0]) * g(pts[..., 1]) * g(pts[..., 2])

    def v0_grad(pts):
        gx, gy, gz = (g(pts[..., d]) for d in range(3))
        px, py, pz = (gp(pts[..., d]) for d in range(3))
        return np.stack([px * gy * gz, gx * py * gz, gx * gy * pz], axis=-1)

    def lap_v0(pts):
        gx, gy, gz = (g(pts[..., d]) for d in range(3))
        qx, qy, qz = (gpp(pts[..., d]) for d in range(3))
        return qx * gy * gz + gx * qy * gz + gx * gy * qz

    return (ScalarFunction(v0, grad=v0_grad, name="exp-bump-product"),
            ScalarFunction(lap_v0, name="lap(exp-bump-product)"))


@dataclass
class ManufacturedProblem:
    """Exact solution set for one benchmark configuration.

    The exact potential is the negative of the applied one, so the
    effective Hamiltonian potential cancels and the spectrum reduces to
    the explicit Laplacian modes; the doping profile is back-computed
    as (exact density) - (Laplacian of the applied potential).
    """

    example: int
    params: object
    V0: ScalarFunction
    laplacian_V0: ScalarFunction
    V_exact: ScalarFunction
    n_exact: SeriesDensity
    eps_F_exact: float
    n_D: ScalarFunction

    def residual_check(self, points, fine_rel_tol=1e-10):
        """|(-lap V_exact) - n + n_D| with n from an independently
        truncated, finer series; bounded by the series tails."""
        fine = _cached_series(self.params, fine_rel_tol)
        pts = np.asarray(points, dtype=float)
        return np.abs(self.laplacian_V0(pts) - fine(pts) + self.n_D(pts))


def manufactured_problem(example, p, rel_tol=1e-8):
    """Benchmark problem 1 (sine applied potential) or 2 (exponential
    bump applied potential)."""
    if example == 1:
        V0, lap_V0 = _example1_fields()
    elif example == 2:
        V0, lap_V0 = _example2_fields()
    else:
        raise ValueError(f"example must be 1 or 2, got {example}")

    series = _cached_series(p, rel_tol)

    def v_exact(pts):
        return -V0(pts)

    def v_exact_grad(pts):
        return -V0.grad(pts)

    def doping(pts):
        return series(pts) - lap_V0(pts)

    return ManufacturedProblem(
        example=example,
        params=p,
        V0=V0,
        laplacian_V0=lap_V0,
        V_exact=ScalarFunction(v_exact, grad=v_exact_grad,
                               name=f"exact-potential-ex{example}"),
        n_exact=series,
        eps_F_exact=series.fermi_level,
        n_D=ScalarFunction(doping, name=f"doping-ex{example}"),
    )
