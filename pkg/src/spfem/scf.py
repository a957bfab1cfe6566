"""Discrete Poisson solves and the fixed-point self-consistency loop.

Each sweep solves the spectral problem for the current potential,
rebuilds occupations and density, and maps the density mismatch through
the Dirichlet Laplacian; optional damping blends consecutive iterates.
The loop stops on a relative H1 increment and never raises on plain
non-convergence (the report carries the flag), while structural
failures such as truncation overflow propagate as exceptions.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import fem
from .linsolve import pcg_solve
from .mesh import mesh_size
from .occupancy import build_density, determine_occupation
from .quadrature import tet_rule
from .spectrum import (SpectrumSolver, assemble_mass_cached,
                       assemble_stiffness_cached)


@dataclass
class ScfConfig:
    tol_rel: float = 1e-8
    max_iter: int = 200
    damping: float = 1.0
    L_max: int = 512
    eig_tol: float = 1e-9
    pcg_tol: float = 1e-11
    seed: int = 0
    dense_cutoff: int = 400

    def __post_init__(self):
        if self.tol_rel <= 0:
            raise ValueError("tol_rel must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.L_max < 1:
            raise ValueError("L_max must be >= 1")


@dataclass
class ScfModel:
    """Applied potential, doping profile, and occupation parameters."""

    V0: object
    n_D: object
    params: object


@dataclass
class IterationRecord:
    iteration: int
    increment_h1: float
    fermi_level: float
    level_count: int
    occupation_error: float       # |sum occupations - N0|
    density_integral_error: float  # |int density - N0|


@dataclass
class ScfReport:
    potential: fem.FeField
    density: object
    occupation: object
    iterations: list = field(default_factory=list)
    converged: bool = False
    self_consistency_h1: float = float("nan")


def poisson_solve(mesh, rhs, rule=None, tol=1e-11, stiffness=None):
    """Galerkin solution of the Dirichlet Poisson problem with the given
    right-hand side (any quadrature-evaluable field)."""
    rule = rule or tet_rule(4)
    K = stiffness if stiffness is not None else assemble_stiffness_cached(mesh)
    b = fem.assemble_load(mesh, rhs, rule)
    x = pcg_solve(K, b, tol=tol)
    return fem.FeField.from_interior(mesh, x)


def _h1(K, M, vec):
    return math.sqrt(max(vec @ (K @ vec) + vec @ (M @ vec), 0.0))


def fixed_point_solve(mesh, model, cfg=None, V_init=None):
    """Run the self-consistency iteration and return an ScfReport."""
    cfg = cfg or ScfConfig()
    p = model.params
    K = assemble_stiffness_cached(mesh)
    M = assemble_mass_cached(mesh)
    rule = tet_rule(4)
    h = mesh_size(mesh)
    solver = SpectrumSolver(mesh, model.V0, tol=cfg.eig_tol, seed=cfg.seed,
                            level_cap=cfg.L_max,
                            dense_cutoff=cfg.dense_cutoff)
    doping = fem.CachedQuadValues(model.n_D)

    def occupation_at(u):
        spectral, occ = determine_occupation(
            mesh, lambda L: solver.solve(u, L), p, h, L_max=cfg.L_max)
        return spectral, occ, build_density(spectral, occ)

    V = V_init if V_init is not None else fem.FeField.zero(mesh)
    records = []
    converged = False
    for k in range(1, cfg.max_iter + 1):
        spectral, occ, density = occupation_at(V)
        V_raw = poisson_solve(mesh, density - doping, rule=rule,
                              tol=cfg.pcg_tol, stiffness=K)
        V_new = (1.0 - cfg.damping) * V + cfg.damping * V_raw
        diff = V_new.interior() - V.interior()
        inc = _h1(K, M, diff)
        records.append(IterationRecord(
            iteration=k,
            increment_h1=inc,
            fermi_level=occ.fermi_level,
            level_count=occ.level_count,
            occupation_error=abs(float(np.sum(occ.occupations)) - p.N0),
            density_integral_error=abs(density.integral() - p.N0),
        ))
        V = V_new
        if inc <= cfg.tol_rel * (1.0 + _h1(K, M, V.interior())):
            converged = True
            break

    # final state: density and self-consistency residual at the last iterate
    spectral, occ, density = occupation_at(V)
    V_mapped = poisson_solve(mesh, density - doping, rule=rule,
                             tol=cfg.pcg_tol, stiffness=K)
    self_res = _h1(K, M, V.interior() - V_mapped.interior())
    return ScfReport(potential=V, density=density, occupation=occ,
                     iterations=records, converged=converged,
                     self_consistency_h1=self_res)
