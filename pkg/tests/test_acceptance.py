"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see
them inline).  All tolerances are fixed constants in this file.

Criteria 1 and 2 are known to fail in this configuration: with the
electron count N0 = 100 entering the conservation solve, the density
error (second order, but with an amplitude proportional to N0) feeds
back into the potential and dominates its H1 error on these meshes, so
the measured H1 order sits near 1.4-1.8 instead of 1.0 and the absolute
density error is far above the reference magnitudes.  The windows below
match the behavior of a density normalized per electron, which these
runs do not use.  The tests state the criteria literally and report the
measured values rather than widening the windows.
"""

import math

import numpy as np
import pytest
import scipy.linalg as sla

from spfem import fem
from spfem.errors import TruncationOverflowError
from spfem.linsolve import lowest_eigenpairs
from spfem.mesh import build_structured_mesh, mesh_size
from spfem.occupancy import (DistributionParams, build_density,
                             determine_occupation)
from spfem.oracle import (continuous_fermi, cube_eigensequence,
                          manufactured_problem)
from spfem.quadrature import tet_rule
from spfem.scf import ScfConfig, ScfModel, fixed_point_solve
from spfem.spectrum import SpectrumSolver

LAM1 = 3 * math.pi ** 2

# coarse-mesh error magnitudes of an independent implementation of the
# same benchmark (different mesh family, about 6e3 elements)
REFERENCE_COARSE_ERRORS = {"e_v0": 1.85e-2, "e_v1": 2.30e-1, "e_n0": 2.82e-2}

ORDER_WINDOWS = {"order_v0": (1.8, 2.1), "order_v1": (0.85, 1.15),
                 "order_n0": (1.7, 2.1)}


def _verdict(number, ok, detail):
    print(f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


@pytest.fixture(scope="session")
def zero_potential_data(params):
    """Spectra and occupations of the zero-potential pencil, m=4,8,16."""
    data = {}
    for m in (4, 8, 16):
        mesh = build_structured_mesh(m)
        solver = SpectrumSolver(mesh, None)
        spectral, occ = determine_occupation(
            mesh, lambda L: solver.solve(None, L), params, mesh_size(mesh))
        data[m] = (mesh, spectral, occ)
    return data


def _order_check(rows):
    final = rows[-1]
    measured = {"order_v0": final.order_v0, "order_v1": final.order_v1,
                "order_n0": final.order_n0}
    failures = [f"{k}={v:.3f} outside [{lo},{hi}]"
                for k, (lo, hi) in ORDER_WINDOWS.items()
                for v in [measured[k]] if not lo <= v <= hi]
    return measured, failures


def test_criterion_1_benchmark1_orders_and_magnitudes(example1_study):
    rows, _ = example1_study
    measured, failures = _order_check(rows)
    # magnitudes at comparable resolution (our 3072-element row vs the
    # reference at about 6144 elements), factor-5 window
    comparable = rows[1]
    for key, ref in REFERENCE_COARSE_ERRORS.items():
        ours = getattr(comparable, key)
        if not ref / 5.0 <= ours <= ref * 5.0:
            failures.append(f"{key}={ours:.3e} not within 5x of {ref:.3e}")
    detail = (f"orders(final pair)={ {k: round(v, 3) for k, v in measured.items()} }, "
              f"coarse errors=({comparable.e_v0:.3e}, {comparable.e_v1:.3e}, "
              f"{comparable.e_n0:.3e})")
    ok = _verdict(1, not failures, detail)
    assert ok, "; ".join(failures) + \
        " [known: N0-scaled density feedback dominates on these meshes]"


def test_criterion_2_benchmark2_orders(example2_study):
    rows, _ = example2_study
    measured, failures = _order_check(rows)
    detail = f"orders(final pair)={ {k: round(v, 3) for k, v in measured.items()} }"
    ok = _verdict(2, not failures, detail)
    assert ok, "; ".join(failures) + \
        " [known: N0-scaled density feedback dominates on these meshes]"


def test_criterion_3_eigenvalue_law(zero_potential_data):
    gaps = {m: zero_potential_data[m][1].eigenvalues[0] - LAM1
            for m in (8, 16)}
    ratio = gaps[8] / gaps[16]
    lam = np.array([mode.lam for mode in cube_eigensequence(10)])
    lower_bound_ok = True
    for m in (4, 8, 16):
        eigs = zero_potential_data[m][1].eigenvalues[:10]
        lower_bound_ok &= bool(np.all(eigs >= lam - 1e-9))
    ok = (3.3 <= ratio <= 4.8) and lower_bound_ok
    _verdict(3, ok, f"(eps1-3pi^2) ratio m8/m16 = {ratio:.3f}, "
                    f"lower bound holds: {lower_bound_ok}")
    assert 3.3 <= ratio <= 4.8
    assert lower_bound_ok


def test_criterion_4_fermi_level_law(zero_potential_data, params):
    exact = continuous_fermi(params)
    gaps = {}
    for m in (4, 8, 16):
        gaps[m] = zero_potential_data[m][2].fermi_level - exact
        assert gaps[m] >= -1e-10
    ratio = gaps[8] / gaps[16]
    ok = 3.0 <= ratio <= 5.0
    gap_text = ", ".join(f"m{m}: {gaps[m]:.4f}" for m in (4, 8, 16))
    _verdict(4, ok, f"fermi gaps ({gap_text}), ratio m8/m16 = {ratio:.3f}")
    assert ok, f"fermi gap ratio {ratio:.3f} outside [3.0, 5.0]"


def test_criterion_5_conservation_every_iteration(example1_study, params):
    _, reports = example1_study
    worst_occ, worst_int = 0.0, 0.0
    for report in reports:
        for rec in report.iterations:
            worst_occ = max(worst_occ, rec.occupation_error / params.N0)
            worst_int = max(worst_int, rec.density_integral_error / params.N0)
    ok = worst_occ <= 1e-10 and worst_int <= 1e-9
    _verdict(5, ok, f"worst relative errors: occupation {worst_occ:.2e}, "
                    f"density integral {worst_int:.2e}")
    assert worst_occ <= 1e-10
    assert worst_int <= 1e-9


def test_criterion_6_basis_independence(params):
    mesh = build_structured_mesh(8)
    h = mesh_size(mesh)
    densities = []
    for seed in (101, 202):
        solver = SpectrumSolver(mesh, None, seed=seed, dense_cutoff=0)
        spectral, occ = determine_occupation(
            mesh, lambda L: solver.solve(None, L), params, h)
        densities.append(build_density(spectral, occ))
    diff = fem.l2_norm_error(mesh, densities[0], densities[1], tet_rule(5))
    ok = diff <= 1e-6
    _verdict(6, ok, f"L2 density difference between seeds = {diff:.3e}")
    assert ok


def test_criterion_7_oracle_self_consistency(params):
    rng = np.random.default_rng(1234)
    pts = 0.05 + 0.9 * rng.random((100, 3))
    worst = 0.0
    for example in (1, 2):
        problem = manufactured_problem(example, params)
        resid = problem.residual_check(pts)
        bound = 1e-6 * (1.0 + np.abs(problem.n_exact(pts)))
        worst = max(worst, float((resid / bound).max()))
        assert np.all(resid <= bound)
    _verdict(7, True, f"worst residual/bound = {worst:.3e} at 100 points")


def test_criterion_8_dense_equivalence(params):
    mesh = build_structured_mesh(4)
    K = fem.assemble_stiffness(mesh)
    M = fem.assemble_mass(mesh)
    res = lowest_eigenpairs(K, M, 8, dense_cutoff=0)  # iterative path
    w_ref, X_ref = sla.eigh(K.toarray(), M.toarray())
    value_err = float(np.abs(res.values - w_ref[:8]).max()
                      / np.abs(w_ref[:8]).max())
    assert value_err <= 1e-8

    # compare projectors cluster by cluster (values within 1e-8 relative);
    # a cluster cut open by the level count has no well-defined projector,
    # so a trailing cluster that continues past L is skipped
    def gap_tol(v):
        return 1e-8 * (1 + abs(v))

    Md = M.toarray()
    worst_proj = 0.0
    start = 0
    while start < 8:
        end = start + 1
        while end < 8 and abs(res.values[end] - res.values[start]) \
                <= gap_tol(res.values[start]):
            end += 1
        complete = end < 8 or \
            abs(w_ref[8] - res.values[start]) > gap_tol(res.values[start])
        if complete:
            P_ours = res.vectors[:, start:end] \
                @ res.vectors[:, start:end].T @ Md
            P_ref = X_ref[:, start:end] @ X_ref[:, start:end].T @ Md
            worst_proj = max(worst_proj, float(np.abs(P_ours - P_ref).max()))
        start = end
    ok = worst_proj <= 1e-6
    _verdict(8, ok, f"value err {value_err:.2e}, projector err {worst_proj:.2e}")
    assert ok


def test_criterion_9_slow_decay_regime(params):
    slow = DistributionParams(mu=2.2e-3, f0=4.4e-6, N0=100.0)
    problem = manufactured_problem(1, slow)
    mesh = build_structured_mesh(4)

    # default level cap: must raise rather than silently mistruncate
    with pytest.raises(TruncationOverflowError) as err:
        fixed_point_solve(mesh, ScfModel(problem.V0, problem.n_D, slow),
                          ScfConfig())
    assert err.value.required_window > err.value.achieved_window

    # raised cap: either completes or cleanly reports the shortfall
    try:
        report = fixed_point_solve(
            mesh, ScfModel(problem.V0, problem.n_D, slow),
            ScfConfig(L_max=2048))
        outcome = f"completed (converged={report.converged})"
    except TruncationOverflowError as exc:
        outcome = (f"clean report: {exc.levels} levels reach offset "
                   f"{exc.achieved_window:.1f} of required "
                   f"{exc.required_window:.1f}")
    _verdict(9, True, f"default cap raises; raised cap: {outcome}")
