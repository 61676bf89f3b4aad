"""Disease-free and endemic steady states against independent oracles."""

import numpy as np
import pytest

from sisrd.coefficients import CoefficientSet
from sisrd.dynamics import SimState
from sisrd.equilibrium import (
    conservation_gap,
    diagnostics,
    find_ee,
    grid_tolerance,
    solve_dfe,
)
from sisrd.grid import (
    DomainSpec,
    assemble_neumann_laplacian,
    build_domain,
    stiffness_matrix,
)
from sisrd.solvers import NonConvergenceError

# Constant-coefficient fixtures with hand-solvable equilibria:
#   mass action (p = q = 1):  S = h, I = (Lambda - h)/eta
#   saturating (p = 1/2, q = 1, h = 1, eta = 1):  1 - S - S^2 = 0
GOLDEN_S = 0.6180339887498949  # (sqrt(5) - 1)/2
GOLDEN_I = 0.3819660112501051  # GOLDEN_S**2


def constants_p1(dom=None):
    if dom is None:
        dom = build_domain(DomainSpec.rectangle((0, 1), (0, 1), (17, 17)))
    return dom, CoefficientSet.from_values(
        dom, beta=1.0, gamma=0.5, eta=0.5, recruitment=2.0,
        d_S=0.1, d_I=0.05, p=1.0, q=1.0,
    )


def constants_sublinear(dom=None):
    if dom is None:
        dom = build_domain(DomainSpec.interval(0, 1, 65))
    return dom, CoefficientSet.from_values(
        dom, beta=2.0, gamma=1.0, eta=1.0, recruitment=1.0,
        d_S=0.1, d_I=0.05, p=0.5, q=1.0,
    )


# ---------------------------------------------------------------------------
# Disease-free profile
# ---------------------------------------------------------------------------


def test_dfe_constant_recruitment_is_identity():
    dom, c = constants_p1()
    S = solve_dfe(c)
    np.testing.assert_allclose(S.values, 2.0, atol=1e-11)


def test_dfe_matches_dense_linear_solve():
    # independent route: assemble (W + d_S K) S = W Lambda densely and use
    # numpy's direct solver
    dom = build_domain(DomainSpec.interval(0, 1, 129))
    lam = 1.0 + 0.5 * np.sin(np.pi * dom.coords)
    c = CoefficientSet.from_values(
        dom, beta=1.0, gamma=0.5, eta=0.5, recruitment=lam,
        d_S=0.05, d_I=0.05, p=1.0, q=1.0,
    )
    S = solve_dfe(c).values
    W = np.diag(dom.cell_measures)
    A = W + 0.05 * stiffness_matrix(dom).toarray()
    expected = np.linalg.solve(A, dom.cell_measures * lam)
    np.testing.assert_allclose(S, expected, atol=1e-10)
    # and the residual of the continuous equation is at solver precision
    L = assemble_neumann_laplacian(dom)
    assert np.abs(0.05 * (L @ S) - S + lam).max() <= 1e-9


# ---------------------------------------------------------------------------
# Endemic equilibria with known values
# ---------------------------------------------------------------------------


def test_ee_mass_action_constants():
    dom, c = constants_p1()
    eq = find_ee(c)
    assert eq.endemic
    np.testing.assert_allclose(eq.S.values, 1.0, atol=1e-6)
    np.testing.assert_allclose(eq.I.values, 2.0, atol=1e-6)
    assert eq.residual_S <= 1e-10
    assert eq.residual_I <= 1e-10
    assert eq.conservation_gap <= 1e-12


def test_ee_saturating_constants_golden_pair():
    dom, c = constants_sublinear()
    eq = find_ee(c)
    assert eq.endemic
    np.testing.assert_allclose(eq.S.values, GOLDEN_S, atol=1e-5)
    np.testing.assert_allclose(eq.I.values, GOLDEN_I, atol=1e-5)


def test_golden_pair_against_bisection_oracle():
    # the reduced scalar equation is I + sqrt(I) = 1: bisect it directly
    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid + np.sqrt(mid) <= 1.0:
            lo = mid
        else:
            hi = mid
    I_oracle = 0.5 * (lo + hi)
    assert I_oracle == pytest.approx(GOLDEN_I, abs=1e-12)
    assert np.sqrt(I_oracle) == pytest.approx(GOLDEN_S, abs=1e-12)


def test_subcritical_constants_reach_dfe():
    dom = build_domain(DomainSpec.rectangle((0, 1), (0, 1), (9, 9)))
    c = CoefficientSet.from_values(
        dom, beta=0.4, gamma=0.5, eta=0.5, recruitment=1.0,
        d_S=0.1, d_I=0.05, p=1.0, q=1.0,
    )  # R0 = 0.4 < 1
    eq = find_ee(c)
    assert not eq.endemic
    np.testing.assert_allclose(eq.S.values, 1.0, atol=1e-5)
    assert eq.I.values.max() <= 1e-6


def test_newton_refines_to_tight_residual():
    dom = build_domain(DomainSpec.interval(0, 1, 65))
    lam = 1.0 + 0.5 * np.sin(np.pi * dom.coords)
    c = CoefficientSet.from_values(
        dom, beta=2.0, gamma=1.0, eta=1.0, recruitment=lam,
        d_S=0.05, d_I=0.02, p=0.5, q=1.0,
    )
    rough = find_ee(c, newton=False, steady_tol=1e-7)
    sharp = find_ee(c, newton=True)
    assert sharp.newton_applied
    assert max(sharp.residual_S, sharp.residual_I) <= 1e-10
    assert max(sharp.residual_S, sharp.residual_I) < max(
        rough.residual_S, rough.residual_I
    )


def test_ee_independent_of_initial_state():
    dom, c = constants_p1()
    a = find_ee(c, init=SimState(dom.field(0.8), dom.field(0.2)))
    b = find_ee(c, init=SimState(dom.field(3.0), dom.field(0.01)))
    assert np.abs(a.S.values - b.S.values).max() <= 1e-5
    assert np.abs(a.I.values - b.I.values).max() <= 1e-5


def test_nonconvergence_is_loud():
    dom, c = constants_p1()
    with pytest.raises(NonConvergenceError):
        find_ee(c, steady_tol=1e-14, t_max=0.3)


def test_conservation_gap_definition():
    dom, c = constants_p1()
    S = np.full(dom.n_nodes, 1.0)
    I = np.full(dom.n_nodes, 2.0)
    assert conservation_gap(c, S, I) <= 1e-14  # 1 + 0.5*2 = 2 = Lambda
    assert conservation_gap(c, S, 0.0 * I) == pytest.approx(0.5)


def test_diagnostics_extremum_signs():
    dom, c = constants_sublinear()
    eq = find_ee(c)
    diag = diagnostics(c, eq)
    assert diag["extremum_checks_pass"]
    assert "conservation_gap" in diag


def test_grid_tolerance_scales_with_spacing():
    coarse = build_domain(DomainSpec.interval(0, 1, 11))
    fine = build_domain(DomainSpec.interval(0, 1, 101))
    assert grid_tolerance(coarse) == pytest.approx(1e-6 + 2 * 0.1**2)
    assert grid_tolerance(fine) < grid_tolerance(coarse)


def test_spatially_varying_ee_satisfies_pde():
    dom = build_domain(DomainSpec.interval(0, 1, 129))
    beta = 2.0 + np.sin(2 * np.pi * dom.coords)
    c = CoefficientSet.from_values(
        dom, beta=beta, gamma=0.5, eta=0.5, recruitment=1.0,
        d_S=0.1, d_I=0.05, p=1.0, q=1.0,
    )
    eq = find_ee(c)
    assert eq.endemic
    # residuals returned are sup norms of the discrete elliptic equations
    assert eq.residual_S <= 1e-10
    assert eq.residual_I <= 1e-10
    assert eq.conservation_gap <= 1e-10
    # infection should be highest where transmission peaks (x = 0.25)
    peak = dom.nearest_node((0.25,))
    assert eq.I.values[peak] == pytest.approx(eq.I.values.max(), rel=1e-2)
