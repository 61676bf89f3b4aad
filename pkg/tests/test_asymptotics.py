"""Small-diffusion limits, bracketing sequences, and a-priori bound audits.

Frozen numbers in this file come from independent derivations: algebraic
closed forms where available, otherwise brute-force scans or standalone
bisection on the defining scalar equations.
"""

import numpy as np
import pytest

from sisrd.asymptotics import (
    bisect_increasing,
    bounds_audit,
    classify_small_di,
    eliminate_susceptible,
    limit_joint_p1,
    limit_joint_sublinear,
    limit_small_di,
    limit_small_ds,
    monotone_joint_p1,
    monotone_joint_sublinear,
    susceptible_floor_constant,
)
from sisrd.coefficients import CoefficientSet
from sisrd.equilibrium import find_ee
from sisrd.grid import DomainSpec, build_domain

GOLDEN_S = 0.6180339887498949
GOLDEN_I = 0.3819660112501051
C0_REFERENCE = 0.20710678118654752  # (sqrt(2) - 1)/2


def interval(n=65):
    return build_domain(DomainSpec.interval(0, 1, n))


def golden_constants(dom, d_S=0.1, d_I=0.05):
    """Lambda=1, beta=2, gamma=eta=1, p=1/2, q=1: risk h = 1 everywhere."""
    return CoefficientSet.from_values(
        dom, beta=2.0, gamma=1.0, eta=1.0, recruitment=1.0,
        d_S=d_S, d_I=d_I, p=0.5, q=1.0,
    )


def mass_action_constants(dom, recruitment=2.0, d_S=0.1, d_I=0.05):
    """Lambda=2, beta=2, gamma=eta=1, p=q=1: h = 1, EE = (1, 1)."""
    return CoefficientSet.from_values(
        dom, beta=2.0, gamma=1.0, eta=1.0, recruitment=recruitment,
        d_S=d_S, d_I=d_I, p=1.0, q=1.0,
    )


def scenario_disk(p=1.0, cell=0.0625):
    dom = build_domain(DomainSpec.disk(1.0, (0, 0), cell))
    x, y = dom.coords[:, 0], dom.coords[:, 1]
    beta = 3.0 + 2.0 * np.sin(np.pi * x) * np.sin(np.pi * y)
    c = CoefficientSet.from_values(
        dom, beta=beta, gamma=1.0, eta=1.0, recruitment=1.0,
        d_S=1.0, d_I=0.001, p=p, q=0.5,
    )
    return dom, c


# ---------------------------------------------------------------------------
# Bisection
# ---------------------------------------------------------------------------


def test_bisection_scalar_root():
    root = bisect_increasing(lambda t: t * t - 2.0, 0.0, 2.0)
    assert root[0] == pytest.approx(np.sqrt(2.0), abs=1e-14)


def test_bisection_vectorized_roots():
    targets = np.array([1.0, 4.0, 9.0, 2.5])
    roots = bisect_increasing(lambda t: t * t - targets, np.zeros(4), np.full(4, 4.0))
    np.testing.assert_allclose(roots, np.sqrt(targets), atol=1e-13)


def test_bisection_rejects_bad_bracket():
    with pytest.raises(ValueError):
        bisect_increasing(lambda t: t + 1.0, 0.0, 1.0)


def test_bisection_against_brute_force_scan():
    # scan the golden-pair equation eta*t + h^(1/q) t^((1-p)/q) - Lambda on a
    # million-point grid, locate the sign change, and confirm the bisection
    # root lands inside that bracket
    def f(t):
        return t + np.sqrt(t) - 1.0

    grid = np.linspace(0.0, 1.0, 1_000_001)
    signs = f(grid)
    k = int(np.argmax(signs > 0.0))
    assert signs[k - 1] <= 0.0 < signs[k]
    root = bisect_increasing(f, 0.0, 1.0)[0]
    assert grid[k - 1] <= root <= grid[k]
    assert root == pytest.approx(GOLDEN_I, abs=1e-12)


# ---------------------------------------------------------------------------
# Susceptible elimination (d_S -> 0 inner problem)
# ---------------------------------------------------------------------------


def test_eliminate_susceptible_frozen_example():
    # s + beta s^q I^p = Lambda + gamma I with beta=q=p=1, I=0.25,
    # Lambda=0.75, gamma=1:  s(1 + 0.25) = 1  =>  s = 0.8
    dom = interval(5)
    c = CoefficientSet.from_values(
        dom, beta=1.0, gamma=1.0, eta=1.0, recruitment=0.75,
        d_S=0.1, d_I=0.1, p=1.0, q=1.0,
    )
    s = eliminate_susceptible(c, np.full(dom.n_nodes, 0.25))
    np.testing.assert_allclose(s, 0.8, atol=1e-13)


def test_eliminate_susceptible_handles_zero_infection():
    dom = interval(5)
    c = mass_action_constants(dom)
    s = eliminate_susceptible(c, np.zeros(dom.n_nodes))
    np.testing.assert_allclose(s, 2.0, atol=1e-13)  # reduces to s = Lambda


# ---------------------------------------------------------------------------
# d_I -> 0
# ---------------------------------------------------------------------------


def test_classification_requires_mass_action():
    dom = interval()
    with pytest.raises(ValueError):
        classify_small_di(golden_constants(dom))


def test_classification_masks_on_scenario_coefficients():
    dom, c = scenario_disk()
    profile = classify_small_di(c)
    high = profile.masks["high_risk"]
    vanish = profile.masks["vanishing"]
    # ceiling (2/beta)^2 < 1 = S~ exactly where beta > 2
    np.testing.assert_array_equal(high, c.beta.values > 2.0)
    assert not (high & vanish).any()
    # probe nodes: beta(0.5,0.5)=5 is high risk, beta(-0.5,0.5)=1 is not
    assert high[dom.nearest_node((0.5, 0.5))]
    assert vanish[dom.nearest_node((-0.5, 0.5))]
    assert not profile.meta["no_ee_for_small_d_I"]


def test_classification_flags_hopeless_coefficients():
    dom = interval()
    c = CoefficientSet.from_values(
        dom, beta=0.5, gamma=1.0, eta=1.0, recruitment=1.0,
        d_S=0.1, d_I=0.1, p=1.0, q=1.0,
    )  # ceiling (2/0.5) = 4 > 1 = S~ everywhere
    profile = classify_small_di(c)
    assert profile.meta["no_ee_for_small_d_I"]
    assert not profile.masks["high_risk"].any()


def test_sublinear_limit_constant_coefficients():
    # the scalar balance is 1 - S - S^2 = 0, independent of x
    dom = interval()
    profile = limit_small_di(golden_constants(dom))
    np.testing.assert_allclose(profile.S_limit.values, GOLDEN_S, atol=1e-8)
    np.testing.assert_allclose(profile.I_limit.values, GOLDEN_I, atol=1e-8)
    assert profile.meta["residual_sup"] <= 1e-8


def test_sublinear_limit_requires_sublinear():
    dom = interval()
    with pytest.raises(ValueError):
        limit_small_di(mass_action_constants(dom))


def test_sublinear_limit_varying_recruitment_residual():
    dom = build_domain(DomainSpec.interval(0, 1, 257))
    lam = 1.0 + 0.5 * np.sin(np.pi * dom.coords)
    c = CoefficientSet.from_values(
        dom, beta=2.0, gamma=1.0, eta=1.0, recruitment=lam,
        d_S=0.05, d_I=0.01, p=0.5, q=1.0,
    )
    profile = limit_small_di(c)
    assert profile.meta["residual_sup"] <= 1e-8
    # slaved infected field: I = (S^q/h)^(1/(1-p)) = S^2 here
    np.testing.assert_allclose(
        profile.I_limit.values, profile.S_limit.values**2, atol=1e-12
    )


# ---------------------------------------------------------------------------
# d_S -> 0
# ---------------------------------------------------------------------------


def test_small_ds_limit_constants():
    dom = interval(33)
    c = mass_action_constants(dom)  # EE (1, 1) independent of diffusion
    profile = limit_small_ds(c)
    np.testing.assert_allclose(profile.S_limit.values, 1.0, atol=1e-7)
    np.testing.assert_allclose(profile.I_limit.values, 1.0, atol=1e-7)
    assert profile.meta["residual_sup"] <= 1e-7


def test_small_ds_limit_refuses_subcritical_mass_action():
    dom = interval(33)
    c = CoefficientSet.from_values(
        dom, beta=0.4, gamma=0.5, eta=0.5, recruitment=1.0,
        d_S=0.1, d_I=0.05, p=1.0, q=1.0,
    )  # lambda0 = 0.6 > 0: no endemic limit
    with pytest.raises(ValueError, match="eigenvalue"):
        limit_small_ds(c)


def test_small_ds_limit_sublinear_close_to_ee():
    dom = interval(129)
    c = golden_constants(dom, d_S=1e-4, d_I=0.05)
    eq = find_ee(c)
    profile = limit_small_ds(c)
    assert np.abs(eq.S.values - profile.S_limit.values).max() <= 5e-3
    assert np.abs(eq.I.values - profile.I_limit.values).max() <= 5e-3


# ---------------------------------------------------------------------------
# Joint limit
# ---------------------------------------------------------------------------


def test_joint_p1_closed_form_probe_values():
    dom, c = scenario_disk()
    profile = limit_joint_p1(c, sigma=2.0)
    assert profile.meta["closed_form"]
    i = dom.nearest_node((0.5, 0.5))  # beta=5: ceiling=(2/5)^2=0.16
    j = dom.nearest_node((-0.5, 0.5))  # beta=1: ceiling=4>Lambda
    # probe node sits slightly off (0.5, 0.5); evaluate the exact formulas
    ceil_i = (2.0 / c.beta.values[i]) ** 2
    assert profile.S_limit.values[i] == pytest.approx(ceil_i, abs=1e-12)
    assert profile.I_limit.values[i] == pytest.approx(1.0 - ceil_i, abs=1e-12)
    assert profile.S_limit.values[j] == pytest.approx(1.0, abs=1e-12)
    assert profile.I_limit.values[j] == 0.0
    # the exact-point values quoted for (0.5, 0.5): S*=0.16, I*=0.84
    assert ceil_i == pytest.approx(0.16, abs=5e-3)


def test_joint_p1_below_threshold_returns_envelopes_only():
    dom = interval()
    c = mass_action_constants(dom)  # eta = 1
    profile = limit_joint_p1(c, sigma=0.5)
    assert not profile.meta["closed_form"]
    assert profile.S_limit is None
    env = profile.envelopes
    # with q=1 both extra envelopes exist and the generic cap uses min(sigma, eta)
    assert set(env) >= {"S_lower", "S_upper", "I_upper", "I_lower", "S_upper_pointwise"}
    np.testing.assert_allclose(env["I_upper"].values, (2.0 - 1.0) / 0.5)
    np.testing.assert_allclose(env["I_lower"].values, 1.0)
    np.testing.assert_allclose(env["S_lower"].values, min(2.0, 0.5))


def test_joint_p1_envelopes_contain_closed_form():
    dom, c = scenario_disk()
    profile = limit_joint_p1(c, sigma=2.0)
    S, I = profile.S_limit.values, profile.I_limit.values
    env = profile.envelopes
    tol = 1e-12
    assert (S >= env["S_lower"].values - tol).all()
    assert (S <= env["S_upper"].values + tol).all()
    assert (I <= env["I_upper"].values + tol).all()


def test_joint_p1_input_validation():
    dom = interval()
    c = mass_action_constants(dom)
    with pytest.raises(ValueError):
        limit_joint_p1(c, sigma=-1.0)
    with pytest.raises(ValueError):
        limit_joint_p1(golden_constants(dom), sigma=2.0)


def test_joint_sublinear_golden_pair():
    dom = interval()
    profile = limit_joint_sublinear(golden_constants(dom), sigma=2.0)
    np.testing.assert_allclose(profile.S_limit.values, GOLDEN_S, atol=1e-12)
    np.testing.assert_allclose(profile.I_limit.values, GOLDEN_I, atol=1e-12)
    assert profile.meta["mass_identity_sup"] <= 1e-12


def test_joint_sublinear_requires_large_sigma():
    dom = interval()
    with pytest.raises(ValueError, match="sigma"):
        limit_joint_sublinear(golden_constants(dom), sigma=0.5)


# ---------------------------------------------------------------------------
# Monotone bracketing sequences
# ---------------------------------------------------------------------------


def test_p1_increasing_sequence_frozen_iterates():
    dom = interval(9)
    c = mass_action_constants(dom)  # Lambda=2, h=1, eta=1; sigma=2
    seq = monotone_joint_p1(c, 2.0, "increasing")
    v = [it[0] for it in seq.v_iterates[:4]]
    u = [it[0] for it in seq.u_iterates[:4]]
    np.testing.assert_allclose(v, [0.0, 1.0, 1.5, 1.75], atol=1e-14)
    np.testing.assert_allclose(u, [2.0, 2.5, 2.75, 2.875], atol=1e-14)
    np.testing.assert_allclose(seq.v_limit, 2.0, atol=1e-14)
    np.testing.assert_allclose(seq.u_limit, 3.0, atol=1e-14)
    assert seq.converged


def test_p1_decreasing_sequence_start_and_limit():
    dom = interval(9)
    c = mass_action_constants(dom)
    seq = monotone_joint_p1(c, 2.0, "decreasing")
    # start value Lambda_max + (sigma+1) max(Lambda/eta) = 2 + 3*2 = 8
    assert seq.u_iterates[0][0] == pytest.approx(8.0)
    assert seq.v_iterates[0][0] == pytest.approx(8.0)
    np.testing.assert_allclose(seq.final_u, 3.0, atol=1e-8)
    np.testing.assert_allclose(seq.final_v, 2.0, atol=1e-8)


def test_p1_sequences_bracket_and_agree():
    dom, c = scenario_disk()
    inc = monotone_joint_p1(c, 2.0, "increasing")
    dec = monotone_joint_p1(c, 2.0, "decreasing")
    assert np.abs(inc.final_v - dec.final_v).max() <= 1e-8
    assert np.abs(inc.final_u - dec.final_u).max() <= 1e-8
    # independent oracle: bisect the fixed-point equation
    # v = (Lambda + (1-eta/sigma) v - ceiling)_+ per node
    lam = c.recruitment.values
    eta = c.eta.values
    ceiling = c.risk_ceiling()

    def g(v):
        return v - np.maximum(lam + (1 - eta / 2.0) * v - ceiling, 0.0)

    hi = np.full(dom.n_nodes, 100.0)
    v_oracle = bisect_increasing(g, np.zeros(dom.n_nodes), hi)
    assert np.abs(inc.v_limit - v_oracle).max() <= 1e-10


def test_p1_sequence_strictly_monotone_on_active_nodes():
    dom, c = scenario_disk()
    inc = monotone_joint_p1(c, 2.0, "increasing")
    active = inc.v_limit > 0.0
    for n in range(1, min(len(inc.v_iterates), 12)):
        dv = inc.v_iterates[n] - inc.v_iterates[n - 1]
        assert dv[active].min() > 0.0
        assert dv[~active].min() >= 0.0
    dec = monotone_joint_p1(c, 2.0, "decreasing")
    dec_active = dec.v_limit > 0.0
    for n in range(1, min(len(dec.v_iterates), 12)):
        dv = dec.v_iterates[n - 1] - dec.v_iterates[n]
        # strict decrease where the limit is positive; nodes whose limit is
        # zero may land on it exactly after finitely many rounds
        assert dv[dec_active].min() > 0.0
        assert dv.min() >= 0.0


def test_p1_sequence_gaps_shrink():
    dom = interval(9)
    c = mass_action_constants(dom)
    seq = monotone_joint_p1(c, 2.0, "increasing")
    gaps = seq.sup_gaps
    assert all(b <= a + 1e-14 for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 1e-9


def test_p1_sequence_sigma_validation():
    dom = interval(9)
    c = mass_action_constants(dom)
    with pytest.raises(ValueError, match="sigma"):
        monotone_joint_p1(c, 0.9, "increasing")
    with pytest.raises(ValueError):
        monotone_joint_p1(c, 2.0, "sideways")


def test_sublinear_sequence_frozen_first_round():
    dom = interval(9)
    c = golden_constants(dom)
    seq = monotone_joint_sublinear(c, 2.0, "increasing")
    # v_1 solves v + sqrt(v/2) = 1 => v = 1/2; u_1 = 1 + (1/2)(1/2) = 1.25
    assert seq.v_iterates[1][0] == pytest.approx(0.5, abs=1e-12)
    assert seq.u_iterates[1][0] == pytest.approx(1.25, abs=1e-12)
    # limits: v* = sigma I* with I* the golden root
    assert seq.v_limit[0] == pytest.approx(2.0 * GOLDEN_I, abs=1e-10)
    assert seq.u_limit[0] == pytest.approx(1.0 + 0.5 * 2.0 * GOLDEN_I, abs=1e-10)


def test_sublinear_sequences_converge_to_profile():
    dom = interval(9)
    c = golden_constants(dom)
    profile = limit_joint_sublinear(c, 2.0)
    for direction in ("increasing", "decreasing"):
        seq = monotone_joint_sublinear(c, 2.0, direction)
        np.testing.assert_allclose(seq.final_v / 2.0, profile.I_limit.values, atol=1e-8)
    inc = monotone_joint_sublinear(c, 2.0, "increasing")
    dec = monotone_joint_sublinear(c, 2.0, "decreasing")
    assert np.abs(inc.final_u - dec.final_u).max() <= 1e-8


def test_sublinear_sequence_scenario_coefficients():
    dom, c = scenario_disk(p=0.5)
    inc = monotone_joint_sublinear(c, 2.0, "increasing")
    dec = monotone_joint_sublinear(c, 2.0, "decreasing")
    assert np.abs(inc.final_v - dec.final_v).max() <= 1e-8
    profile = limit_joint_sublinear(c, 2.0)
    np.testing.assert_allclose(
        inc.v_limit / 2.0, profile.I_limit.values, atol=1e-10
    )
    # strict componentwise monotonicity early on (v* > 0 at every node)
    assert inc.v_limit.min() > 0.0
    for n in range(1, 6):
        assert (inc.v_iterates[n] - inc.v_iterates[n - 1]).min() > 0.0


# ---------------------------------------------------------------------------
# Bound audit
# ---------------------------------------------------------------------------


def test_floor_constant_frozen_value():
    dom = interval(9)
    c = CoefficientSet.from_values(
        dom, beta=1.0, gamma=1.0, eta=1.0, recruitment=1.0,
        d_S=0.1, d_I=0.1, p=0.5, q=1.0,
    )
    # target = 1/(1 + sqrt(d_S/d_I + 1)) = 1/(1+sqrt(2)); c0 = target/2
    assert susceptible_floor_constant(c) == pytest.approx(C0_REFERENCE, abs=1e-12)


def test_audit_mass_action_ee():
    dom = interval(65)
    c = mass_action_constants(dom)
    report = bounds_audit(c, find_ee(c))
    assert report.all_passed
    names = {ch["name"] for ch in report.checks}
    assert names == {"S_min_floor", "S_max_cap"}
    assert report.c0 is None


def test_audit_sublinear_ee():
    dom = interval(65)
    c = golden_constants(dom)
    report = bounds_audit(c, find_ee(c))
    assert report.all_passed
    names = {ch["name"] for ch in report.checks}
    assert names == {
        "I_min_vs_S_min",
        "I_max_vs_S_max",
        "S_max_diffusion_cap",
        "I_max_diffusion_cap",
        "S_min_positive_floor",
        "I_min_positive_floor",
    }
    assert report.c0 is not None and report.c0 > 0.0
    assert not report.failed()


def test_audit_detects_violations():
    dom = interval(65)
    c = golden_constants(dom)
    eq = find_ee(c)
    # inflate the susceptible field past the diffusion cap
    from dataclasses import replace

    fake = replace(eq, S=dom.field(eq.S.values * 10.0))
    report = bounds_audit(c, fake)
    assert not report.all_passed
    assert any(ch["name"] == "S_max_diffusion_cap" for ch in report.failed())
