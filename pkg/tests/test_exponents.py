import math

import numpy as np
import pytest

from explab import (
    InputDistribution,
    bsc,
    critical_rate,
    cutoff_rate,
    e0_cc,
    e0_iid,
    e_ex,
    e_rce,
    e_sp,
    e_trc,
    e_trc_direct,
    ex_gallager,
    kl_divergence,
    mutual_information,
    uniform_input,
    validate_channel,
)
from explab.errors import RateOutOfRange, RhoOutOfRange
from explab.exponents import TrcBranch

# frozen from direct formula evaluation (independent plain-math oracle below)
E0_HALF_BSC11 = 0.1306451912761942
EX_LIMIT_BSC11 = 0.2343785920814454  # d_B(0,1)/2


def _e0_oracle(rho, p):
    """Plain-math E0 for a BSC with uniform input."""
    s = 1.0 / (1.0 + rho)
    inner = 0.5 * (1 - p) ** s + 0.5 * p**s
    return -math.log(2 * inner ** (1 + rho))


def test_e0_iid_zero_rho(ch11, q2):
    assert e0_iid(0.0, q2, ch11) == 0.0


def test_e0_iid_equals_cutoff_at_one(ch11, q2):
    assert abs(e0_iid(1.0, q2, ch11) - cutoff_rate(ch11, q2)) <= 1e-12


def test_e0_iid_midpoint_value_and_concavity(ch11, q2):
    v = e0_iid(0.5, q2, ch11)
    assert v == pytest.approx(_e0_oracle(0.5, 0.11), abs=1e-14)
    assert v == pytest.approx(E0_HALF_BSC11, abs=1e-12)
    assert 0 < v < cutoff_rate(ch11, q2)
    assert v > 0.5 * (e0_iid(0.0, q2, ch11) + e0_iid(1.0, q2, ch11))


def test_e0_concave_nondecreasing_grid(ch11, q2):
    rhos = np.linspace(0, 1, 11)
    vals = [e0_iid(float(r), q2, ch11) for r in rhos]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    mids = [0.5 * (a + c) for a, c in zip(vals, vals[2:])]
    assert all(v >= m - 1e-12 for v, m in zip(vals[1:-1], mids))


def test_e0_rho_range_enforced(ch11, q2):
    with pytest.raises(RhoOutOfRange):
        e0_iid(1.5, q2, ch11)
    with pytest.raises(RhoOutOfRange):
        e0_cc(-0.1, q2, ch11)


def test_e0_cc_zero_rho(ch11, q2):
    assert e0_cc(0.0, q2, ch11) == 0.0


@pytest.mark.parametrize("rho", [0.25, 0.5, 0.75, 1.0])
def test_e0_cc_matches_iid_on_symmetric_channel(ch11, q2, rho):
    # optimal tilt is constant for symmetric channels: ascent must not improve
    assert e0_cc(rho, q2, ch11) == pytest.approx(e0_iid(rho, q2, ch11), abs=1e-8)


def test_e0_cc_dominates_iid_on_z_channel():
    ch = validate_channel([[1.0, 0.0], [0.3, 0.7]])
    q = uniform_input(2)
    icc = e0_cc(1.0, q, ch)
    iid = e0_iid(1.0, q, ch)
    assert icc >= iid - 1e-9
    assert icc > iid + 1e-4  # asymmetric channel: strict improvement


def test_e_rce_zero_rate(ch11, q2):
    pt = e_rce(0.0, q2, ch11)
    assert pt.value == pytest.approx(cutoff_rate(ch11, q2), abs=1e-10)
    assert pt.optimizer == 1.0


def test_e_rce_vanishes_at_mutual_information(ch11, q2):
    cap = mutual_information(ch11, q2)
    assert e_rce(cap, q2, ch11).value <= 1e-8


def test_e_rce_low_rate_line(ch11, q2):
    pt = e_rce(0.05, q2, ch11)
    assert pt.optimizer == 1.0
    assert pt.value == pytest.approx(cutoff_rate(ch11, q2) - 0.05, abs=1e-10)


def test_e_rce_convex_nonincreasing(ch11, q2):
    cap = mutual_information(ch11, q2)
    rates = np.linspace(0, cap, 50)
    vals = [e_rce(float(r), q2, ch11).value for r in rates]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
    mids = [0.5 * (a + c) for a, c in zip(vals, vals[2:])]
    assert all(v <= m + 1e-9 for v, m in zip(vals[1:-1], mids))


def test_critical_rate_bsc11(ch11, q2):
    rc = critical_rate(q2, ch11)
    assert 0 < rc < cutoff_rate(ch11, q2)
    # just below R_crit the maximizer still sits at the rho = 1 boundary
    assert e_rce(rc - 1e-4, q2, ch11).optimizer >= 1 - 1e-3
    # definitional consistency of both characterizations at R_crit
    assert e_rce(rc, q2, ch11).value == pytest.approx(
        cutoff_rate(ch11, q2) - rc, abs=1e-6
    )


def test_critical_rate_near_useless_channel():
    ch = bsc(0.499)
    assert critical_rate(uniform_input(2), ch) < 1e-4


def test_ex_gallager_rho_one_is_cutoff(ch11, q2):
    assert ex_gallager(1.0, q2, ch11) == pytest.approx(
        cutoff_rate(ch11, q2), abs=1e-12
    )
    with pytest.raises(RhoOutOfRange):
        ex_gallager(0.9, q2, ch11)


def test_e_ex_high_rate_branch(ch11, q2):
    # for large R the supremum sits at rho* = 1: E_ex = Ex(1) - R, raw value
    r = 0.25
    pt = e_ex(r, q2, ch11)
    assert pt.optimizer == 1.0
    assert pt.value == pytest.approx(ex_gallager(1.0, q2, ch11) - r, abs=1e-10)


def test_e_ex_zero_rate_limit(ch11, q2, d11):
    pt = e_ex(0.0, q2, ch11)
    oracle = float(np.sum(np.outer(q2.q, q2.q) * d11.d))  # QQ-average of d_B
    assert pt.value == pytest.approx(oracle, abs=1e-14)
    assert pt.value == pytest.approx(EX_LIMIT_BSC11, abs=1e-12)
    # the search objective plateaus at this value by rho = 1e5
    assert ex_gallager(1e5, q2, ch11) == pytest.approx(pt.value, abs=1e-4)


def test_e_ex_beats_rce_at_low_rate(ch11, q2):
    assert e_ex(0.01, q2, ch11).value >= e_rce(0.01, q2, ch11).value


def test_e_sp_equals_rce_above_critical(ch11, q2):
    rc = critical_rate(q2, ch11)
    for r in (rc, rc + 0.02, 0.3):
        assert e_sp(r, q2, ch11).value == pytest.approx(
            e_rce(r, q2, ch11).value, abs=1e-6
        )


def test_e_sp_vanishes_at_capacity(ch11, q2):
    cap = mutual_information(ch11, q2)
    assert e_sp(cap, q2, ch11).value <= 1e-8


def test_e_sp_tiny_rate_finite_and_above_expurgated_zero(ch11, q2):
    # all-positive BSC: E0 is bounded, so the supremum is attained
    pt = e_sp(1e-6, q2, ch11)
    assert math.isfinite(pt.value)
    assert pt.value >= e_ex(0.0, q2, ch11).value


def test_e_sp_rejects_nonpositive_rate(ch11, q2):
    with pytest.raises(RateOutOfRange):
        e_sp(0.0, q2, ch11)


def test_e_trc_zero_rate(ch11, q2):
    v = e_trc(0.0, q2, ch11).value
    assert v == pytest.approx(EX_LIMIT_BSC11, abs=1e-12)
    assert v == pytest.approx(
        max(e_ex(0.0, q2, ch11).value, cutoff_rate(ch11, q2)), abs=1e-14
    )


def test_e_trc_equals_rce_above_critical(ch11, q2):
    rc = critical_rate(q2, ch11)
    for r in (rc + 1e-3, 0.2, 0.3):
        assert e_trc(r, q2, ch11).value == pytest.approx(
            e_rce(r, q2, ch11).value, abs=1e-8
        )


def test_e_trc_dominates_rce_on_grid(ch11, q2):
    cap = mutual_information(ch11, q2)
    for r in np.linspace(0, cap * 0.999, 50):
        r = float(r)
        assert e_trc(r, q2, ch11).value >= e_rce(r, q2, ch11).value - 1e-12


def test_e_trc_rejects_rates_at_capacity(ch11, q2):
    with pytest.raises(RateOutOfRange):
        e_trc(mutual_information(ch11, q2), q2, ch11)


def test_e_trc_direct_interior_branch(ch11, q2):
    # 2R = 0.04 exceeds D(P0||QxQ) = 0.02673: unconstrained optimum feasible
    sol = e_trc_direct(0.02, q2, ch11)
    assert sol.branch is TrcBranch.INTERIOR_P0
    assert sol.lambda_star is None
    assert sol.exponent == pytest.approx(cutoff_rate(ch11, q2) - 0.02, abs=1e-12)
    assert sol.exponent == pytest.approx(e_rce(0.02, q2, ch11).value, abs=1e-10)
    assert kl_divergence(sol.p_opt, q2, q2) <= 2 * 0.02


def test_e_trc_direct_boundary_branch(ch11, q2):
    sol = e_trc_direct(0.01, q2, ch11)
    assert sol.branch is TrcBranch.BOUNDARY_P_STAR
    assert sol.lambda_star > 0
    div = kl_divergence(sol.p_opt, q2, q2)
    assert abs(div - 0.02) <= 1e-8
    assert sol.exponent == pytest.approx(e_trc(0.01, q2, ch11).value, abs=1e-4)


def test_e_trc_direct_closed_form_agreement(ch11, q2):
    rc = critical_rate(q2, ch11)
    for r in np.linspace(rc / 20, rc * 0.95, 20):
        r = float(r)
        assert e_trc_direct(r, q2, ch11).exponent == pytest.approx(
            e_trc(r, q2, ch11).value, abs=2e-3
        )


def test_e_trc_direct_rate_range(ch11, q2):
    rc = critical_rate(q2, ch11)
    with pytest.raises(RateOutOfRange):
        e_trc_direct(0.0, q2, ch11)
    with pytest.raises(RateOutOfRange):
        e_trc_direct(rc + 0.01, q2, ch11)


def test_trc_solution_optimizer_is_tilted_product(ch11, q2, d11):
    # P* must be the tilted product QQ e^{-d/(1+lambda*)} / Z
    sol = e_trc_direct(0.005, q2, ch11)
    lam = sol.lambda_star
    expected = np.outer(q2.q, q2.q) * np.exp(-d11.d / (1.0 + lam))
    expected /= expected.sum()
    assert np.allclose(sol.p_opt.p, expected, atol=1e-12)


def test_point_mass_input_collapses_exponents(ch11):
    q = InputDistribution(np.array([1.0, 0.0]))
    assert e_rce(0.0, q, ch11).value == pytest.approx(0.0, abs=1e-12)
