import math
from math import comb

import numpy as np
import pytest

from explab import (
    InputDistribution,
    JointDistribution,
    empirical_joint_type,
    joint_type_enumerate,
    kl_divergence,
    simplex_grid_minimize,
    uniform_input,
)
from explab.errors import (
    EmptyFeasibleSet,
    EnumerationTooLarge,
    LengthMismatch,
    SupportViolation,
)


def test_kl_zero_at_product(q2):
    p = JointDistribution(np.outer(q2.q, q2.q))
    assert kl_divergence(p, q2, q2) == 0.0


def test_kl_point_mass_uniform(q2):
    p = JointDistribution(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert kl_divergence(p, q2, q2) == pytest.approx(math.log(4), abs=1e-15)


def test_kl_two_call_paths_agree(ch11, q2, d11):
    # P0 built here; e_trc_direct computes the same divergence internally:
    # interior exponent = D(P0) + <d, P0> - R must match to 1e-12
    from explab import e_trc_direct

    p0 = np.outer(q2.q, q2.q) * np.exp(-d11.d)
    p0 /= p0.sum()
    jd = JointDistribution(p0)
    div = kl_divergence(jd, q2, q2)
    r = 0.02
    sol = e_trc_direct(r, q2, ch11)
    assert sol.exponent == pytest.approx(
        div + float(np.sum(d11.d * p0)) - r, abs=1e-12
    )


def test_kl_support_violation():
    q = InputDistribution(np.array([1.0, 0.0]))
    p = JointDistribution(np.array([[0.5, 0.0], [0.5, 0.0]]))
    with pytest.raises(SupportViolation):
        kl_divergence(p, q, q)


def test_kl_nonnegative_random(rng):
    q = uniform_input(2)
    for _ in range(50):
        raw = rng.random((2, 2)) + 1e-3
        p = JointDistribution(raw / raw.sum())
        assert kl_divergence(p, q, q) >= 0.0


def test_empirical_joint_type_basic():
    jt = empirical_joint_type([0, 0, 1, 1], [0, 1, 0, 1])
    assert np.array_equal(jt.counts, [[1, 1], [1, 1]])
    assert jt.n == 4


def test_empirical_joint_type_diagonal():
    x = [0, 1, 1, 0, 1]
    jt = empirical_joint_type(x, x)
    assert np.array_equal(jt.counts, [[2, 0], [0, 3]])


def test_empirical_joint_type_length_mismatch():
    with pytest.raises(LengthMismatch):
        empirical_joint_type([0, 1], [0, 1, 1])


def test_empirical_joint_type_concentration(rng):
    n = 10_000
    xi = rng.integers(0, 2, n)
    xj = rng.integers(0, 2, n)
    jt = empirical_joint_type(xi, xj)
    off = (jt.counts[0, 1] + jt.counts[1, 0]) / n
    sigma = math.sqrt(0.25 / n)
    assert abs(off - 0.5) <= 5 * sigma


@pytest.mark.parametrize(
    "n,alphabet,expected",
    [(2, 2, 10), (1, 2, 4), (12, 2, 455), (3, 3, comb(3 + 8, 8))],
)
def test_enumerate_counts(n, alphabet, expected):
    types = joint_type_enumerate(n, alphabet)
    assert len(types) == expected
    # each exactly once, each summing to n
    seen = {t.counts.tobytes() for t in types}
    assert len(seen) == expected
    assert all(t.n == n for t in types)


def test_enumerate_guard():
    with pytest.raises(EnumerationTooLarge):
        joint_type_enumerate(10**6, 3)


def test_grid_min_divergence_alone(q2):
    def objective(stack):
        flat = stack.reshape(-1, 4)
        qq = 0.25
        with np.errstate(divide="ignore", invalid="ignore"):
            t = flat * np.log(flat / qq)
        t[flat == 0] = 0.0
        return t.sum(axis=1)

    val, argmin = simplex_grid_minimize(objective, 1.0, q2, 0.01)
    assert val == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(argmin.p, 0.25, atol=1e-12)


def test_grid_min_unconstrained_reaches_cutoff(ch11, q2, d11):
    from explab import cutoff_rate

    qq = np.outer(q2.q, q2.q).ravel()
    dflat = d11.d.ravel()

    def objective(stack):
        flat = stack.reshape(-1, 4)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = flat * np.log(flat / qq[None, :])
        t[flat == 0] = 0.0
        return t.sum(axis=1) + flat @ dflat

    val, _ = simplex_grid_minimize(objective, np.inf, q2, 0.005)
    assert val == pytest.approx(cutoff_rate(ch11, q2), abs=2e-3)
    # grid can only overshoot a convex minimum
    assert val >= cutoff_rate(ch11, q2) - 1e-12


def test_grid_min_matches_kkt_at_low_rate(ch11, q2, d11):
    from explab import e_trc_direct

    r = 0.01  # boundary branch
    qq = np.outer(q2.q, q2.q).ravel()
    dflat = d11.d.ravel()

    def objective(stack):
        flat = stack.reshape(-1, 4)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = flat * np.log(flat / qq[None, :])
        t[flat == 0] = 0.0
        return t.sum(axis=1) + flat @ dflat - r

    val, _ = simplex_grid_minimize(objective, 2 * r, q2, 0.005)
    sol = e_trc_direct(r, q2, ch11)
    assert val == pytest.approx(sol.exponent, abs=2e-3)
    assert val >= sol.exponent - 2e-3


def test_grid_empty_feasible_set():
    q = InputDistribution(np.array([0.3, 0.7]))

    def objective(stack):
        return np.zeros(stack.shape[0])

    with pytest.raises(EmptyFeasibleSet):
        simplex_grid_minimize(objective, 1e-9, q, 0.1)


def test_joint_distribution_validation():
    with pytest.raises(SupportViolation):
        JointDistribution(np.array([[0.6, 0.2], [0.3, 0.2]]))  # sums to 1.3
    with pytest.raises(SupportViolation):
        JointDistribution(np.array([[1.2, -0.2], [0.0, 0.0]]))
