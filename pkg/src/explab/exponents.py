"""Error-exponent family: E0, random-coding, expurgated, sphere-packing,
and the typical random-coding exponent via both its closed form and the
direct joint-type minimization with KKT optimizers.

Everything is in nats. `rho` maximizations use derivative-free
golden-section search on concave objectives; the direct solver bisects
the Lagrange multiplier of the divergence constraint.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import Channel, InputDistribution, bhattacharyya_matrix
from .errors import (
    BisectionFailure,
    BracketExhausted,
    Diverging,
    NonConvergence,
    RateOutOfRange,
    RhoOutOfRange,
)
from .typecalc import JointDistribution, _kl_raw

GOLDEN_TOL = 1e-10
EX_RHO_CAP = 1e6
SP_RHO_CAP = 1e4
PLATEAU_REL = 1e-10
CC_TOL = 1e-9
CC_MAX_ITER = 10_000


@dataclass(frozen=True)
class ExponentPoint:
    """A point (R, E(R)) with an optional optimizer diagnostic."""

    rate: float
    value: float
    optimizer: float | None = None


class TrcBranch(enum.Enum):
    INTERIOR_P0 = "InteriorP0"
    BOUNDARY_P_STAR = "BoundaryPStar"
    HIGH_RATE_RCE = "HighRateRce"


@dataclass(frozen=True)
class TrcSolution:
    """Output of the direct joint-type solver."""

    exponent: float
    branch: TrcBranch
    lambda_star: float | None
    p_opt: JointDistribution


def _golden_max(f, lo: float, hi: float, tol: float = GOLDEN_TOL):
    """Golden-section maximization of a concave f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


# --- E0 functions -----------------------------------------------------------

def _e0_iid_raw(rho: float, q: np.ndarray, w: np.ndarray) -> float:
    if rho == 0.0:
        return 0.0
    inner = q @ w ** (1.0 / (1.0 + rho))
    return float(-np.log(np.sum(inner ** (1.0 + rho))))


def e0_iid(rho: float, q: InputDistribution, ch: Channel) -> float:
    """Gallager E0 for the i.i.d. ensemble, rho in [0, 1]."""
    if not 0.0 <= rho <= 1.0:
        raise RhoOutOfRange(f"rho = {rho} outside [0, 1]")
    return _e0_iid_raw(rho, q.q, ch.w)


def _e0_cc_raw(rho: float, q: np.ndarray, w: np.ndarray) -> float:
    """sup over the auxiliary tilt a(.) by projected gradient ascent.

    The gauge sum_x Q(x) a(x) = 0 is fixed by recentering; starting from
    a = 0 the objective starts at the i.i.d. value, so dominance over
    the i.i.d. exponent is automatic.
    """
    if rho == 0.0:
        return 0.0
    s = 1.0 / (1.0 + rho)
    ws = w ** s

    def objective(a: np.ndarray) -> float:
        g = (q * np.exp(a)) @ ws
        return float(-np.log(np.sum(g ** (1.0 + rho))))

    def gradient(a: np.ndarray) -> np.ndarray:
        weight = q * np.exp(a)
        g = weight @ ws
        big = np.sum(g ** (1.0 + rho))
        # d/da(x) of -ln big, before projecting out the gauge direction
        raw = -(1.0 + rho) / big * (weight * (ws @ g ** rho))
        return raw - q * raw.sum()

    a = np.zeros_like(q)
    val = objective(a)
    step = 1.0
    for _ in range(CC_MAX_ITER):
        grad = gradient(a)
        gn = float(np.sqrt(np.sum(grad * grad)))
        if gn < 1e-12:
            return val
        improved = False
        while step > 1e-18:
            cand = a + step * grad
            cand = cand - q @ cand  # keep the gauge
            cval = objective(cand)
            if cval > val:
                improved = True
                break
            step *= 0.5
        if not improved:
            return val
        if cval - val < CC_TOL:
            return cval
        a, val = cand, cval
        step *= 2.0
    raise NonConvergence(f"constant-composition ascent exceeded {CC_MAX_ITER} iterations")


def e0_cc(rho: float, q: InputDistribution, ch: Channel) -> float:
    """E0 for the constant-composition ensemble, rho in [0, 1]."""
    if not 0.0 <= rho <= 1.0:
        raise RhoOutOfRange(f"rho = {rho} outside [0, 1]")
    return _e0_cc_raw(rho, q.q, ch.w)


def _e0_for(ensemble: str):
    if ensemble == "iid":
        return _e0_iid_raw
    if ensemble == "cc":
        return _e0_cc_raw
    raise ValueError(f"unknown ensemble {ensemble!r}")


# --- random-coding exponent and critical rate --------------------------------

def e_rce(
    rate: float, q: InputDistribution, ch: Channel, ensemble: str = "iid"
) -> ExponentPoint:
    """max over rho in [0,1] of E0(rho) - rho R; optimizer carries rho*."""
    if rate < 0:
        raise RateOutOfRange(f"rate = {rate} < 0")
    e0 = _e0_for(ensemble)
    rho, val = _golden_max(lambda r: e0(r, q.q, ch.w) - r * rate, 0.0, 1.0)
    # the boundary maximizers are exactly 0 or 1; snap within search tolerance
    if rho < 10 * GOLDEN_TOL:
        rho, val = 0.0, 0.0
    elif rho > 1.0 - 10 * GOLDEN_TOL:
        cand = e0(1.0, q.q, ch.w) - rate
        if cand >= val:
            rho, val = 1.0, cand
    return ExponentPoint(rate, max(0.0, val), rho)


def critical_rate(
    q: InputDistribution, ch: Channel, ensemble: str = "iid"
) -> float:
    """dE0/drho at rho = 1 by central finite difference (step 1e-6)."""
    e0 = _e0_for(ensemble)
    h = 1e-6
    return (e0(1.0 + h, q.q, ch.w) - e0(1.0 - h, q.q, ch.w)) / (2.0 * h)


# --- expurgated exponent ------------------------------------------------------

def _bhatt_coeff(ch: Channel) -> np.ndarray:
    s = np.sqrt(ch.w)
    return s @ s.T


def ex_gallager(rho: float, q: InputDistribution, ch: Channel) -> float:
    """Ex(rho,Q) = -rho ln sum_{x,x'} Q(x)Q(x') BC(x,x')^(1/rho) for rho >= 1."""
    if rho < 1.0:
        raise RhoOutOfRange(f"rho = {rho} < 1")
    bc = _bhatt_coeff(ch)
    qq = np.outer(q.q, q.q)
    return float(-rho * np.log(np.sum(qq * bc ** (1.0 / rho))))


def _ex_limit(q: InputDistribution, ch: Channel) -> float:
    """rho -> infinity limit of Ex: the QQ-average Bhattacharyya distance."""
    d = bhattacharyya_matrix(ch).d
    return float(np.sum(np.outer(q.q, q.q) * d))


def e_ex(rate: float, q: InputDistribution, ch: Channel) -> ExponentPoint:
    """Expurgated exponent sup_{rho >= 1} [Ex(rho) - rho R].

    At R = 0 the supremum is the rho -> infinity limit and is returned in
    closed form (optimizer = inf). For R > 0 the bracket doubles from
    rho = 1 until the concave objective turns over, then golden-section
    finishes. A plateau within 1e-10 relative across the last decade at
    the cap is treated as the limit; otherwise BracketExhausted.

    The raw supremum is returned unclamped: above the cutoff rate it goes
    negative (the bound is vacuous there), and the typical random-coding
    maximum relies on the raw value.
    """
    if rate < 0:
        raise RateOutOfRange(f"rate = {rate} < 0")
    if rate < 1e-12:
        return ExponentPoint(rate, _ex_limit(q, ch), math.inf)

    def f(rho: float) -> float:
        return ex_gallager(rho, q, ch) - rho * rate

    # expand until the concave objective turns over: max is then in (a, c)
    a, b = 1.0, 1.0
    fb = f(1.0)
    c = 2.0
    while c <= EX_RHO_CAP:
        fc = f(c)
        if fc < fb:
            break
        a, b, fb = b, c, fc
        c *= 2.0
    else:
        if abs(f(EX_RHO_CAP) - f(EX_RHO_CAP / 10.0)) <= PLATEAU_REL * max(
            1.0, abs(f(EX_RHO_CAP))
        ):
            return ExponentPoint(rate, _ex_limit(q, ch), math.inf)
        raise BracketExhausted(
            f"expurgated objective still increasing at rho = {EX_RHO_CAP:g}"
        )
    rho, val = _golden_max(f, a, c)
    f1 = f(1.0)
    if f1 >= val:
        rho, val = 1.0, f1
    return ExponentPoint(rate, val, rho)


# --- sphere packing -----------------------------------------------------------

def e_sp(rate: float, q: InputDistribution, ch: Channel) -> ExponentPoint:
    """Sphere-packing exponent sup_{rho >= 0} [E0(rho) - rho R], rate > 0."""
    if rate <= 0:
        raise RateOutOfRange(f"rate = {rate} must be positive")

    def f(rho: float) -> float:
        return _e0_iid_raw(rho, q.q, ch.w) - rho * rate

    a, b = 0.0, 0.0
    fb = 0.0
    c = 1.0
    while c <= SP_RHO_CAP:
        fc = f(c)
        if fc < fb:
            break
        a, b, fb = b, c, fc
        c *= 2.0
    else:
        raise Diverging(
            f"sphere-packing supremum not attained for rho <= {SP_RHO_CAP:g}"
        )
    rho, val = _golden_max(f, a, c)
    return ExponentPoint(rate, max(0.0, val), rho)


# --- typical random coding ----------------------------------------------------

def e_trc(rate: float, q: InputDistribution, ch: Channel) -> ExponentPoint:
    """max{ E_ex(2R) + R, E_rce(R) } for 0 <= R < I(Q,W)."""
    from .channel import mutual_information

    if rate < 0 or rate >= mutual_information(ch, q):
        raise RateOutOfRange(f"rate = {rate} outside [0, I(Q,W))")
    ex = e_ex(2.0 * rate, q, ch)
    rce = e_rce(rate, q, ch)
    if ex.value + rate >= rce.value:
        return ExponentPoint(rate, ex.value + rate, ex.optimizer)
    return ExponentPoint(rate, rce.value, rce.optimizer)


def e_trc_direct(
    rate: float, q: InputDistribution, ch: Channel
) -> TrcSolution:
    """Direct joint-type minimization of the typical random-coding exponent.

    Solves min over P with D(P||QxQ) <= 2R of D(P||QxQ) + <d_B, P> - R.
    The unconstrained optimum P0 ~ QQ e^{-d_B} is returned when feasible;
    otherwise the multiplier of the active constraint is bisected in
    P* ~ QQ e^{-d_B/(1+lambda)} until D(P*||QxQ) = 2R.
    """
    rcrit = critical_rate(q, ch)
    if not 0.0 < rate < rcrit:
        raise RateOutOfRange(f"rate = {rate} outside (0, R_crit = {rcrit:.6g})")
    d = bhattacharyya_matrix(ch).d
    qq = np.outer(q.q, q.q)
    two_r = 2.0 * rate

    def tilted(lam: float) -> np.ndarray:
        p = qq * np.exp(-d / (1.0 + lam))
        return p / p.sum()

    p0 = tilted(0.0)
    div0 = _kl_raw(p0.ravel(), qq.ravel())
    if div0 <= two_r:
        value = div0 + float(np.sum(d * p0)) - rate
        return TrcSolution(value, TrcBranch.INTERIOR_P0, None, JointDistribution(p0))

    def residual(lam: float) -> float:
        return _kl_raw(tilted(lam).ravel(), qq.ravel()) - two_r

    # D(P*(lam) || QQ) decreases in lam; verify while expanding the bracket
    lo, flo = 1e-9, residual(1e-9)
    if flo <= 0.0:
        raise BisectionFailure("constraint already slack at lambda = 1e-9")
    hi, fhi = 1e3, residual(1e3)
    prev = flo
    while fhi > 0.0:
        if fhi > prev:
            raise BisectionFailure("divergence not decreasing in lambda")
        prev = fhi
        hi *= 10.0
        if hi > 1e9:
            raise BisectionFailure("no sign change for lambda <= 1e9")
        fhi = residual(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = residual(mid)
        if abs(fmid) <= 1e-14:
            lo = hi = mid
            break
        if fmid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    lam = 0.5 * (lo + hi)
    p_star = tilted(lam)
    div = _kl_raw(p_star.ravel(), qq.ravel())
    if abs(div - two_r) > 1e-10:
        raise BisectionFailure(
            f"bisection residual {abs(div - two_r):.3e} exceeds 1e-10"
        )
    value = div + float(np.sum(d * p_star)) - rate
    return TrcSolution(value, TrcBranch.BOUNDARY_P_STAR, lam, JointDistribution(p_star))
