"""Method-of-types utilities and the brute-force simplex oracle.

The grid minimizer is deliberately restricted to binary input alphabets:
a joint distribution then has three free parameters and an exhaustive
grid stays tractable. It serves as the independent check on the
KKT-based solver in :mod:`explab.exponents`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .channel import InputDistribution
from .errors import (
    EmptyFeasibleSet,
    EnumerationTooLarge,
    LengthMismatch,
    SupportViolation,
)

ENUM_GUARD = 10**7


@dataclass(frozen=True)
class JointDistribution:
    """Probability matrix over input pairs."""

    p: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.p, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise SupportViolation("joint distribution must be a square matrix")
        if np.any(p < 0):
            raise SupportViolation("joint distribution has a negative entry")
        if abs(p.sum() - 1.0) > 1e-12:
            raise SupportViolation(f"joint distribution sums to {p.sum():.17g}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def marginal_x(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def marginal_x2(self) -> np.ndarray:
        return self.p.sum(axis=0)


@dataclass(frozen=True)
class JointType:
    """Integer pair-count matrix of two length-n sequences."""

    counts: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        c = np.ascontiguousarray(self.counts, dtype=np.int64)
        if np.any(c < 0):
            raise SupportViolation("joint type has a negative count")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "n", int(c.sum()))

    def distribution(self) -> JointDistribution:
        return JointDistribution(self.counts / self.n)


def _kl_raw(p: np.ndarray, ref: np.ndarray) -> float:
    """KL divergence between flat arrays with the 0 ln 0 = 0 convention."""
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / ref[mask])))


def kl_divergence(
    p: JointDistribution, qx: InputDistribution, qx2: InputDistribution
) -> float:
    """D(P || Qx x Qx') in nats, with 0 ln 0 = 0."""
    ref = np.outer(qx.q, qx2.q)
    if np.any((p.p > 0) & (ref == 0)):
        raise SupportViolation("P puts mass outside supp(Qx x Qx')")
    return _kl_raw(p.p, ref)


def empirical_joint_type(xi, xj) -> JointType:
    """Pair counts of two equal-length symbol sequences."""
    xi = np.asarray(xi, dtype=np.int64)
    xj = np.asarray(xj, dtype=np.int64)
    if xi.shape != xj.shape or xi.ndim != 1:
        raise LengthMismatch(f"sequence shapes {xi.shape} vs {xj.shape}")
    k = int(max(xi.max(), xj.max())) + 1 if xi.size else 1
    flat = np.bincount(xi * k + xj, minlength=k * k)
    return JointType(flat.reshape(k, k))


def joint_type_count(n: int, alphabet: int) -> int:
    """Number of joint types: multisets of n over alphabet^2 cells."""
    cells = alphabet * alphabet
    return comb(n + cells - 1, cells - 1)


def joint_type_enumerate(n: int, alphabet: int) -> list[JointType]:
    """All nonnegative integer matrices over X x X summing to n, once each."""
    total = joint_type_count(n, alphabet)
    if total > ENUM_GUARD:
        raise EnumerationTooLarge(f"{total} joint types exceeds guard {ENUM_GUARD}")
    cells = alphabet * alphabet
    out: list[JointType] = []
    buf = np.zeros(cells, dtype=np.int64)

    def rec(cell: int, remaining: int):
        if cell == cells - 1:
            buf[cell] = remaining
            out.append(JointType(buf.reshape(alphabet, alphabet).copy()))
            return
        for v in range(remaining + 1):
            buf[cell] = v
            rec(cell + 1, remaining - v)

    rec(0, n)
    return out


def _binary_grid(resolution: int) -> np.ndarray:
    """All grid points of the 4-cell simplex at 1/resolution spacing, (N,4)."""
    m = resolution
    a, b, c = np.meshgrid(
        np.arange(m + 1), np.arange(m + 1), np.arange(m + 1), indexing="ij"
    )
    a = a.ravel()
    b = b.ravel()
    c = c.ravel()
    d = m - a - b - c
    keep = d >= 0
    pts = np.stack([a[keep], b[keep], c[keep], d[keep]], axis=1)
    return pts / float(m)


def _grid_kl(points: np.ndarray, ref_flat: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = points * np.log(points / ref_flat[None, :])
    t[points == 0] = 0.0
    return t.sum(axis=1)


def simplex_grid_minimize(
    objective,
    constraint_radius: float,
    q: InputDistribution,
    step: float,
) -> tuple[float, JointDistribution]:
    """Brute-force minimum of a vectorized objective over the joint simplex.

    `objective` receives an (N, 2, 2) stack of joint distributions and must
    return an (N,) array. Grid points violating
    D(P || Q x Q) <= constraint_radius are excluded; one refinement pass at
    step/10 runs around the incumbent. Ties break toward the
    lexicographically smallest grid index, so partitioned evaluation would
    reduce deterministically.
    """
    if q.size != 2:
        raise SupportViolation("grid oracle is restricted to binary alphabets")
    if not 1e-3 <= step <= 1e-1:
        raise EmptyFeasibleSet(f"step {step} outside [1e-3, 1e-1]")
    ref_flat = np.outer(q.q, q.q).ravel()
    m = int(round(1.0 / step))

    def scan(points: np.ndarray) -> tuple[float, np.ndarray] | None:
        div = _grid_kl(points, ref_flat)
        feas = div <= constraint_radius
        if not np.any(feas):
            return None
        pts = points[feas]
        vals = np.asarray(objective(pts.reshape(-1, 2, 2)), dtype=np.float64)
        k = int(np.argmin(vals))  # argmin returns the first (lowest index) tie
        return float(vals[k]), pts[k]

    coarse = scan(_binary_grid(m))
    if coarse is None:
        raise EmptyFeasibleSet(
            f"no grid point at step {step} satisfies D <= {constraint_radius}"
        )
    best_val, best_p = coarse

    # refinement: +-step cube around the incumbent at step/10 spacing
    fine = step / 10.0
    offsets = np.arange(-10, 11) * fine
    da, db, dc = np.meshgrid(offsets, offsets, offsets, indexing="ij")
    local = np.stack(
        [
            best_p[0] + da.ravel(),
            best_p[1] + db.ravel(),
            best_p[2] + dc.ravel(),
        ],
        axis=1,
    )
    last = 1.0 - local.sum(axis=1)
    ok = (local >= 0).all(axis=1) & (last >= 0)
    local = np.concatenate([local[ok], last[ok, None]], axis=1)
    refined = scan(local)
    if refined is not None and refined[0] < best_val:
        best_val, best_p = refined
    return best_val, JointDistribution(best_p.reshape(2, 2))
