"""Discrete memoryless channels and their single-letter quantities.

All rates and distances are in nats. The CLI converts to bits on request;
nothing in the numerical core ever touches log2.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlphabetTooSmall,
    DegenerateChannel,
    InfiniteDistance,
    NegativeEntry,
    NonStochasticRow,
)

ROW_SUM_TOL = 1e-9
DIST_SUM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Channel:
    """Row-stochastic transition matrix W(y|x). Immutable after construction."""

    w: np.ndarray
    input_size: int = field(init=False)
    output_size: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen(self.w))
        object.__setattr__(self, "input_size", self.w.shape[0])
        object.__setattr__(self, "output_size", self.w.shape[1])


@dataclass(frozen=True)
class InputDistribution:
    """Probability vector over the input alphabet."""

    q: np.ndarray

    def __post_init__(self):
        q = np.ascontiguousarray(self.q, dtype=np.float64)
        if q.ndim != 1:
            raise NegativeEntry("input distribution must be a vector")
        if np.any(q < 0):
            raise NegativeEntry("input distribution has a negative entry")
        if abs(q.sum() - 1.0) > DIST_SUM_TOL:
            raise NonStochasticRow(
                f"input distribution sums to {q.sum():.17g}, not 1"
            )
        object.__setattr__(self, "q", _frozen(q))

    @property
    def size(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class BhattacharyyaMatrix:
    """Symmetric matrix of pairwise Bhattacharyya distances, in nats."""

    d: np.ndarray
    d_max: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "d", _frozen(self.d))
        object.__setattr__(self, "d_max", float(self.d.max()))


def validate_channel(w) -> Channel:
    """Validate a raw transition matrix and wrap it as a Channel.

    Rows must sum to 1 within 1e-9; no silent renormalization is applied,
    so callers must supply clean data.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2:
        raise AlphabetTooSmall("transition matrix must be 2-D")
    nx, ny = w.shape
    if nx < 2 or ny < 2:
        raise AlphabetTooSmall(f"need |X| >= 2 and |Y| >= 2, got {nx}x{ny}")
    if np.any(w < 0):
        bad = np.argwhere(w < 0)[0]
        raise NegativeEntry(f"W[{bad[0]},{bad[1]}] = {w[bad[0], bad[1]]} < 0")
    sums = w.sum(axis=1)
    dev = np.abs(sums - 1.0)
    if np.any(dev > ROW_SUM_TOL):
        r = int(np.argmax(dev))
        raise NonStochasticRow(f"row {r} sums to {sums[r]:.17g}")
    return Channel(w)


def bsc(p: float) -> Channel:
    """Binary symmetric channel with crossover probability 0 < p < 0.5."""
    if not 0.0 < p < 0.5:
        raise DegenerateChannel(f"crossover probability {p} outside (0, 0.5)")
    return Channel(np.array([[1.0 - p, p], [p, 1.0 - p]]))


def uniform_input(k: int) -> InputDistribution:
    """Uniform distribution over a k-symbol alphabet."""
    return InputDistribution(np.full(k, 1.0 / k))


def bhattacharyya_matrix(ch: Channel) -> BhattacharyyaMatrix:
    """Pairwise Bhattacharyya distances d(x,x') = -ln sum_y sqrt(W(y|x)W(y|x')).

    Channels where some symbol pair has disjoint output support are
    rejected: they would have infinite distance (positive zero-error
    capacity) and fall outside the admissible class.
    """
    s = np.sqrt(ch.w)
    overlap = s @ s.T  # Bhattacharyya coefficients, 1 on the diagonal
    off = ~np.eye(ch.input_size, dtype=bool)
    if np.any(overlap[off] <= 0.0):
        x, x2 = np.argwhere((overlap <= 0.0) & off)[0]
        raise InfiniteDistance(f"symbols {x} and {x2} have disjoint supports")
    d = -np.log(overlap)
    np.fill_diagonal(d, 0.0)
    d = 0.5 * (d + d.T)  # exact symmetry
    d[d < 0] = 0.0       # clip tiny negative rounding on near-identical rows
    if float(d.max()) <= 0.0:
        raise DegenerateChannel("all input symbols are indistinguishable")
    return BhattacharyyaMatrix(d)


def mutual_information(ch: Channel, q: InputDistribution) -> float:
    """I(Q,W) in nats; terms with W(y|x) = 0 contribute zero."""
    w = ch.w
    py = q.q @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(w > 0, w / py[None, :], 1.0)
        terms = np.where(w > 0, w * np.log(ratio), 0.0)
    return float(q.q @ terms.sum(axis=1))


def cutoff_rate(ch: Channel, q: InputDistribution) -> float:
    """R0(Q) = -ln sum_y (sum_x Q(x) sqrt(W(y|x)))^2, in nats."""
    inner = q.q @ np.sqrt(ch.w)
    return float(-np.log(np.sum(inner**2)))


def load_channel_file(path) -> tuple[Channel, InputDistribution | None]:
    """Load {"W": [[...], ...], "Q": [...]} from a JSON text file.

    The "Q" key is optional; None is returned in its place when absent.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    ch = validate_channel(doc["W"])
    if "Q" not in doc:
        return ch, None
    q = InputDistribution(np.asarray(doc["Q"], dtype=np.float64))
    if q.size != ch.input_size:
        raise AlphabetTooSmall(
            f"Q has {q.size} entries but W has {ch.input_size} rows"
        )
    return ch, q
