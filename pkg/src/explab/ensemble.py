"""Pairwise-independent random-code ensembles and their statistics.

The concentration experiment tracks the per-trial minimum pairwise
Bhattacharyya exponent V/n, the almost-sure proxy for the error exponent
of a code with a sub-exponential number of codewords. Exact
maximum-likelihood error probabilities (with ties decided against the
transmitter), the union bound and the De Caen lower bound are evaluated
exhaustively on small instances only.

Reproducibility contract: the random stream of trial t is derived from
(seed, t) alone, so results are bit-identical for any worker count.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import ceil, sqrt

import numpy as np

from . import kernels
from .channel import BhattacharyyaMatrix, Channel, InputDistribution
from .errors import InstanceTooLarge, LengthMismatch, TooFewSamples
from .typecalc import JointType, empirical_joint_type  # noqa: F401  (re-export)

EXHAUSTIVE_GUARD = 2 * 10**7


@dataclass(frozen=True)
class EnsembleConfig:
    """Configuration of one ensemble experiment."""

    kind: str  # "iid" | "cc"
    q: InputDistribution
    n: int
    m: int
    trials: int
    seed: int

    def __post_init__(self):
        if self.kind not in ("iid", "cc"):
            raise ValueError(f"kind must be 'iid' or 'cc', got {self.kind!r}")
        if self.n < 1:
            raise ValueError("blocklength n must be >= 1")
        if self.m < 2:
            raise ValueError("need at least M = 2 codewords")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Codebook:
    """M codewords of length n over a small integer alphabet."""

    codewords: np.ndarray  # (M, n) uint8

    def __post_init__(self):
        cw = np.ascontiguousarray(self.codewords, dtype=np.uint8)
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    @property
    def m(self) -> int:
        return self.codewords.shape[0]

    @property
    def n(self) -> int:
        return self.codewords.shape[1]

    def packed(self) -> np.ndarray:
        """Bit-packed rows as uint64 words (binary alphabets only)."""
        return _pack_bits(self.codewords)


@dataclass(frozen=True)
class SimulationRun:
    """Per-trial exponent samples plus summary statistics."""

    config: EnsembleConfig
    samples: np.ndarray
    bin_edges: np.ndarray
    bin_counts: np.ndarray
    mean: float = field(init=False)
    variance: float = field(init=False)

    def __post_init__(self):
        s = np.ascontiguousarray(self.samples, dtype=np.float64)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "mean", float(s.mean()))
        object.__setattr__(self, "variance", float(s.var()))

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def samples_digest(self) -> str:
        return hashlib.sha256(self.samples.tobytes()).hexdigest()

    def to_document(self) -> dict:
        """Structured run record: config echo, samples digest, histogram."""
        return {
            "config": {
                "kind": self.config.kind,
                "q": self.config.q.q.tolist(),
                "n": self.config.n,
                "m": self.config.m,
                "trials": self.config.trials,
                "seed": self.config.seed,
            },
            "mean": self.mean,
            "variance": self.variance,
            "samples_sha256": self.samples_digest(),
            "histogram": {
                "bin_edges": self.bin_edges.tolist(),
                "counts": self.bin_counts.tolist(),
            },
        }


# --- sampling -----------------------------------------------------------------

def _pack_bits(bits: np.ndarray) -> np.ndarray:
    by = np.packbits(bits, axis=-1)
    pad = (-by.shape[-1]) % 8
    if pad:
        by = np.concatenate(
            [by, np.zeros(by.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1
        )
    return by.view(np.uint64)


def composition_counts(q: InputDistribution, n: int) -> np.ndarray:
    """Largest-remainder rounding of n*Q; satisfies max|c/n - Q| <= 1/n."""
    scaled = n * q.q
    base = np.floor(scaled).astype(np.int64)
    short = n - int(base.sum())
    if short:
        order = np.argsort(-(scaled - base), kind="stable")
        base[order[:short]] += 1
    return base


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, a pure function of (seed, trial)."""
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def sample_codebook(config: EnsembleConfig, trial: int) -> Codebook:
    """Draw the codebook of the given trial index."""
    rng = trial_rng(config.seed, trial)
    q = config.q.q
    k = q.shape[0]
    m, n = config.m, config.n
    if config.kind == "iid":
        if k == 2:
            cw = (rng.random((m, n)) < q[1]).view(np.uint8)
        else:
            cw = rng.choice(k, size=(m, n), p=q).astype(np.uint8)
        return Codebook(cw)
    counts = composition_counts(config.q, n)
    if k == 2:
        # positions of the k1 smallest uniforms form a uniform k1-subset
        k1 = int(counts[1])
        cw = np.zeros((m, n), dtype=np.uint8)
        if k1:
            u = rng.random((m, n))
            idx = np.argpartition(u, k1 - 1, axis=1)[:, :k1]
            np.put_along_axis(cw, idx, 1, axis=1)
        return Codebook(cw)
    template = np.repeat(np.arange(k, dtype=np.uint8), counts)
    return Codebook(rng.permuted(np.tile(template, (m, 1)), axis=1))


# --- pairwise statistics --------------------------------------------------------

def pairwise_exponent(xi, xj, d: BhattacharyyaMatrix) -> float:
    """(1/n) sum_k d(xi_k, xj_k), the per-symbol Bhattacharyya exponent."""
    xi = np.ascontiguousarray(xi, dtype=np.uint8)
    xj = np.ascontiguousarray(xj, dtype=np.uint8)
    if xi.shape != xj.shape or xi.ndim != 1:
        raise LengthMismatch(f"codeword shapes {xi.shape} vs {xj.shape}")
    n = xi.shape[0]
    if d.d.shape == (2, 2):
        hd = kernels.hamming_packed(_pack_bits(xi), _pack_bits(xj))
        return float(d.d[0, 1]) * hd / n
    return kernels.pairwise_dsum(xi, xj, d.d) / n


def min_pairwise_statistic(cb: Codebook, d: BhattacharyyaMatrix) -> float:
    """V/n: minimum pairwise exponent over unordered codeword pairs."""
    if cb.m < 2:
        raise LengthMismatch("need at least two codewords")
    if d.d.shape == (2, 2):
        hd = kernels.min_pairwise_hamming(cb.packed())
        return float(d.d[0, 1]) * hd / cb.n
    return kernels.min_pairwise_dsum(cb.codewords, d.d) / cb.n


# --- exhaustive evaluation of tiny instances --------------------------------------

def _check_guard(ch: Channel, n: int) -> int:
    total = ch.output_size**n
    if total > EXHAUSTIVE_GUARD:
        raise InstanceTooLarge(
            f"|Y|^n = {total} exceeds exhaustive guard {EXHAUSTIVE_GUARD}"
        )
    return total


def _output_batches(ny: int, n: int, total: int, batch: int = 1 << 15):
    radix = ny ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, batch):
        idx = np.arange(start, min(start + batch, total), dtype=np.int64)
        yield (idx[:, None] // radix[None, :]) % ny


def _loglik_rows(cb: Codebook, logw: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """(M, B) log-likelihood of each output row under each codeword.

    Channel cells sharing the same log-probability are counted as a group
    and multiplied once, so codewords with mathematically tied likelihoods
    (same value multiset) produce bitwise-equal floats and the >= tie rule
    of the pairwise error event is applied exactly.
    """
    ny = logw.shape[1]
    uvals, inv = np.unique(logw.ravel(), return_inverse=True)
    m = cb.m
    ll = np.zeros((m, ys.shape[0]))
    for i, cw in enumerate(cb.codewords):
        groups = inv[cw[None, :].astype(np.int64) * ny + ys]
        for g, v in enumerate(uvals):
            cnt = (groups == g).sum(axis=1)
            if v == -np.inf:
                ll[i][cnt > 0] = -np.inf
            else:
                ll[i] += v * cnt
    return ll


def exact_error_probability(cb: Codebook, ch: Channel) -> float:
    """Exhaustive ML error probability; ties count as errors."""
    total = _check_guard(ch, cb.n)
    with np.errstate(divide="ignore"):
        logw = np.log(ch.w)
    m = cb.m
    err_mass = np.zeros(m)
    for ys in _output_batches(ch.output_size, cb.n, total):
        ll = _loglik_rows(cb, logw, ys)
        for i in range(m):
            rivals = np.max(np.delete(ll, i, axis=0), axis=0)
            err = rivals >= ll[i]
            err_mass[i] += float(np.exp(ll[i][err]).sum())
    return float(err_mass.mean())


def _is_bsc(ch: Channel) -> bool:
    w = ch.w
    return (
        w.shape == (2, 2) and w[0, 0] == w[1, 1] and w[0, 1] == w[1, 0]
    )


def _bsc_pairwise_error(dist: int, p: float) -> float:
    """P[x_i -> x_j] at Hamming distance d on a BSC, tie mass included."""
    from scipy.stats import binom

    if dist == 0:
        return 1.0
    thresh = (dist + 1) // 2  # errors need >= d/2 flips; even d ties count
    return float(binom.sf(thresh - 1, dist, p))


def union_bound_pe(cb: Codebook, ch: Channel) -> float:
    """(1/M) sum over ordered pairs of the pairwise error probability.

    BSC channels use the exact binomial tail over differing positions
    (any blocklength); other channels are evaluated exhaustively under
    the output-space guard.
    """
    m = cb.m
    if _is_bsc(ch):
        p = float(ch.w[0, 1])
        dists = kernels.pairwise_hammings(cb.packed())
        return 2.0 * sum(_bsc_pairwise_error(int(h), p) for h in dists) / m
    total = _check_guard(ch, cb.n)
    with np.errstate(divide="ignore"):
        logw = np.log(ch.w)
    pair = np.zeros((m, m))
    for ys in _output_batches(ch.output_size, cb.n, total):
        ll = _loglik_rows(cb, logw, ys)
        wmass = np.exp(ll)
        for i in range(m):
            pair[i] += (ll >= ll[i][None, :]) @ wmass[i]
    np.fill_diagonal(pair, 0.0)
    return float(pair.sum() / m)


def de_caen_lower_bound(cb: Codebook, ch: Channel) -> float:
    """De Caen lower bound on the ML error probability (exhaustive).

    For each transmitted index i the union over rivals j of the pairwise
    events is bounded below by sum_j P(A_j)^2 / sum_k P(A_j n A_k), with
    0/0 read as 0.
    """
    total = _check_guard(ch, cb.n)
    with np.errstate(divide="ignore"):
        logw = np.log(ch.w)
    m = cb.m
    bound = 0.0
    pa = np.zeros((m, m))        # pa[i, j] = P(A_j) under transmit i
    paa = np.zeros((m, m, m))    # paa[i, j, k] = P(A_j n A_k)
    for ys in _output_batches(ch.output_size, cb.n, total):
        ll = _loglik_rows(cb, logw, ys)
        wmass = np.exp(ll)
        for i in range(m):
            ind = (ll >= ll[i][None, :]).astype(np.float64)
            pa[i] += ind @ wmass[i]
            paa[i] += (ind * wmass[i][None, :]) @ ind.T
    for i in range(m):
        rivals = [j for j in range(m) if j != i]
        for j in rivals:
            denom = paa[i, j, rivals].sum()
            if denom > 0.0:
                bound += pa[i, j] ** 2 / denom
    return bound / m


# --- concentration experiment ------------------------------------------------------

def _trial_chunk(
    config: EnsembleConfig, d: BhattacharyyaMatrix, start: int, stop: int
) -> np.ndarray:
    out = np.empty(stop - start)
    for t in range(start, stop):
        out[t - start] = min_pairwise_statistic(sample_codebook(config, t), d)
    return out


def run_concentration_experiment(
    config: EnsembleConfig,
    d: BhattacharyyaMatrix,
    bins: int = 60,
    threads: int = 1,
) -> SimulationRun:
    """Per-trial V/n samples with a fixed-width histogram.

    Output is a deterministic function of (config, bins); the thread
    count only splits contiguous trial ranges across workers.
    """
    t = config.trials
    if threads <= 1 or t < 64:
        samples = _trial_chunk(config, d, 0, t)
    else:
        chunk = min(8192, ceil(t / (threads * 4)))
        ranges = [(s, min(s + chunk, t)) for s in range(0, t, chunk)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_trial_chunk, config, d, a, b) for a, b in ranges]
            samples = np.concatenate([f.result() for f in futures])
    counts, edges = np.histogram(samples, bins=bins)
    return SimulationRun(config, samples, edges, counts)


def tail_probability_estimate(
    run: SimulationRun, e_ref: float, eps: float
) -> tuple[float, float, float]:
    """Empirical lower/upper tail frequencies around e_ref with a Wilson radius.

    Returns (P[sample < e_ref - eps], P[sample > e_ref + eps], radius) where
    radius is the larger of the two Wilson 95% half-widths.
    """
    s = run.samples
    if s.size < 1000:
        raise TooFewSamples(f"{s.size} samples, need >= 1000")
    n = s.size
    lo = int(np.count_nonzero(s < e_ref - eps))
    hi = int(np.count_nonzero(s > e_ref + eps))

    def wilson_radius(k: int) -> float:
        z = 1.959963984540054
        phat = k / n
        return (
            z
            * sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
            / (1 + z * z / n)
        )

    return lo / n, hi / n, max(wilson_radius(lo), wilson_radius(hi))


@dataclass(frozen=True)
class MomentRatio:
    """Second-moment diagnostic E[Pe^2]/E[Pe]^2 with standard errors."""

    ratio: float
    mean_pe_sq: float
    mean_pe: float
    se_mean_pe_sq: float
    se_mean_pe: float
    trials: int


def second_moment_ratio(config: EnsembleConfig, ch: Channel) -> MomentRatio:
    """Monte Carlo estimate of E[Pe^2]/E[Pe]^2 using exact per-code Pe."""
    _check_guard(ch, config.n)
    pes = np.empty(config.trials)
    for t in range(config.trials):
        pes[t] = exact_error_probability(sample_codebook(config, t), ch)
    n = config.trials
    mean = float(pes.mean())
    mean_sq = float((pes**2).mean())
    se_mean = float(pes.std(ddof=1) / sqrt(n)) if n > 1 else 0.0
    se_mean_sq = float((pes**2).std(ddof=1) / sqrt(n)) if n > 1 else 0.0
    return MomentRatio(mean_sq / mean**2, mean_sq, mean, se_mean_sq, se_mean, n)
