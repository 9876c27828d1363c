"""Pure-numpy fallback for the compiled kernels in _kernels.pyx.

Same interface, selected at import time by :mod:`explab.kernels` when the
compiled extension is unavailable (or forced off via EXPLAB_PURE_PY=1).
"""
from __future__ import annotations

import numpy as np

if hasattr(np, "bitwise_count"):
    def _popcount(words: np.ndarray) -> np.ndarray:
        return np.bitwise_count(words)
else:  # numpy < 2.0: byte lookup table
    _LUT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)

    def _popcount(words: np.ndarray) -> np.ndarray:
        by = words.view(np.uint8).reshape(words.shape + (8,))
        return _LUT[by].sum(axis=-1, dtype=np.int64)


def popcount_words(words: np.ndarray) -> int:
    return int(_popcount(words).sum())


def hamming_packed(a: np.ndarray, b: np.ndarray) -> int:
    return int(_popcount(a ^ b).sum())


def pairwise_hammings(packed: np.ndarray) -> np.ndarray:
    m = packed.shape[0]
    iu, ju = np.triu_indices(m, k=1)
    x = packed[iu] ^ packed[ju]
    return _popcount(x).sum(axis=1).astype(np.int64)


def min_pairwise_hamming(packed: np.ndarray) -> int:
    return int(pairwise_hammings(packed).min())


def pairwise_dsum(xi: np.ndarray, xj: np.ndarray, d: np.ndarray) -> float:
    return float(d[xi, xj].sum())


def min_pairwise_dsum(codes: np.ndarray, d: np.ndarray) -> float:
    m = codes.shape[0]
    iu, ju = np.triu_indices(m, k=1)
    return float(d[codes[iu], codes[ju]].sum(axis=1).min())
