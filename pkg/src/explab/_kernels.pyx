# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: packed-word popcounts and per-codebook
pairwise minimum statistics. The numpy fallback in _kernels_py.py
implements the identical interface."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define EXPLAB_POPCOUNT64(x) __builtin_popcountll(x)
    #else
    static inline int EXPLAB_POPCOUNT64(unsigned long long v) {
        v = v - ((v >> 1) & 0x5555555555555555ULL);
        v = (v & 0x3333333333333333ULL) + ((v >> 2) & 0x3333333333333333ULL);
        v = (v + (v >> 4)) & 0x0F0F0F0F0F0F0F0FULL;
        return (int)((v * 0x0101010101010101ULL) >> 56);
    }
    #endif
    """
    int EXPLAB_POPCOUNT64(unsigned long long x) nogil


def popcount_words(const cnp.uint64_t[::1] words):
    """Total number of set bits across a 1-D uint64 array."""
    cdef Py_ssize_t i
    cdef long long total = 0
    with nogil:
        for i in range(words.shape[0]):
            total += EXPLAB_POPCOUNT64(words[i])
    return total


def hamming_packed(const cnp.uint64_t[::1] a, const cnp.uint64_t[::1] b):
    """Hamming distance between two equal-length packed bit rows."""
    cdef Py_ssize_t i
    cdef long long total = 0
    with nogil:
        for i in range(a.shape[0]):
            total += EXPLAB_POPCOUNT64(a[i] ^ b[i])
    return total


def pairwise_hammings(const cnp.uint64_t[:, ::1] packed):
    """Hamming distances of all unordered row pairs, (i<j) row-major."""
    cdef Py_ssize_t m = packed.shape[0]
    cdef Py_ssize_t w = packed.shape[1]
    cdef Py_ssize_t i, j, k, idx = 0
    cdef long long total
    out_np = np.empty(m * (m - 1) // 2, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_np
    with nogil:
        for i in range(m):
            for j in range(i + 1, m):
                total = 0
                for k in range(w):
                    total += EXPLAB_POPCOUNT64(packed[i, k] ^ packed[j, k])
                out[idx] = total
                idx += 1
    return out_np


def min_pairwise_hamming(const cnp.uint64_t[:, ::1] packed):
    """Minimum Hamming distance over unordered row pairs."""
    cdef Py_ssize_t m = packed.shape[0]
    cdef Py_ssize_t w = packed.shape[1]
    cdef Py_ssize_t i, j, k
    cdef long long total, best = -1
    with nogil:
        for i in range(m):
            for j in range(i + 1, m):
                total = 0
                for k in range(w):
                    total += EXPLAB_POPCOUNT64(packed[i, k] ^ packed[j, k])
                if best < 0 or total < best:
                    best = total
    return best


def pairwise_dsum(const cnp.uint8_t[::1] xi, const cnp.uint8_t[::1] xj,
                  const cnp.float64_t[:, ::1] d):
    """sum_k d[xi_k, xj_k] for general alphabets."""
    cdef Py_ssize_t k
    cdef double total = 0.0
    with nogil:
        for k in range(xi.shape[0]):
            total += d[xi[k], xj[k]]
    return total


def min_pairwise_dsum(const cnp.uint8_t[:, ::1] codes,
                      const cnp.float64_t[:, ::1] d):
    """Minimum over unordered codeword pairs of sum_k d[xi_k, xj_k]."""
    cdef Py_ssize_t m = codes.shape[0]
    cdef Py_ssize_t n = codes.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double total, best = -1.0
    cdef bint first = True
    with nogil:
        for i in range(m):
            for j in range(i + 1, m):
                total = 0.0
                for k in range(n):
                    total += d[codes[i, k], codes[j, k]]
                if first or total < best:
                    best = total
                    first = False
    return best
