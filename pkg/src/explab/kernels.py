"""Kernel backend selection: compiled extension when importable, numpy
fallback otherwise. Set EXPLAB_PURE_PY=1 to force the fallback (used by
the benchmark to compare both backends)."""
from __future__ import annotations

import os

if os.environ.get("EXPLAB_PURE_PY", "") == "1":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

HAVE_COMPILED = BACKEND == "compiled"

popcount_words = _impl.popcount_words
hamming_packed = _impl.hamming_packed
pairwise_hammings = _impl.pairwise_hammings
min_pairwise_hamming = _impl.min_pairwise_hamming
pairwise_dsum = _impl.pairwise_dsum
min_pairwise_dsum = _impl.min_pairwise_dsum
