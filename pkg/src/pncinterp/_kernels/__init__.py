"""Counting kernels with a compiled fast path and a pure-Python fallback.

The compiled Cython extension is preferred when importable; set the
``PNCINTERP_PURE_PYTHON`` environment variable to force the fallback.
``KERNEL_BACKEND`` records which one is active.
"""

import os

if os.environ.get("PNCINTERP_PURE_PYTHON"):
    from ._speedups_py import kendall_pair_counts, ngram_overlap_counts

    KERNEL_BACKEND = "python"
else:
    try:
        from ._speedups import kendall_pair_counts, ngram_overlap_counts

        KERNEL_BACKEND = "compiled"
    except ImportError:
        from ._speedups_py import kendall_pair_counts, ngram_overlap_counts

        KERNEL_BACKEND = "python"

__all__ = ["ngram_overlap_counts", "kendall_pair_counts", "KERNEL_BACKEND"]
