"""Backend selection: compiled Cython core when built, numpy fallback otherwise."""

from __future__ import annotations

from . import _core_py

try:  # pragma: no cover - depends on the build environment
    from . import _core

    _impl = _core
    BACKEND = "compiled"
except ImportError:  # pragma: no cover
    _impl = _core_py
    BACKEND = "python"

KERNEL_POWER = _core_py.KERNEL_POWER
KERNEL_BUMP = _core_py.KERNEL_BUMP

# The tree scans are latency-bound and benefit from the compiled core; the
# pair-kernel sums are contraction-bound and the numpy/BLAS path measures
# faster (see benchmarks/bench_backends.py), so they always route there.
word_scan = _impl.word_scan
pair_kernel_sum = _core_py.pair_kernel_sum


def available_backends():
    """Names of usable backends; 'compiled' only when the extension built."""
    out = {"python": _core_py}
    if BACKEND == "compiled":
        out["compiled"] = _impl
    return out
