"""Kernel selection: compiled round loop when built, pure Python otherwise.

Both implementations consume the per-shot splitmix64 stream in the same
order and produce bit-identical records; the benchmark under benchmarks/
asserts this while comparing throughput.
"""

from __future__ import annotations

from .memory import simulate_rounds_py

try:
    from . import _kernel as _compiled
except ImportError:
    _compiled = None

KERNEL_BACKEND = "cython" if _compiled is not None else "python"


def simulate_rounds_impl(exp, seed):
    if _compiled is not None:
        return _compiled.simulate_rounds_cy(exp, seed)
    return simulate_rounds_py(exp, seed)
