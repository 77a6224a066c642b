"""Kernel selection: compiled when available, pure Python otherwise.

Set ``ARTIFACT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ARTIFACT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

mul_terms = _impl.mul_terms
upow = _impl.upow
shift_accumulate = _impl.shift_accumulate
degree = _impl.degree
first_crossing = _impl.first_crossing


def backends():
    """Available kernel modules keyed by name (used by the benchmark)."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
