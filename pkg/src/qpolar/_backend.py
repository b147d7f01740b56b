"""Kernel backend selection, done once at import.

The compiled module qpolar._kernels is preferred when importable; the
numpy module qpolar._kernels_py is the fallback.  Set QPOLAR_KERNELS to
"c" or "py" to force one side (forcing "c" without the built extension
raises at import).
"""

import os

_choice = os.environ.get("QPOLAR_KERNELS", "auto").strip().lower()

if _choice in ("", "auto"):
    try:
        from . import _kernels as _impl
        BACKEND = "c"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"
elif _choice in ("c", "ext", "compiled"):
    from . import _kernels as _impl
    BACKEND = "c"
elif _choice in ("py", "python", "numpy"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    raise RuntimeError(
        f"QPOLAR_KERNELS={_choice!r} not understood; use 'auto', 'c' or 'py'"
    )

entropy_nats = _impl.entropy_nats
capacity_nats = _impl.capacity_nats
split_tables = _impl.split_tables
min_shift_l1 = _impl.min_shift_l1
convolve_pairs = _impl.convolve_pairs
mixture_convolution_entropy_nats = _impl.mixture_convolution_entropy_nats


def kernel_backend() -> str:
    """Name of the active kernel backend, 'c' or 'python'."""
    return BACKEND
