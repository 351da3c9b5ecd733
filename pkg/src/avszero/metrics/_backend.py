"""Kernel backend selection: compiled extension if available, numpy fallback otherwise.

``AVSZ_KERNELS=py`` forces the fallback; ``AVSZ_KERNELS=cython`` requires the
extension and raises if it is missing.
"""

import os

_choice = os.environ.get("AVSZ_KERNELS", "auto").lower()

if _choice in ("py", "python"):
    from . import _kernels_py as kernels
elif _choice == "cython":
    from . import _kernels as kernels  # noqa: F401  (ImportError is intentional here)
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

KERNEL_BACKEND = kernels.KERNEL_BACKEND
