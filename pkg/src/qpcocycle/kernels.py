"""Backend selection for the product kernels.

The compiled extension is used when it imports; ``QPCOCYCLE_PURE=1`` forces
the numpy fallback.
"""
import os

from . import _fallback

fallback = _fallback

if os.environ.get("QPCOCYCLE_PURE", "") not in ("", "0"):
    impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        impl = _fallback
        BACKEND = "python"

rothyp_product = impl.rothyp_product
rothyp_lognorms = impl.rothyp_lognorms
rothyp_partial_lognorms = impl.rothyp_partial_lognorms
general_product = impl.general_product
general_lognorms = impl.general_lognorms
