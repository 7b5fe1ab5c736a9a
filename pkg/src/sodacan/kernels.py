"""Select the compiled step kernel when it is built, else the numpy fallback.

Set SODACAN_KERNEL=python to force the fallback.
"""

import os

from . import _fallback

if os.environ.get("SODACAN_KERNEL", "").lower() == "python":
    rates = _fallback.rates
    BACKEND = "python"
else:
    try:
        from ._kernels import rates
        BACKEND = "cython"
    except ImportError:
        rates = _fallback.rates
        BACKEND = "python"
