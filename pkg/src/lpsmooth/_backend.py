"""Pick the window-scan kernel at import time.

The compiled extension is preferred; set ``LPSMOOTH_PURE_PYTHON=1`` to force
the NumPy implementation.
"""

import os

from . import _scan_py

BACKEND = "python"
window_residuals = _scan_py.window_residuals

if not os.environ.get("LPSMOOTH_PURE_PYTHON"):
    try:
        from . import _scan
    except ImportError:
        pass
    else:
        window_residuals = _scan.window_residuals
        BACKEND = "compiled"

window_gram_factor = _scan_py.window_gram_factor
