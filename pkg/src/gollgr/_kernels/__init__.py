"""Kernel backend selection.

The compiled extension ``_ccore`` is preferred; the numpy implementation
``_pycore`` is a drop-in replacement used when the extension is missing or
when ``GOLLGR_PURE_PYTHON=1`` is set in the environment.
"""

import os

if os.environ.get("GOLLGR_PURE_PYTHON", "") not in ("", "0"):
    from gollgr._kernels import _pycore as core
else:
    try:
        from gollgr._kernels import _ccore as core  # type: ignore[attr-defined]
    except ImportError:
        from gollgr._kernels import _pycore as core

backend_name = core.backend_name
