"""Hot-kernel backend selection.

Imports the compiled Cython core when it has been built, otherwise falls
back to the numpy implementations. Set ``DOMGEN_PURE_PYTHON=1`` to force the
fallback (used by the benchmark to compare both paths).
"""

import os

from . import fallback

if os.environ.get("DOMGEN_PURE_PYTHON"):
    _impl = fallback
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = fallback

BACKEND = _impl.BACKEND
conv2d_bank = _impl.conv2d_bank
channel_stats = _impl.channel_stats

__all__ = ["BACKEND", "conv2d_bank", "channel_stats", "fallback"]
