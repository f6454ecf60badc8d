"""Kernel backend selection.

The compiled extension (``numprobe._ckernels``) is used when it imported
cleanly; otherwise the pure-numpy twin takes over.  Set NUMPROBE_BACKEND to
``python`` or ``compiled`` to force a choice (``compiled`` raises if the
extension is missing).
"""

import os

from . import _kernels_np

_forced = os.environ.get("NUMPROBE_BACKEND", "").lower()

if _forced == "python":
    _impl = _kernels_np
    BACKEND = "python"
else:
    try:
        from numprobe import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _forced == "compiled":
            raise
        _impl = _kernels_np
        BACKEND = "python"

lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward
conv_relu_maxpool_forward = _impl.conv_relu_maxpool_forward
conv_relu_maxpool_backward = _impl.conv_relu_maxpool_backward
