"""Kernel backend selection.

The compiled Cython extension is used when it was built; otherwise the
numpy implementations take over. Set EMBEDHALLUC_PURE_PYTHON=1 to force
the numpy backend regardless.
"""

import os

from embedhalluc import _pykernels

if os.environ.get("EMBEDHALLUC_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from embedhalluc import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND

leaky_relu = _impl.leaky_relu
adam_update = _impl.adam_update
scatter_add_rows = _impl.scatter_add_rows
softmax_rows = _impl.softmax_rows
logsumexp_rows = _impl.logsumexp_rows
