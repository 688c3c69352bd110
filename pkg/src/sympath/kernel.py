"""Kernel backend selection.

The compiled extension (`sympath._kernel`, built from Cython) is used
when available; otherwise the numpy fallback takes over.  Set
``SYMPATH_KERNEL=python`` or ``SYMPATH_KERNEL=compiled`` to force one.
"""

import os

from . import _kernel_py

_choice = os.environ.get("SYMPATH_KERNEL", "").strip().lower()

if _choice == "python":
    _impl = _kernel_py
elif _choice == "compiled":
    from . import _kernel as _impl  # hard failure if not built
else:
    try:
        from . import _kernel as _impl
    except ImportError:
        _impl = _kernel_py

BACKEND = _impl.BACKEND

charpoly_batch = _impl.charpoly_batch
polyroots_batch = _impl.polyroots_batch
polyresidual_batch = _kernel_py.polyresidual_batch  # cheap, numpy everywhere
sym_eigvals_batch = _impl.sym_eigvals_batch
expm_batch = _impl.expm_batch
