"""Selects the split-operator kernel at import time.

The compiled Cython extension is used when it is importable; otherwise the
NumPy implementation is used.  Setting ``THZORIENT_PURE_PYTHON=1`` forces
the fallback.
"""

import logging
import os

from . import _split_py

logger = logging.getLogger(__name__)

KERNELS = {"python": _split_py.split_propagate}

try:
    from . import _split as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    KERNELS["cython"] = _compiled.split_propagate

if _compiled is not None and not os.environ.get("THZORIENT_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"
    if _compiled is None:
        logger.debug("compiled kernel unavailable, using NumPy fallback")


def get_kernel(name=None):
    """Return the kernel called ``name`` (default: the import-time choice)."""
    name = name or BACKEND
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"kernel {name!r} not available; have {sorted(KERNELS)}") from None


def split_propagate(psi, kinetic, coupling, stage_dt, amps, backend=None):
    return get_kernel(backend)(psi, kinetic, coupling, stage_dt, amps)
