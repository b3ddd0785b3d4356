"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy implementation in ``_pykernels`` takes over.  Setting ``NLMSR_BACKEND``
to ``python`` forces the fallback at import time.
"""

import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _pykernels}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

_active = _compiled if _compiled is not None else _pykernels
if os.environ.get("NLMSR_BACKEND"):
    _active = _BACKENDS.get(os.environ["NLMSR_BACKEND"], _active)
log.debug("nlmsr kernel backend: %s", _active.NAME)


def available():
    return sorted(_BACKENDS)


def get_backend():
    return _active.NAME


def set_backend(name):
    """Switch the active kernel backend (``"cython"`` or ``"python"``)."""
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available()}") from None


def kernels():
    return _active
