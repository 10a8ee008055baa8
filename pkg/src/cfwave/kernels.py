"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise (or when
``CFWAVE_PURE_PYTHON=1``) the numpy implementation takes over.  Both expose
``advance`` and ``rk4_profile`` with identical signatures.
"""
from __future__ import annotations

import os

from . import _pykernels
from ._pykernels import CLASSIC_AC, CLASSIC_CH, MODIFIED_AC, MODIFIED_CH  # noqa: F401

_compiled = None
if os.environ.get("CFWAVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

_backend = _compiled if _compiled is not None else _pykernels
BACKEND = "compiled" if _compiled is not None else "python"


def backends() -> dict:
    out = {"python": _pykernels}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


def advance(v, model, mu, dx, dt, nsteps, fp, delta=0.0):
    return _backend.advance(v, model, mu, dx, dt, nsteps, fp, delta)


def rk4_profile(v0, h, n, cof, fp, vp, vm, m1, m2):
    return _backend.rk4_profile(v0, h, n, cof, fp, vp, vm, m1, m2)
