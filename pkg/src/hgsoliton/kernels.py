"""Backend selection for the numeric hot loops.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
numpy reference ``_pykernels`` takes over. Setting ``HGSOLITON_PURE_PYTHON=1``
forces the fallback.
"""

from __future__ import annotations

import contextlib
import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

GL_ORDER = 15
_x, _w = np.polynomial.legendre.leggauss(GL_ORDER)
# rule on [0, 1]
GL_NODES = np.ascontiguousarray(0.5 * (_x + 1.0))
GL_WEIGHTS = np.ascontiguousarray(0.5 * _w)

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["compiled"] = _ckernels

if os.environ.get("HGSOLITON_PURE_PYTHON") or _ckernels is None:
    _active = "python"
else:
    _active = "compiled"


def backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    _active = name


@contextlib.contextmanager
def use_backend(name: str):
    prev = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def panels_exp(coef, s0, s1, t0, h, c, a, scale, shift):
    return BACKENDS[_active].panels_exp(
        coef, s0, s1, t0, h, c, a, float(scale), float(shift), GL_NODES, GL_WEIGHTS
    )


def lattice_exp_sums(x, y, c, a):
    return BACKENDS[_active].lattice_exp_sums(x, y, c, a)
