"""Hot loops, compiled when the extension is available.

Set ``PEPS_PARENT_PURE_PYTHON=1`` to force the numpy versions.  ``BACKEND``
names the implementation in use.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_compiled = None
if not os.environ.get("PEPS_PARENT_PURE_PYTHON"):
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _pykernels


def local_offsets(sites, n, d):
    """Index offsets of all local configurations on ``sites`` and the matching bases."""
    strides = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    k = len(sites)
    local = np.indices((d,) * k).reshape(k, -1).T if k else np.zeros((1, 0), dtype=np.int64)
    offsets = (local * strides[list(sites)]).sum(axis=1).astype(np.int64)
    rest = [s for s in range(n) if s not in set(sites)]
    rl = np.indices((d,) * len(rest)).reshape(len(rest), -1).T if rest else np.zeros((1, 0), dtype=np.int64)
    bases = (rl * strides[rest]).sum(axis=1).astype(np.int64)
    return np.ascontiguousarray(bases), np.ascontiguousarray(offsets)


def apply_local(psi, op, bases, offsets, out, backend=None):
    impl = _pick(backend)
    impl.apply_local(np.ascontiguousarray(psi, dtype=complex), np.ascontiguousarray(op, dtype=complex),
                     bases, offsets, out)
    return out


def spin_flip_rates(n, nbr_ptr, nbr_idx, beta, backend=None):
    return _pick(backend).spin_flip_rates(int(n), np.ascontiguousarray(nbr_ptr, dtype=np.int64),
                                          np.ascontiguousarray(nbr_idx, dtype=np.int64), float(beta))


def config_energies(n, d, eu, ev, tables, backend=None):
    return _pick(backend).config_energies(int(n), int(d), np.ascontiguousarray(eu, dtype=np.int64),
                                          np.ascontiguousarray(ev, dtype=np.int64),
                                          np.ascontiguousarray(tables, dtype=float))


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _pykernels
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}")


def compiled_available() -> bool:
    return _compiled is not None
