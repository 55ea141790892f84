"""Kernel dispatch: compiled core when available, numpy fallback otherwise.

Set ``EMDHARD_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names
the active implementation.  Object (big integer) arrays always go through
the fallback since the compiled core is limited to int64 / long double.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_c = None
if os.environ.get("EMDHARD_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _ckernels as _c
    except ImportError:  # not compiled
        _c = None

BACKEND = "cython" if _c is not None else "python"

INT64_INF = np.iinfo(np.int64).max // 4
LONGDOUBLE = np.longdouble


def backend_module(name: str | None = None):
    """Return the kernel module for ``name`` ('cython', 'python' or active)."""
    if name is None:
        name = BACKEND
    if name == "cython":
        if _c is None:
            raise RuntimeError("compiled kernels are not built")
        return _c
    if name == "python":
        return _pykernels
    raise ValueError(f"unknown backend {name!r}")


def _native(arr: np.ndarray) -> bool:
    return arr.dtype in (np.int64, np.longdouble)


def hungarian(cost: np.ndarray, backend: str | None = None):
    mod = backend_module(backend)
    if mod is _c and _native(cost) and cost.shape[0] > 0:
        cost = np.ascontiguousarray(cost)
        inf = INT64_INF if cost.dtype == np.int64 else np.longdouble(np.inf)
        return _c.hungarian(cost, inf)
    return _pykernels.hungarian(cost)


def tight_matrix(cost, u, v, tol, backend: str | None = None):
    mod = backend_module(backend)
    if mod is _c and _native(cost) and u.dtype == cost.dtype:
        cost = np.ascontiguousarray(cost)
        return _c.tight_matrix(
            cost, np.ascontiguousarray(u), np.ascontiguousarray(v), cost.dtype.type(tol)
        )
    return _pykernels.tight_matrix(cost, u, v, tol)


def canonicalize(tight: np.ndarray, row_to_col: np.ndarray, backend: str | None = None):
    mod = backend_module(backend)
    return mod.canonicalize(
        np.ascontiguousarray(tight, dtype=np.uint8),
        np.ascontiguousarray(row_to_col, dtype=np.int64),
    )


def ortho_matrix(a_words: np.ndarray, b_words: np.ndarray, backend: str | None = None):
    mod = backend_module(backend)
    return mod.ortho_matrix(
        np.ascontiguousarray(a_words, dtype=np.uint64),
        np.ascontiguousarray(b_words, dtype=np.uint64),
    )


def sqdist_matrix(a: np.ndarray, b: np.ndarray, backend: str | None = None):
    mod = backend_module(backend)
    if mod is _c and a.dtype == np.int64 and b.dtype == np.int64:
        return _c.sqdist_matrix(np.ascontiguousarray(a), np.ascontiguousarray(b))
    return _pykernels.sqdist_matrix(a, b)


def hopcroft_karp(n_left, n_right, indptr, indices, backend: str | None = None):
    mod = backend_module(backend)
    return mod.hopcroft_karp(
        int(n_left),
        int(n_right),
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
    )
