"""Backend selection for the hot kernels.

The compiled extension (emwalk._core) is used when it imported successfully;
otherwise the numpy/scipy fallback takes over. Set EMWALK_BACKEND=python or
EMWALK_BACKEND=compiled to force a choice (the latter raises if the extension
is missing). Both backends implement the same operations and agree exactly on
integer results and to float round-off on walk steps.
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback
from .errors import DomainError

try:
    from . import _core
except ImportError:
    _core = None

_forced = os.environ.get("EMWALK_BACKEND")
if _forced == "python":
    _active = None
elif _forced == "compiled":
    if _core is None:
        raise ImportError("EMWALK_BACKEND=compiled but emwalk._core is not built")
    _active = _core
else:
    _active = _core

BACKEND = "compiled" if _active is not None else "python"


def backend() -> str:
    return BACKEND


def compiled_available() -> bool:
    return _core is not None


def _as_c_double_matrix(M: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(M, dtype=np.float64)


def walk_step_batch(M: np.ndarray, indptr: np.ndarray, indices: np.ndarray,
                    w_self: np.ndarray, w_move: np.ndarray,
                    force: str | None = None) -> np.ndarray:
    """One walk transition applied to every row of M (shape (k, n))."""
    M = _as_c_double_matrix(M)
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    w_self = np.ascontiguousarray(w_self, dtype=np.float64)
    w_move = np.ascontiguousarray(w_move, dtype=np.float64)
    impl = _select(force)
    if impl is not None:
        return impl.walk_step_batch(M, indptr, indices, w_self, w_move)
    return _fallback.walk_step_batch(M, indptr, indices, w_self, w_move)


def min_cut_scan(n: int, degrees: np.ndarray, us: np.ndarray, vs: np.ndarray,
                 force: str | None = None) -> tuple[float, int]:
    """Exhaustive conductance scan; returns (phi, argmin subset bitmask)."""
    if n > 20:
        raise DomainError(f"exhaustive cut scan capped at n <= 20, got n={n}")
    degrees = np.ascontiguousarray(degrees, dtype=np.int64)
    us = np.ascontiguousarray(us, dtype=np.int64)
    vs = np.ascontiguousarray(vs, dtype=np.int64)
    impl = _select(force)
    if impl is not None:
        masks = np.zeros(n, dtype=np.uint64)
        one = np.uint64(1)
        np.bitwise_or.at(masks, us, one << vs.astype(np.uint64))
        np.bitwise_or.at(masks, vs, one << us.astype(np.uint64))
        return impl.min_cut_scan(n, degrees, masks)
    return _fallback.min_cut_scan(n, degrees, us, vs)


def _select(force: str | None):
    if force is None:
        return _active
    if force == "python":
        return None
    if force == "compiled":
        if _core is None:
            raise DomainError("compiled backend requested but emwalk._core is not built")
        return _core
    raise DomainError(f"unknown backend {force!r}")
