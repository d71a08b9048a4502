"""Numpy/scipy implementations of the hot kernels.

Selected automatically when the compiled extension is unavailable; results
match the compiled kernels (exactly for the integer cut scan, to float
round-off for walk steps).
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix


def walk_step_batch(M: np.ndarray, indptr: np.ndarray, indices: np.ndarray,
                    w_self: np.ndarray, w_move: np.ndarray) -> np.ndarray:
    n = M.shape[1]
    A = csr_matrix((np.ones(indices.shape[0]), indices, indptr), shape=(n, n))
    return M * w_self + (M * w_move) @ A


def min_cut_scan(n: int, deg: np.ndarray, us: np.ndarray, vs: np.ndarray,
                 chunk_bits: int = 16) -> tuple[float, int]:
    vol_total = int(deg.sum())
    total = 1 << n
    bit_idx = np.arange(n, dtype=np.uint64)
    best_phi = 2.0
    best_mask = 0
    found = False
    chunk = 1 << chunk_bits
    for lo in range(1, total, chunk):
        masks = np.arange(lo, min(lo + chunk, total), dtype=np.uint64)
        member = ((masks[:, None] >> bit_idx[None, :]) & np.uint64(1)).astype(bool)
        vol = member @ deg
        inside = (member[:, us] & member[:, vs]).sum(axis=1)
        boundary = vol - 2 * inside
        valid = (vol >= 1) & (2 * vol <= vol_total)
        if not valid.any():
            continue
        phi = np.where(valid, boundary / np.where(vol > 0, vol, 1), np.inf)
        i = int(np.argmin(phi))
        if not valid[i]:
            continue
        if (not found) or phi[i] < best_phi:
            best_phi = float(phi[i])
            best_mask = int(masks[i])
            found = True
    if not found:
        return 0.0, 0
    return best_phi, best_mask
