"""Exact propagation of walk distributions and distance functionals.

Indexing convention: mu_t = mu_0 P_1 P_2 ... P_t, i.e. the transition into
step t uses snapshot G_t. Isolated vertices hold their mass (self-transition
1) under both walk kinds. The lazy walk stays put with probability 1/2 and
otherwise moves to a uniform neighbor; the simple walk always moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError, ParameterError
from .graphs import GraphState, Trajectory
from . import kernels

__all__ = [
    "STEP_CONVENTION",
    "WalkKind",
    "Distribution",
    "stationary_dist",
    "transition_weights",
    "dense_transition",
    "step",
    "step_batch",
    "propagate",
    "propagate_batch",
    "tv_distance",
    "tv_batch",
    "l2pi_distance",
    "l2pi_sq",
    "l2pi_sq_batch",
]

STEP_CONVENTION = "mu_t = mu_0 P_1 ... P_t (transition into step t uses snapshot G_t)"

# drift beyond this triggers renormalization; beyond _SUM_ERROR it is a bug
_SUM_RENORM = 1e-12
_SUM_ERROR = 1e-9

# batches at least this tall on graphs at least this dense go through BLAS
_DENSE_BATCH_MIN = 64
_DENSE_N_MAX = 2048


class WalkKind(Enum):
    LAZY = "lazy"
    SIMPLE = "simple"


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over vertices; values are not mutated after creation."""

    values: np.ndarray
    degenerate: bool = False

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @classmethod
    def point(cls, n: int, x: int) -> "Distribution":
        if not (0 <= x < n):
            raise ParameterError(f"vertex {x} out of range for n={n}")
        values = np.zeros(n, dtype=np.float64)
        values[x] = 1.0
        return cls(values)

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls(np.full(n, 1.0 / n, dtype=np.float64))

    @classmethod
    def from_values(cls, values, degenerate: bool = False) -> "Distribution":
        arr = np.asarray(values, dtype=np.float64).copy()
        if arr.ndim != 1:
            raise ParameterError("distribution values must be one-dimensional")
        if np.any(arr < 0.0):
            raise ParameterError("distribution values must be nonnegative")
        total = float(arr.sum())
        if abs(total - 1.0) > _SUM_ERROR:
            raise ParameterError(f"distribution mass {total} is off by more than {_SUM_ERROR}")
        if abs(total - 1.0) > _SUM_RENORM:
            arr = arr / total
        return cls(arr, degenerate)


def stationary_dist(g: GraphState) -> Distribution:
    """Canonical stationary distribution deg(x)/(2|E|); uniform and flagged
    degenerate on the edgeless graph."""
    m = g.edge_count
    if m == 0:
        return Distribution(np.full(g.n, 1.0 / g.n), degenerate=True)
    return Distribution(g.degrees / (2.0 * m))


def transition_weights(g: GraphState, kind: WalkKind) -> tuple[np.ndarray, np.ndarray]:
    """(w_self, w_move) so that P(u,u) = w_self[u], P(u,v) = w_move[u] for v ~ u."""
    deg = g.degrees.astype(np.float64)
    iso = deg == 0.0
    safe = np.where(iso, 1.0, deg)
    if kind is WalkKind.LAZY:
        w_self = np.where(iso, 1.0, 0.5)
        w_move = np.where(iso, 0.0, 0.5 / safe)
    elif kind is WalkKind.SIMPLE:
        w_self = np.where(iso, 1.0, 0.0)
        w_move = np.where(iso, 0.0, 1.0 / safe)
    else:
        raise ParameterError(f"unknown walk kind {kind!r}")
    return w_self, w_move


def dense_transition(g: GraphState, kind: WalkKind) -> np.ndarray:
    """Dense transition matrix; intended for oracles and spectral work."""
    w_self, w_move = transition_weights(g, kind)
    P = np.zeros((g.n, g.n), dtype=np.float64)
    us, vs = g.endpoints
    P[us, vs] = w_move[us]
    P[vs, us] = w_move[vs]
    P[np.diag_indices(g.n)] = w_self
    return P


def step_batch(M: np.ndarray, g: GraphState, kind: WalkKind = WalkKind.LAZY) -> np.ndarray:
    """Advance each row of M by one step of the walk on g. Cost O(k(|E|+n))."""
    if M.shape[1] != g.n:
        raise DimensionError(f"distributions have n={M.shape[1]}, graph has n={g.n}")
    k, n = M.shape
    m = g.edge_count
    if k >= _DENSE_BATCH_MIN and n <= _DENSE_N_MAX and 8 * m >= n * n:
        return M @ dense_transition(g, kind)
    indptr, indices = g.csr()
    w_self, w_move = transition_weights(g, kind)
    return kernels.walk_step_batch(M, indptr, indices, w_self, w_move)


def step(mu: Distribution, g: GraphState, kind: WalkKind = WalkKind.LAZY) -> Distribution:
    """One walk transition of a single distribution."""
    if mu.n != g.n:
        raise DimensionError(f"distribution has n={mu.n}, graph has n={g.n}")
    out = step_batch(mu.values[None, :], g, kind)[0]
    return Distribution.from_values(out)


def _renormalize_rows(M: np.ndarray) -> np.ndarray:
    sums = M.sum(axis=1)
    drift = np.abs(sums - 1.0)
    if np.any(drift > _SUM_ERROR):
        raise DomainError(f"distribution mass drifted by {drift.max():.3e}")
    if np.any(drift > _SUM_RENORM):
        M = M / sums[:, None]
    return M


def propagate_batch(M0: np.ndarray, traj: Trajectory, t_max: int,
                    kind: WalkKind = WalkKind.LAZY,
                    probe: Callable[[int, np.ndarray, GraphState], None] | None = None
                    ) -> np.ndarray:
    """Push a batch of distributions through snapshots 1..t_max."""
    M = np.ascontiguousarray(M0, dtype=np.float64)
    if M.shape[1] != traj.params.n:
        raise DimensionError("batch width does not match the trajectory's n")
    for t in range(1, t_max + 1):
        g = traj.snapshot(t)
        M = _renormalize_rows(step_batch(M, g, kind))
        if probe is not None:
            probe(t, M, g)
    return M


def propagate(mu0: Distribution, traj: Trajectory, t_max: int,
              kind: WalkKind = WalkKind.LAZY,
              probe: Callable[[int, "Distribution", GraphState], None] | None = None
              ) -> Distribution:
    """mu_t = mu_0 P_1 ... P_{t_max}; probe(t, mu_t, G_t) runs for 1 <= t <= t_max."""
    if probe is None:
        batch_probe = None
    else:
        def batch_probe(t: int, M: np.ndarray, g: GraphState) -> None:
            probe(t, Distribution(M[0].copy()), g)
    out = propagate_batch(mu0.values[None, :], traj, t_max, kind, batch_probe)
    return Distribution.from_values(out[0])


# ---------------------------------------------------------------------------
# distances

def tv_distance(f: Distribution, g: Distribution) -> float:
    if f.n != g.n:
        raise DimensionError("total variation needs equal-length distributions")
    return 0.5 * float(np.abs(f.values - g.values).sum())


def tv_batch(M: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Per-row TV distance between rows of M and the vector pi."""
    return 0.5 * np.abs(M - pi[None, :]).sum(axis=1)


def l2pi_sq(mu: np.ndarray, pi: np.ndarray) -> float:
    """||mu/pi - 1||^2 in the pi-weighted l2 norm; +inf when mu has mass
    where pi vanishes."""
    null = pi == 0.0
    if np.any(mu[null] > 0.0):
        return math.inf
    safe = np.where(null, 1.0, pi)
    diff = mu - pi
    return float(np.sum(np.where(null, 0.0, diff * diff / safe)))


def l2pi_distance(mu: Distribution, pi: Distribution) -> float:
    if mu.n != pi.n:
        raise DimensionError("l2(pi) distance needs equal-length distributions")
    return math.sqrt(l2pi_sq(mu.values, pi.values))


def l2pi_sq_batch(M: np.ndarray, pi: np.ndarray) -> np.ndarray:
    null = pi == 0.0
    safe = np.where(null, 1.0, pi)
    diff = M - pi[None, :]
    vals = np.sum(np.where(null[None, :], 0.0, diff * diff / safe[None, :]), axis=1)
    if null.any():
        bad = (M[:, null] > 0.0).any(axis=1)
        vals = np.where(bad, np.inf, vals)
    return vals
