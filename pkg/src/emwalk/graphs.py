"""Graph snapshots, the edge-Markovian evolution process, and regime metrics.

A snapshot is an undirected simple graph on vertices ``0..n-1``. Edge slots
(unordered vertex pairs) are identified by their rank in the upper-triangular
enumeration, which keeps snapshots compact and makes uniform slot sampling
cheap. Evolution flips each present edge off with probability ``q`` and each
absent slot on with probability ``p``, independently per slot; the sampler
works in expected O(changes) rather than O(n^2) so sparse regimes stay cheap.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, ParameterError
from .rng import as_seed_sequence, generator, substream

__all__ = [
    "GraphState",
    "ModelParams",
    "Density",
    "Churn",
    "RegimeLabel",
    "RegimeThresholds",
    "DEFAULT_THRESHOLDS",
    "Trajectory",
    "slot_count",
    "slot_rank",
    "slot_endpoints",
    "sample_er",
    "evolve_step",
    "stationary_edge_prob",
    "regime_metrics",
    "regime_label",
    "slot_chain_tv",
    "graph_chain_mixing_time",
    "is_connected",
    "component_labels",
    "path_graph",
    "cycle_graph",
    "star_graph",
    "complete_graph",
    "disjoint_union",
    "write_snapshot",
    "read_snapshot",
]


# ---------------------------------------------------------------------------
# slot encoding: pair (u, v) with u < v  <->  rank in [0, n(n-1)/2)

def slot_count(n: int) -> int:
    return n * (n - 1) // 2


def slot_rank(u: int, v: int, n: int) -> int:
    """Rank of the edge slot {u, v} in the row-major upper-triangular order."""
    if u > v:
        u, v = v, u
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


def slot_endpoints(ranks: np.ndarray | Sequence[int], n: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized inverse of :func:`slot_rank`."""
    r = np.asarray(ranks, dtype=np.int64)
    m = 2 * n - 1
    u = np.floor((m - np.sqrt(m * m - 8.0 * r)) / 2.0).astype(np.int64)
    # fix float rounding: u must be the largest value with base(u) <= r
    for _ in range(2):
        base = u * (2 * n - u - 1) // 2
        u -= base > r
        base = u * (2 * n - u - 1) // 2
        u += (u + 1) * (2 * n - u - 2) // 2 <= r
    base = u * (2 * n - u - 1) // 2
    v = r - base + u + 1
    return u, v


class GraphState:
    """Immutable graph snapshot: vertex count plus a sorted array of edge slots.

    Degrees, neighbor lists (CSR) and the slot membership set are computed
    lazily and cached; instances must not be mutated after construction.
    """

    def __init__(self, n: int, slots: np.ndarray):
        n = int(n)
        if n < 1:
            raise ParameterError(f"vertex count must be >= 1, got {n}")
        slots = np.asarray(slots, dtype=np.int64)
        if slots.ndim != 1:
            raise ParameterError("slots must be a 1-d array of slot ranks")
        if slots.size:
            if slots[0] < 0 or slots[-1] >= slot_count(n):
                raise ParameterError("slot rank out of range")
            if np.any(np.diff(slots) <= 0):
                raise ParameterError("slots must be strictly increasing (sorted, no duplicates)")
        self.n = n
        self._slots = slots
        self._degrees: np.ndarray | None = None
        self._csr: tuple[np.ndarray, np.ndarray] | None = None
        self._slot_set: set[int] | None = None
        self._endpoints: tuple[np.ndarray, np.ndarray] | None = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def empty(cls, n: int) -> "GraphState":
        return cls(n, np.empty(0, dtype=np.int64))

    @classmethod
    def complete(cls, n: int) -> "GraphState":
        return cls(n, np.arange(slot_count(n), dtype=np.int64))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "GraphState":
        ranks = []
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ParameterError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ParameterError(f"edge ({u},{v}) out of range for n={n}")
            ranks.append(slot_rank(u, v, n))
        arr = np.unique(np.asarray(ranks, dtype=np.int64))
        if arr.size != len(ranks):
            raise ParameterError("duplicate edges")
        return cls(n, arr)

    # -- cached views ------------------------------------------------------

    @property
    def slots(self) -> np.ndarray:
        return self._slots

    @property
    def edge_count(self) -> int:
        return int(self._slots.size)

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (us, vs) with us < vs for every edge, in slot order."""
        if self._endpoints is None:
            self._endpoints = slot_endpoints(self._slots, self.n)
        return self._endpoints

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            us, vs = self.endpoints
            deg = np.bincount(us, minlength=self.n) + np.bincount(vs, minlength=self.n)
            self._degrees = deg.astype(np.int64)
        return self._degrees

    @property
    def slot_set(self) -> set[int]:
        if self._slot_set is None:
            self._slot_set = set(self._slots.tolist())
        return self._slot_set

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted neighbor lists as (indptr, indices), both int64."""
        if self._csr is None:
            us, vs = self.endpoints
            heads = np.concatenate([us, vs])
            tails = np.concatenate([vs, us])
            order = np.argsort(heads * self.n + tails, kind="stable")
            indices = tails[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(heads, minlength=self.n), out=indptr[1:])
            self._csr = (indptr, indices.astype(np.int64))
        return self._csr

    def neighbors(self, u: int) -> np.ndarray:
        indptr, indices = self.csr()
        return indices[indptr[u]:indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        return slot_rank(u, v, self.n) in self.slot_set

    def adjacency_masks(self) -> np.ndarray:
        """Per-vertex neighbor bitmasks (uint64); requires n <= 64."""
        if self.n > 64:
            raise DomainError("bitmask adjacency requires n <= 64")
        masks = np.zeros(self.n, dtype=np.uint64)
        us, vs = self.endpoints
        one = np.uint64(1)
        np.bitwise_or.at(masks, us, one << vs.astype(np.uint64))
        np.bitwise_or.at(masks, vs, one << us.astype(np.uint64))
        return masks

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphState):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._slots, other._slots)

    def __hash__(self) -> int:
        return hash((self.n, self._slots.tobytes()))

    def __repr__(self) -> str:
        return f"GraphState(n={self.n}, edges={self.edge_count})"


# ---------------------------------------------------------------------------
# structured graphs (used by tests and the verification suites)

def path_graph(n: int) -> GraphState:
    return GraphState.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> GraphState:
    if n < 3:
        raise ParameterError("cycle needs n >= 3")
    return GraphState.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n: int) -> GraphState:
    return GraphState.from_edges(n, [(0, i) for i in range(1, n)])


def complete_graph(n: int) -> GraphState:
    return GraphState.complete(n)


def disjoint_union(a: GraphState, b: GraphState) -> GraphState:
    au, av = a.endpoints
    bu, bv = b.endpoints
    edges = list(zip(au.tolist(), av.tolist()))
    edges += [(u + a.n, v + a.n) for u, v in zip(bu.tolist(), bv.tolist())]
    return GraphState.from_edges(a.n + b.n, edges)


# ---------------------------------------------------------------------------
# connectivity

def component_labels(g: GraphState) -> np.ndarray:
    """Connected-component label per vertex (0-based, order of discovery)."""
    indptr, indices = g.csr()
    labels = np.full(g.n, -1, dtype=np.int64)
    comp = 0
    for root in range(g.n):
        if labels[root] >= 0:
            continue
        stack = [root]
        labels[root] = comp
        while stack:
            u = stack.pop()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if labels[v] < 0:
                    labels[v] = comp
                    stack.append(int(v))
        comp += 1
    return labels


def is_connected(g: GraphState) -> bool:
    if g.n == 1:
        return True
    return int(component_labels(g).max()) == 0


# ---------------------------------------------------------------------------
# model parameters and regimes

@dataclass(frozen=True)
class ModelParams:
    """Edge-Markovian model parameters: off->on probability p, on->off q."""

    n: int
    p: float
    q: float

    def __post_init__(self):
        if int(self.n) < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        for name, value in (("p", self.p), ("q", self.q)):
            if not (0.0 <= value <= 1.0):
                raise ParameterError(f"{name} must be a probability, got {value}")

    @property
    def p_tilde(self) -> float:
        """Stationary per-slot edge probability p/(p+q)."""
        return stationary_edge_prob(self.p, self.q)

    @property
    def d(self) -> float:
        """Expected stationary degree (n-1) * p_tilde."""
        return (self.n - 1) * self.p_tilde

    @property
    def delta(self) -> float:
        """Expected flipped slots per step from a stationary start."""
        pt = self.p_tilde
        return slot_count(self.n) * (pt * self.q + (1.0 - pt) * self.p)


def stationary_edge_prob(p: float, q: float) -> float:
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ParameterError("p and q must be probabilities")
    if p + q == 0.0:
        raise ParameterError("p = q = 0 leaves the stationary edge probability undefined")
    return p / (p + q)


class Density(str, Enum):
    SPARSE = "sparse"
    SEMI_SPARSE = "semi_sparse"
    DENSE = "dense"


class Churn(str, Enum):
    FAST = "fast"
    SLOW = "slow"
    OTHER = "other"


@dataclass(frozen=True)
class RegimeThresholds:
    """Finite-n stand-ins for the asymptotic regime boundaries.

    Density compares d against multiples of ln n; churn compares delta
    against d*n/fast_divisor (fast) and slow_factor*ln n (slow).
    """

    sparse_below: float = 1.0
    dense_above: float = 4.0
    fast_divisor: float = 8.0
    slow_factor: float = 4.0


DEFAULT_THRESHOLDS = RegimeThresholds()


@dataclass(frozen=True)
class RegimeLabel:
    density: Density
    churn: Churn


def regime_label(n: int, d: float, delta: float,
                 thresholds: RegimeThresholds = DEFAULT_THRESHOLDS) -> RegimeLabel:
    ln_n = math.log(n) if n > 1 else 0.0
    if d < thresholds.sparse_below * ln_n:
        density = Density.SPARSE
    elif d > thresholds.dense_above * ln_n:
        density = Density.DENSE
    else:
        density = Density.SEMI_SPARSE
    if delta >= d * n / thresholds.fast_divisor and delta > 0:
        churn = Churn.FAST
    elif delta <= thresholds.slow_factor * ln_n:
        churn = Churn.SLOW
    else:
        churn = Churn.OTHER
    return RegimeLabel(density, churn)


def regime_metrics(params: ModelParams,
                   thresholds: RegimeThresholds = DEFAULT_THRESHOLDS
                   ) -> tuple[float, float, RegimeLabel]:
    d = params.d
    delta = params.delta
    return d, delta, regime_label(params.n, d, delta, thresholds)


# ---------------------------------------------------------------------------
# sampling

def _sample_absent_slots(rng: np.random.Generator, total: int, k: int,
                         present_sorted: np.ndarray) -> np.ndarray:
    """k distinct uniform slots among the ones not in ``present_sorted``.

    Expected O(k) rejection sampling with vectorized membership tests; when
    the request is a large fraction of the complement, the complement is
    materialized once instead so the cost never exceeds O(total).
    """
    if k == 0:
        return np.empty(0, dtype=np.int64)
    available = total - present_sorted.size
    if k > available:
        raise DomainError("requested more absent slots than available")
    if 4 * k > available:
        allowed = np.setdiff1d(np.arange(total, dtype=np.int64), present_sorted,
                               assume_unique=True)
        return np.sort(rng.choice(allowed, size=k, replace=False))
    chosen: set[int] = set()
    out: list[int] = []
    while len(out) < k:
        need = k - len(out)
        cand = rng.integers(0, total, size=2 * need + 8)
        if present_sorted.size:
            pos = np.searchsorted(present_sorted, cand)
            hit = (pos < present_sorted.size) & \
                  (present_sorted[np.minimum(pos, present_sorted.size - 1)] == cand)
            cand = cand[~hit]
        for r in cand.tolist():
            if r in chosen:
                continue
            chosen.add(r)
            out.append(r)
            if len(out) == k:
                break
    return np.sort(np.asarray(out, dtype=np.int64))


_NO_EXCLUSION = np.empty(0, dtype=np.int64)


def sample_er(n: int, p: float, seed: int | np.random.SeedSequence | np.random.Generator) -> GraphState:
    """Erdos-Renyi sample: each of the n(n-1)/2 slots open independently w.p. p."""
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"edge probability must be in [0,1], got {p}")
    rng = seed if isinstance(seed, np.random.Generator) else generator(seed)
    total = slot_count(int(n))
    if total == 0:
        return GraphState.empty(n)
    m = int(rng.binomial(total, p))
    slots = _sample_absent_slots(rng, total, m, _NO_EXCLUSION)
    return GraphState(n, slots)


# ---------------------------------------------------------------------------
# evolution

def evolve_flips(g: GraphState, p: float, q: float,
                 rng: np.random.Generator) -> tuple[GraphState, np.ndarray, np.ndarray]:
    """One evolution step; returns (next graph, added slots, removed slots).

    Present edges survive w.p. 1-q, absent slots open w.p. p, all slots
    independent. Sampling cost is O(changes) in expectation: flip counts are
    binomial draws and flip locations uniform without-replacement choices,
    which is distributionally identical to the per-slot Bernoulli scan.
    """
    n = g.n
    total = slot_count(n)
    m = g.edge_count
    slots = g.slots
    k_rem = int(rng.binomial(m, q)) if m > 0 and q > 0.0 else 0
    if k_rem:
        # distinct uniform positions among the m present edges
        rem_idx = _sample_absent_slots(rng, m, k_rem, _NO_EXCLUSION)
        removed = slots[rem_idx]
    else:
        removed = np.empty(0, dtype=np.int64)
    absent = total - m
    k_add = int(rng.binomial(absent, p)) if absent > 0 and p > 0.0 else 0
    added = _sample_absent_slots(rng, total, k_add, slots)
    if k_rem == 0 and k_add == 0:
        return g, added, removed
    kept = np.delete(slots, rem_idx) if k_rem else slots
    if k_add:
        new_slots = np.insert(kept, np.searchsorted(kept, added), added)
    else:
        new_slots = kept
    return GraphState(n, new_slots), added, removed


def evolve_step(g: GraphState, params: ModelParams,
                rng: np.random.Generator) -> tuple[GraphState, int]:
    """One edge-Markovian step; returns the new snapshot and flipped-slot count."""
    if g.n != params.n:
        raise DimensionError(f"graph has n={g.n} but params expect n={params.n}")
    nxt, added, removed = evolve_flips(g, params.p, params.q, rng)
    return nxt, int(added.size + removed.size)


# ---------------------------------------------------------------------------
# per-slot chain and the graph-chain mixing time

def slot_chain_tv(p: float, q: float, t: int, start_open: bool = False) -> float:
    """Exact TV distance of one edge slot's two-state chain to stationarity.

    The distance contracts by |1-p-q| per step from p_tilde (closed start)
    or 1-p_tilde (open start).
    """
    pt = stationary_edge_prob(p, q)
    tv0 = (1.0 - pt) if start_open else pt
    return abs(1.0 - p - q) ** t * tv0


def graph_chain_mixing_time(n: int, p: float, q: float, eps: float) -> int:
    """Steps until every slot chain is jointly within eps of stationarity.

    Smallest t with C(n,2) * |1-p-q|^t * max-slot-TV <= eps. Returns 1 when
    p + q = 1 (slots resample independently, so the chain is stationary after
    one step). The p = q = 1 chain alternates deterministically and is also
    reported as 1 per the contract for this operation.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ParameterError("p and q must be probabilities")
    if not (0.0 < eps < 1.0):
        raise ParameterError("eps must be in (0,1)")
    if p + q == 0.0:
        raise ParameterError("p = q = 0: the graph chain never converges")
    if p + q == 1.0 or (p == 1.0 and q == 1.0):
        return 1
    r = abs(1.0 - p - q)
    pt = p / (p + q)
    tv0 = max(pt, 1.0 - pt)
    bound0 = slot_count(n) * tv0
    if bound0 <= eps:
        return 0
    t = max(0, math.ceil(math.log(eps / bound0) / math.log(r)))
    while t > 0 and bound0 * r ** (t - 1) <= eps:
        t -= 1
    while bound0 * r ** t > eps:
        t += 1
    return t


# ---------------------------------------------------------------------------
# trajectories

class Trajectory:
    """Lazily generated snapshot sequence (G_0, G_1, ...) under fixed seeding.

    ``initial`` may be an explicit GraphState or None, in which case G_0 is
    sampled from the stationary graph distribution ER(p_tilde). Identical
    (params, seed, initial) always reproduce the same snapshots bit-for-bit.
    """

    _INIT_KEY = 0
    _EVOLVE_KEY = 1

    def __init__(self, params: ModelParams, seed: int | np.random.SeedSequence,
                 initial: GraphState | None = None):
        self.params = params
        self._root = as_seed_sequence(seed)
        if initial is None:
            initial = sample_er(params.n, params.p_tilde,
                                generator(self._root, self._INIT_KEY))
        elif initial.n != params.n:
            raise DimensionError(f"initial graph has n={initial.n} but params expect n={params.n}")
        self._rng = generator(self._root, self._EVOLVE_KEY)
        self._states: list[GraphState] = [initial]
        self._added: list[np.ndarray] = [np.empty(0, dtype=np.int64)]
        self._removed: list[np.ndarray] = [np.empty(0, dtype=np.int64)]

    @property
    def g0(self) -> GraphState:
        return self._states[0]

    @property
    def seed_entropy(self):
        return self._root.entropy

    def substream(self, *key: int) -> np.random.SeedSequence:
        return substream(self._root, *key)

    def _extend_to(self, t: int) -> None:
        while len(self._states) <= t:
            g, added, removed = evolve_flips(
                self._states[-1], self.params.p, self.params.q, self._rng)
            self._states.append(g)
            self._added.append(added)
            self._removed.append(removed)

    def snapshot(self, t: int) -> GraphState:
        if t < 0:
            raise ParameterError("t must be >= 0")
        self._extend_to(t)
        return self._states[t]

    def changes(self, t: int) -> int:
        """Number of slots flipped by the transition into step t (t >= 1)."""
        if t < 1:
            raise ParameterError("changes are defined for t >= 1")
        self._extend_to(t)
        return int(self._added[t].size + self._removed[t].size)

    def flips(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        """(added, removed) slot ranks for the transition into step t."""
        if t < 1:
            raise ParameterError("flips are defined for t >= 1")
        self._extend_to(t)
        return self._added[t], self._removed[t]


# ---------------------------------------------------------------------------
# snapshot serialization: header "n m t seed", then one "u v" line per edge

def write_snapshot(g: GraphState, path_or_file, t: int = 0, seed: int = 0) -> None:
    us, vs = g.endpoints
    lines = [f"{g.n} {g.edge_count} {t} {seed}\n"]
    lines.extend(f"{u} {v}\n" for u, v in zip(us.tolist(), vs.tolist()))
    data = "".join(lines)
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w") as fh:
            fh.write(data)
    else:
        path_or_file.write(data)


def read_snapshot(path_or_file) -> tuple[GraphState, int, int]:
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file) as fh:
            text = fh.read()
    else:
        text = path_or_file.read()
    buf = io.StringIO(text)
    header = buf.readline().split()
    if len(header) != 4:
        raise ParameterError("snapshot header must be 'n m t seed'")
    n, m, t, seed = (int(x) for x in header)
    edges = []
    for line in buf:
        line = line.strip()
        if not line:
            continue
        u, v = line.split()
        edges.append((int(u), int(v)))
    if len(edges) != m:
        raise ParameterError(f"snapshot declares {m} edges but contains {len(edges)}")
    return GraphState.from_edges(n, edges), t, seed
