"""Cut statistics, exact conductance, connected-set enumeration, and
birth-and-death chain machinery for cut-evolution experiments.

The exact graph conductance minimizes boundary/volume over vertex sets with
1 <= vol(S) <= vol(V)/2. Restricting the minimization to connected sets is
lossless (a disconnected minimizer always contains a connected set doing at
least as well), which both the enumerator-based implementation and the
exhaustive bitmask oracle rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import DimensionError, DomainError, ParameterError
from .graphs import GraphState, Trajectory, slot_endpoints
from .rng import generator
from .walks import Distribution
from . import kernels

__all__ = [
    "CutStats",
    "cut_stats",
    "enumerate_connected_sets",
    "conductance_exact",
    "conductance_all_subsets",
    "BDChain",
    "bd_stationary",
    "HittingTime",
    "bd_hitting_time",
    "bd_simulate_occupancy",
    "track_cut_trajectory",
    "phi_preservation_experiment",
    "Thm3Config",
    "AssumptionReport",
    "check_thm3_assumptions",
]


# ---------------------------------------------------------------------------
# cut statistics

@dataclass(frozen=True)
class CutStats:
    set_size: int
    boundary: int
    volume: int
    phi: float


def _boundary_and_volume(g: GraphState, in_s: np.ndarray) -> tuple[int, int]:
    us, vs = g.endpoints
    boundary = int(np.count_nonzero(in_s[us] ^ in_s[vs]))
    volume = int(g.degrees[in_s].sum())
    return boundary, volume


def cut_stats(g: GraphState, s: Iterable[int]) -> CutStats:
    """Exact boundary edge count, volume and conductance of the set s."""
    members = np.asarray(sorted(set(int(x) for x in s)), dtype=np.int64)
    if members.size == 0:
        raise DomainError("cut statistics need a non-empty set")
    if members[0] < 0 or members[-1] >= g.n:
        raise DomainError("set contains vertices out of range")
    in_s = np.zeros(g.n, dtype=bool)
    in_s[members] = True
    boundary, volume = _boundary_and_volume(g, in_s)
    if volume == 0:
        raise DomainError("cut statistics need vol(S) >= 1")
    return CutStats(int(members.size), boundary, volume, boundary / volume)


# ---------------------------------------------------------------------------
# connected-set enumeration (rooted growth, exclusive-neighborhood pruning)

def enumerate_connected_sets(g: GraphState, k: int) -> Iterator[frozenset[int]]:
    """All vertex sets of size k inducing a connected subgraph, each once.

    Rooted growth: sets are rooted at their minimum vertex and extended only
    through exclusive neighbors with larger labels, which makes the
    enumeration duplicate-free without a seen-set.
    """
    if k < 1:
        raise ParameterError("set size must be >= 1")
    n = g.n
    if k > n:
        return
    if k == 1:
        for v in range(n):
            yield frozenset((v,))
        return
    indptr, indices = g.csr()
    adj = [set(indices[indptr[v]:indptr[v + 1]].tolist()) for v in range(n)]

    def extend(sub: set[int], ext: set[int], closed: set[int], root: int):
        if len(sub) == k:
            yield frozenset(sub)
            return
        ext = set(ext)
        while ext:
            w = min(ext)
            ext.remove(w)
            new_excl = {u for u in adj[w] if u > root and u not in closed}
            sub.add(w)
            yield from extend(sub, ext | new_excl, closed | new_excl, root)
            sub.remove(w)

    for root in range(n):
        ext0 = {u for u in adj[root] if u > root}
        yield from extend({root}, ext0, {root} | ext0, root)


def conductance_exact(g: GraphState, cap: int = 20) -> tuple[float, frozenset[int]]:
    """Exact conductance and a minimizing connected set.

    Enumerates connected sets of every size, keeping those within the volume
    cap. Refuses graphs larger than ``cap`` vertices; returns (0.0, empty)
    for the edgeless graph, where no set has positive volume.
    """
    if g.n > cap:
        raise DomainError(f"exact conductance capped at n <= {cap}, got n={g.n}")
    if g.edge_count == 0:
        return 0.0, frozenset()
    deg = g.degrees
    vol_total = int(deg.sum())
    best_phi = math.inf
    best_set: frozenset[int] = frozenset()
    in_s = np.zeros(g.n, dtype=bool)
    for k in range(1, g.n):
        for s in enumerate_connected_sets(g, k):
            members = list(s)
            volume = int(deg[members].sum())
            if volume == 0 or 2 * volume > vol_total:
                continue
            in_s[:] = False
            in_s[members] = True
            boundary, _ = _boundary_and_volume(g, in_s)
            phi = boundary / volume
            if phi < best_phi:
                best_phi = phi
                best_set = s
    return best_phi, best_set


def conductance_all_subsets(g: GraphState, cap: int = 20) -> tuple[float, frozenset[int]]:
    """Exhaustive all-subset conductance (bitmask scan); oracle counterpart
    of :func:`conductance_exact` and the fast path for per-step experiments."""
    if g.n > cap:
        raise DomainError(f"exhaustive scan capped at n <= {cap}, got n={g.n}")
    if g.edge_count == 0:
        return 0.0, frozenset()
    us, vs = g.endpoints
    phi, mask = kernels.min_cut_scan(g.n, g.degrees, us, vs)
    members = frozenset(v for v in range(g.n) if (mask >> v) & 1)
    return phi, members


# ---------------------------------------------------------------------------
# birth-and-death chains on {0..m}

@dataclass(frozen=True)
class BDChain:
    """Chain on {0..m} stepping +1 w.p. b[k], -1 w.p. d[k], holding otherwise."""

    b: np.ndarray
    d: np.ndarray
    absorbing: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        b = np.asarray(self.b, dtype=np.float64)
        d = np.asarray(self.d, dtype=np.float64)
        if b.ndim != 1 or b.shape != d.shape or b.size < 1:
            raise ParameterError("b and d must be equal-length 1-d arrays")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)
        if np.any(b < 0) or np.any(d < 0) or np.any(b + d > 1 + 1e-12):
            raise ParameterError("b, d must be nonnegative with b + d <= 1")
        if b[-1] != 0.0:
            raise ParameterError("b[m] must be 0 (no step above the ceiling)")
        if d[0] != 0.0:
            raise ParameterError("d[0] must be 0 (no step below the floor)")
        for a in self.absorbing:
            if not (0 <= a <= self.m):
                raise ParameterError(f"absorbing state {a} out of range")
            if b[a] != 0.0 or d[a] != 0.0:
                raise ParameterError(f"absorbing state {a} must have b = d = 0")

    @property
    def m(self) -> int:
        return int(self.b.size - 1)

    @property
    def r(self) -> np.ndarray:
        return 1.0 - self.b - self.d

    @classmethod
    def constant(cls, m: int, b: float, d: float,
                 absorbing: Iterable[int] = ()) -> "BDChain":
        bb = np.full(m + 1, b, dtype=np.float64)
        dd = np.full(m + 1, d, dtype=np.float64)
        bb[m] = 0.0
        dd[0] = 0.0
        absorbing = frozenset(int(a) for a in absorbing)
        for a in absorbing:
            bb[a] = 0.0
            dd[a] = 0.0
        return cls(bb, dd, absorbing)


def bd_stationary(chain: BDChain) -> Distribution:
    """Stationary distribution pi(k) proportional to prod_{i<=k} b[i-1]/d[i]."""
    if chain.absorbing:
        raise DomainError("stationary distribution needs an irreducible chain")
    if np.any(chain.b[:-1] <= 0.0) or np.any(chain.d[1:] <= 0.0):
        raise DomainError("irreducibility needs b[k] > 0 below m and d[k] > 0 above 0")
    m = chain.m
    w = np.ones(m + 1, dtype=np.float64)
    for k in range(1, m + 1):
        w[k] = w[k - 1] * chain.b[k - 1] / chain.d[k]
    return Distribution(w / w.sum())


@dataclass(frozen=True)
class HittingTime:
    mean_exact: float
    mean_mc: float
    std_mc: float
    hit_fraction: float
    trials: int
    horizon: int

    @property
    def stderr_mc(self) -> float:
        hits = round(self.hit_fraction * self.trials)
        return self.std_mc / math.sqrt(hits) if hits > 0 else math.inf


def _reach_forward(chain: BDChain, a: int) -> set[int]:
    seen = {a}
    frontier = [a]
    while frontier:
        k = frontier.pop()
        if chain.b[k] > 0 and k + 1 not in seen:
            seen.add(k + 1)
            frontier.append(k + 1)
        if chain.d[k] > 0 and k - 1 not in seen:
            seen.add(k - 1)
            frontier.append(k - 1)
    return seen


def bd_hitting_time(chain: BDChain, a: int, target: int | Iterable[int],
                    trials: int = 10_000, horizon: int | None = None,
                    seed: int = 0) -> HittingTime:
    """Mean hitting time of the target set: exact first-step solve plus a
    seeded Monte Carlo estimate with a finite horizon.

    The exact mean is +inf when a positive-probability path escapes the
    states from which the target is reachable.
    """
    m = chain.m
    targets = {int(target)} if isinstance(target, (int, np.integer)) else {int(x) for x in target}
    if not targets or not all(0 <= t <= m for t in targets) or not (0 <= a <= m):
        raise DomainError("start and target states must lie in {0..m}")
    if a in targets:
        return HittingTime(0.0, 0.0, 0.0, 1.0, trials, 0)

    reach = _reach_forward(chain, a)
    if reach & targets:
        # escape check: every reachable state must still be able to reach a target
        can = set(targets)
        changed = True
        while changed:
            changed = False
            for k in range(m + 1):
                if k in can:
                    continue
                if (chain.b[k] > 0 and k + 1 in can) or (chain.d[k] > 0 and k - 1 in can):
                    can.add(k)
                    changed = True
        mean_exact = math.inf if not reach <= can else None
    else:
        mean_exact = math.inf

    if mean_exact is None:
        interior = sorted(reach - targets)
        index = {k: i for i, k in enumerate(interior)}
        size = len(interior)
        A = np.zeros((size, size), dtype=np.float64)
        rhs = np.ones(size, dtype=np.float64)
        for k in interior:
            i = index[k]
            A[i, i] = 1.0 - chain.r[k]
            if chain.b[k] > 0 and k + 1 in index:
                A[i, index[k + 1]] = -chain.b[k]
            if chain.d[k] > 0 and k - 1 in index:
                A[i, index[k - 1]] = -chain.d[k]
        h = np.linalg.solve(A, rhs)
        mean_exact = float(h[index[a]])

    if horizon is None:
        horizon = 1000 if not math.isfinite(mean_exact) else int(max(1000, 50 * mean_exact))
    rng = generator(seed, 0xB0)
    pos = np.full(trials, a, dtype=np.int64)
    hit_at = np.full(trials, -1, dtype=np.int64)
    target_arr = np.zeros(m + 1, dtype=bool)
    for t in targets:
        target_arr[t] = True
    stuck = (chain.b == 0.0) & (chain.d == 0.0) & ~target_arr
    active = np.ones(trials, dtype=bool)
    for step_idx in range(1, horizon + 1):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        u = rng.random(idx.size)
        cur = pos[idx]
        up = u < chain.b[cur]
        down = (~up) & (u < chain.b[cur] + chain.d[cur])
        cur = cur + up.astype(np.int64) - down.astype(np.int64)
        pos[idx] = cur
        arrived = target_arr[cur]
        hit_at[idx[arrived]] = step_idx
        active[idx[arrived]] = False
        active[idx[stuck[cur]]] = False
    hits = hit_at >= 0
    hit_fraction = float(hits.mean())
    if hits.any():
        mean_mc = float(hit_at[hits].mean())
        std_mc = float(hit_at[hits].std(ddof=1)) if hits.sum() > 1 else 0.0
    else:
        mean_mc, std_mc = math.inf, math.inf
    return HittingTime(mean_exact, mean_mc, std_mc, hit_fraction, trials, horizon)


def bd_simulate_occupancy(chain: BDChain, steps: int, start: int = 0,
                          seed: int = 0) -> np.ndarray:
    """State-occupancy counts of a seeded simulation with ``steps`` transitions."""
    if not (0 <= start <= chain.m):
        raise DomainError("start state out of range")
    rng = generator(seed, 0xB1)
    u = rng.random(steps)
    b = chain.b
    bd = chain.b + chain.d
    counts = np.zeros(chain.m + 1, dtype=np.int64)
    pos = start
    counts[pos] += 1
    for i in range(steps):
        x = u[i]
        if x < b[pos]:
            pos += 1
        elif x < bd[pos]:
            pos -= 1
        counts[pos] += 1
    return counts


# ---------------------------------------------------------------------------
# cut evolution along a trajectory

def track_cut_trajectory(traj: Trajectory, s: Iterable[int], t_max: int) -> list[CutStats]:
    """Exact (boundary, volume) series for the set s over steps 0..t_max,
    maintained incrementally from the flipped slots of each transition."""
    n = traj.params.n
    members = np.asarray(sorted(set(int(x) for x in s)), dtype=np.int64)
    if members.size == 0:
        raise DomainError("tracked set must be non-empty")
    if members[0] < 0 or members[-1] >= n:
        raise DimensionError("tracked set out of range for the trajectory's n")
    in_s = np.zeros(n, dtype=bool)
    in_s[members] = True
    g0 = traj.snapshot(0)
    boundary, volume = _boundary_and_volume(g0, in_s)
    size = int(members.size)

    def record(b: int, v: int) -> CutStats:
        return CutStats(size, b, v, b / v if v > 0 else math.nan)

    series = [record(boundary, volume)]
    for t in range(1, t_max + 1):
        added, removed = traj.flips(t)
        for slots, sign in ((added, 1), (removed, -1)):
            if slots.size == 0:
                continue
            us, vs = slot_endpoints(slots, n)
            cnt = in_s[us].astype(np.int64) + in_s[vs].astype(np.int64)
            boundary += sign * int(np.count_nonzero(cnt == 1))
            volume += sign * int(cnt.sum())
        series.append(record(boundary, volume))
    return series


def phi_preservation_experiment(traj: Trajectory, t_max: int,
                                mode: str = "exact") -> np.ndarray:
    """Per-step conductance series over steps 0..t_max.

    mode "exact" (n <= 20) computes the exact conductance of each snapshot;
    mode "spectral" records the Cheeger lower bound 1 - lambda2(P_t).
    """
    n = traj.params.n
    out = np.empty(t_max + 1, dtype=np.float64)
    if mode == "exact":
        if n > 20:
            raise DomainError("exact mode capped at n <= 20")
        for t in range(t_max + 1):
            out[t] = conductance_all_subsets(traj.snapshot(t))[0]
    elif mode == "spectral":
        from .spectral import cheeger_lower_bound

        for t in range(t_max + 1):
            out[t] = cheeger_lower_bound(traj.snapshot(t))
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    return out


# ---------------------------------------------------------------------------
# starting-graph assumption checks

@dataclass(frozen=True)
class Thm3Config:
    """Finite-n thresholds for the three starting-graph assumptions."""

    deg_band: tuple[float, float] = (0.5, 2.0)   # min/max degree vs d
    c1: float = 1.0                              # small sets up to c1 * ln n
    c2: float = 1.0                              # boundary >= c2 * ln n * |S|
    c3: float = 1.0                              # phi >= c3 * ln d / d
    s_exact: int = 3
    sample_count: int = 200


@dataclass(frozen=True)
class AssumptionReport:
    min_deg: int
    max_deg: int
    deg_ok: bool
    small_set_ok: bool
    worst_ratio: float
    small_set_heuristic: bool
    phi_lb: float
    phi_ok: bool
    passed: bool
    config: Thm3Config
    seed: int


def _small_set_worst_ratio(g: GraphState, ln_n: float, s_max: int) -> float:
    """min over connected sets S, |S| <= s_max, of boundary(S)/(ln n * |S|).

    Sizes 1-3 are handled by vectorized formulas (singletons, edges, and
    vertex-centered neighbor pairs cover every connected set of those sizes);
    larger sizes fall back to enumeration.
    """
    deg = g.degrees.astype(np.int64)
    worst = math.inf
    if s_max >= 1 and g.n >= 1:
        if deg.size:
            worst = min(worst, float(deg.min()) / ln_n)
    if s_max >= 2 and g.edge_count:
        us, vs = g.endpoints
        pair_boundary = deg[us] + deg[vs] - 2
        worst = min(worst, float(pair_boundary.min()) / (2.0 * ln_n))
    if s_max >= 3 and g.edge_count:
        indptr, indices = g.csr()
        best_triple = math.inf
        for c in range(g.n):
            nbrs = indices[indptr[c]:indptr[c + 1]]
            if nbrs.size < 2:
                continue
            # every connected triple has a center adjacent to the other two;
            # boundary({u, c, w}) = deg u + deg w + deg c - 2*(2 + [u~w])
            pos = {int(u): i for i, u in enumerate(nbrs.tolist())}
            adj_uw = np.zeros((nbrs.size, nbrs.size), dtype=np.int64)
            for i, u in enumerate(nbrs.tolist()):
                for w in indices[indptr[u]:indptr[u + 1]].tolist():
                    j = pos.get(w)
                    if j is not None:
                        adj_uw[i, j] = 1
            dn = deg[nbrs]
            tri = dn[:, None] + dn[None, :] + int(deg[c]) - 4 - 2 * adj_uw
            iu = np.triu_indices(nbrs.size, k=1)
            best_triple = min(best_triple, float(tri[iu].min()))
        if math.isfinite(best_triple):
            worst = min(worst, best_triple / (3.0 * ln_n))
    for k in range(4, s_max + 1):
        in_s = np.zeros(g.n, dtype=bool)
        for s in enumerate_connected_sets(g, k):
            members = list(s)
            in_s[:] = False
            in_s[members] = True
            boundary, _ = _boundary_and_volume(g, in_s)
            worst = min(worst, boundary / (ln_n * k))
    return worst


def _sample_connected_set(g: GraphState, size: int, rng: np.random.Generator) -> list[int] | None:
    indptr, indices = g.csr()
    root = int(rng.integers(0, g.n))
    current = [root]
    chosen = {root}
    frontier = set(indices[indptr[root]:indptr[root + 1]].tolist())
    while len(current) < size:
        frontier -= chosen
        if not frontier:
            return None
        pool = sorted(frontier)
        v = pool[int(rng.integers(0, len(pool)))]
        chosen.add(v)
        current.append(v)
        frontier |= set(indices[indptr[v]:indptr[v + 1]].tolist())
    return current


def check_thm3_assumptions(g0: GraphState, d: float,
                           config: Thm3Config | None = None,
                           seed: int = 0) -> AssumptionReport:
    """Checks the three starting-graph conditions behind slow-dense mixing.

    (1) every degree within a multiplicative band of d; (2) small sets have
    boundary at least c2 * ln n * |S| -- exhaustively for sizes up to
    s_exact, by seeded sampling beyond that (flagged heuristic); (3) the
    conductance, exact for n <= 20 and the Cheeger lower bound otherwise,
    clears c3 * ln d / d.
    """
    cfg = config or Thm3Config()
    n = g0.n
    deg = g0.degrees
    min_deg, max_deg = int(deg.min()), int(deg.max())
    deg_ok = (min_deg >= cfg.deg_band[0] * d) and (max_deg <= cfg.deg_band[1] * d)

    ln_n = math.log(n) if n > 1 else 1.0
    s_max = max(cfg.s_exact, math.ceil(cfg.c1 * ln_n))
    worst_ratio = _small_set_worst_ratio(g0, ln_n, min(cfg.s_exact, s_max))
    heuristic = s_max > cfg.s_exact
    if heuristic:
        in_s = np.zeros(n, dtype=bool)
        rng = generator(seed, 0x7E3)
        for k in range(cfg.s_exact + 1, s_max + 1):
            for _ in range(cfg.sample_count):
                members = _sample_connected_set(g0, k, rng)
                if members is None:
                    continue
                in_s[:] = False
                in_s[members] = True
                boundary, _ = _boundary_and_volume(g0, in_s)
                worst_ratio = min(worst_ratio, boundary / (ln_n * k))
    small_set_ok = worst_ratio >= cfg.c2

    if n <= 20:
        phi_lb = conductance_all_subsets(g0)[0]
    else:
        from .spectral import cheeger_lower_bound

        phi_lb = cheeger_lower_bound(g0)
    phi_threshold = cfg.c3 * math.log(d) / d if d > 0 else 0.0
    phi_ok = phi_lb >= phi_threshold

    return AssumptionReport(
        min_deg=min_deg, max_deg=max_deg, deg_ok=bool(deg_ok),
        small_set_ok=bool(small_set_ok), worst_ratio=float(worst_ratio),
        small_set_heuristic=heuristic, phi_lb=float(phi_lb), phi_ok=bool(phi_ok),
        passed=bool(deg_ok and small_set_ok and phi_ok), config=cfg, seed=seed,
    )
