"""Mixing-time estimators for static graphs, dynamic trajectories, and the
edge-Markovian model, plus regime witnesses (coarse mixing, non-mixing).

Dynamic mixing asks that the walk's TV distance to the per-step stationary
distribution stays below ``eps`` for every step in a persistence window:
t_mix is the smallest t such that TV(mu_s^x, pi_s) <= eps for all starts x
and all s in [t, t + window]. The window defaults to ceil(sqrt(n)); the
o(1) thresholds of the asymptotic definitions become the explicit eps /
confidence knobs of MixingConfig, echoed in every report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .graphs import GraphState, ModelParams, Trajectory, is_connected
from .rng import substream
from .walks import (
    STEP_CONVENTION,
    WalkKind,
    l2pi_sq_batch,
    propagate_batch,
    stationary_dist,
    step_batch,
    tv_batch,
)

__all__ = [
    "EXHAUSTIVE_START_LIMIT",
    "SAMPLED_START_COUNT",
    "MixingConfig",
    "MixingReport",
    "ModelMixingResult",
    "NonmixingReport",
    "static_mixing_time",
    "dynamic_mixing_time",
    "model_mixing_time",
    "coarse_mixing_stat",
    "nonmixing_witness",
]

# definitions quantify over all starts; beyond this size a seeded sample is used
EXHAUSTIVE_START_LIMIT = 256
SAMPLED_START_COUNT = 20

_STARTS_KEY = 0x57A7


@dataclass(frozen=True)
class MixingConfig:
    eps: float = 0.05
    window: int | None = None          # None: ceil(sqrt(n))
    horizon: int = 200
    starts: tuple[int, ...] | str = "all"
    trials: int = 20
    confidence: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise ParameterError("eps must be in (0,1)")
        if self.window is not None and self.window < 1:
            raise ParameterError("window must be >= 1")
        if not (0.0 < self.confidence <= 1.0):
            raise ParameterError("confidence must be in (0,1]")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")

    def resolved_window(self, n: int) -> int:
        return self.window if self.window is not None else math.ceil(math.sqrt(n))


@dataclass(frozen=True)
class MixingReport:
    t_mix: int | None
    tv_max: np.ndarray           # index t = 0..last recorded step
    l2pi_sq_max: np.ndarray
    eps: float
    window: int
    starts: tuple[int, ...]
    starts_mode: str             # exhaustive | sampled | explicit
    seed_entropy: object
    convention: str = STEP_CONVENTION

    @property
    def mixed(self) -> bool:
        return self.t_mix is not None


@dataclass(frozen=True)
class ModelMixingResult:
    t_mix: int | None
    fraction_mixed: float
    trial_t_mix: tuple[int | None, ...]
    confidence: float


@dataclass(frozen=True)
class NonmixingReport:
    tv_max: np.ndarray
    probe_range: tuple[int, int]
    floor: float
    frac_above_floor: float
    max_rebound: float
    starts_mode: str


def resolve_starts(n: int, starts: tuple[int, ...] | Sequence[int] | str,
                   seed_seq) -> tuple[np.ndarray, str]:
    if isinstance(starts, str):
        if starts != "all":
            raise ParameterError(f"unknown starts policy {starts!r}")
        if n <= EXHAUSTIVE_START_LIMIT:
            return np.arange(n, dtype=np.int64), "exhaustive"
        rng = np.random.Generator(np.random.Philox(seed_seq))
        picked = rng.choice(n, size=SAMPLED_START_COUNT, replace=False)
        return np.sort(picked.astype(np.int64)), "sampled"
    arr = np.asarray(sorted(int(x) for x in starts), dtype=np.int64)
    if arr.size == 0 or arr[0] < 0 or arr[-1] >= n:
        raise ParameterError("explicit starts must be non-empty and in range")
    return arr, "explicit"


def _point_mass_batch(n: int, starts: np.ndarray) -> np.ndarray:
    M = np.zeros((starts.size, n), dtype=np.float64)
    M[np.arange(starts.size), starts] = 1.0
    return M


def static_mixing_time(g: GraphState, eps: float, max_steps: int = 10_000) -> int | None:
    """Smallest t with worst-start TV(mu_t^x, pi) <= eps on a static graph.

    Exact propagation from every start at once; None for disconnected
    graphs (no mixing) or when max_steps is hit.
    """
    if not (0.0 < eps < 1.0):
        raise ParameterError("eps must be in (0,1)")
    if not is_connected(g):
        return None
    pi = stationary_dist(g).values
    M = np.eye(g.n, dtype=np.float64)
    if tv_batch(M, pi).max() <= eps:
        return 0
    for t in range(1, max_steps + 1):
        M = step_batch(M, g, WalkKind.LAZY)
        if tv_batch(M, pi).max() <= eps:
            return t
    return None


def _window_t_mix(tv_max: np.ndarray, eps: float, window: int) -> int | None:
    """Smallest t with tv_max[t..t+window] <= eps, inclusive on both ends."""
    ok = tv_max <= eps
    run = 0
    for t in range(len(ok)):
        run = run + 1 if ok[t] else 0
        if run >= window + 1:
            return t - window
    return None


def dynamic_mixing_time(traj: Trajectory, cfg: MixingConfig,
                        full_series: bool = False) -> MixingReport:
    """Windowed mixing time of a lazy walk on one trajectory.

    Propagates every configured start simultaneously, recording per-step
    worst-start TV and l2(pi)^2 series. Stops as soon as the window
    condition is met unless full_series is set (then it always runs to the
    horizon, which scenario runners rely on for complete output files).
    """
    n = traj.params.n
    window = cfg.resolved_window(n)
    if cfg.horizon < window:
        raise ParameterError("horizon must be at least the persistence window")
    starts, mode = resolve_starts(n, cfg.starts, traj.substream(_STARTS_KEY))
    M = _point_mass_batch(n, starts)
    tv_series = [float(tv_batch(M, stationary_dist(traj.snapshot(0)).values).max())]
    l2_series = [float(l2pi_sq_batch(M, stationary_dist(traj.snapshot(0)).values).max())]
    t_mix: int | None = None
    run = 1 if tv_series[0] <= cfg.eps else 0
    if run >= window + 1:
        t_mix = 0
    for t in range(1, cfg.horizon + 1):
        g = traj.snapshot(t)
        M = step_batch(M, g, WalkKind.LAZY)
        pi = stationary_dist(g).values
        tv_series.append(float(tv_batch(M, pi).max()))
        l2_series.append(float(l2pi_sq_batch(M, pi).max()))
        run = run + 1 if tv_series[-1] <= cfg.eps else 0
        if t_mix is None and run >= window + 1:
            t_mix = t - window
            if not full_series:
                break
    return MixingReport(
        t_mix=t_mix,
        tv_max=np.asarray(tv_series),
        l2pi_sq_max=np.asarray(l2_series),
        eps=cfg.eps,
        window=window,
        starts=tuple(starts.tolist()),
        starts_mode=mode,
        seed_entropy=traj.seed_entropy,
    )


def model_mixing_time(params: ModelParams, cfg: MixingConfig,
                      initial: GraphState | None = None) -> ModelMixingResult:
    """Mixing time of the model: smallest t reached by at least a
    ``confidence`` fraction of independently seeded trajectories.

    Each trial gets the substream (seed, trial index); G_0 is sampled from
    ER(p_tilde) unless an explicit initial graph is given.
    """
    t_values: list[int | None] = []
    for trial in range(cfg.trials):
        traj = Trajectory(params, substream(cfg.seed, trial), initial=initial)
        report = dynamic_mixing_time(traj, cfg)
        t_values.append(report.t_mix)
    finite = sorted(t for t in t_values if t is not None)
    fraction = len(finite) / cfg.trials
    need = math.ceil(cfg.confidence * cfg.trials)
    t_mix = finite[need - 1] if len(finite) >= need else None
    return ModelMixingResult(t_mix, fraction, tuple(t_values), cfg.confidence)


def coarse_mixing_stat(traj: Trajectory, t_range: tuple[int, int], start: int) -> np.ndarray:
    """Exact ||mu_t/pi_t - 1||^2_{2,pi_t} series over t in [lo, hi], single start."""
    lo, hi = int(t_range[0]), int(t_range[1])
    if not (0 <= lo <= hi):
        raise ParameterError("t_range must satisfy 0 <= lo <= hi")
    n = traj.params.n
    if not (0 <= start < n):
        raise ParameterError(f"start {start} out of range")
    M = _point_mass_batch(n, np.asarray([start], dtype=np.int64))
    out = np.empty(hi - lo + 1, dtype=np.float64)
    if lo == 0:
        out[0] = l2pi_sq_batch(M, stationary_dist(traj.snapshot(0)).values)[0]

    def probe(t: int, Mt: np.ndarray, g: GraphState) -> None:
        if t >= lo:
            out[t - lo] = l2pi_sq_batch(Mt, stationary_dist(g).values)[0]

    propagate_batch(M, traj, hi, WalkKind.LAZY, probe)
    return out


def nonmixing_witness(traj: Trajectory, cfg: MixingConfig, floor: float,
                      probe_range: tuple[int, int] | None = None) -> NonmixingReport:
    """Worst-start TV series with the fraction of probed steps at or above
    ``floor`` and the largest rebound (TV increase above the running
    minimum), the empirical signature of non-mixing."""
    lo, hi = probe_range if probe_range is not None else (1, cfg.horizon)
    if not (0 <= lo <= hi):
        raise ParameterError("probe range must satisfy 0 <= lo <= hi")
    n = traj.params.n
    starts, mode = resolve_starts(n, cfg.starts, traj.substream(_STARTS_KEY))
    M = _point_mass_batch(n, starts)
    tv = np.empty(hi + 1, dtype=np.float64)
    tv[0] = tv_batch(M, stationary_dist(traj.snapshot(0)).values).max()

    def probe(t: int, Mt: np.ndarray, g: GraphState) -> None:
        tv[t] = tv_batch(Mt, stationary_dist(g).values).max()

    propagate_batch(M, traj, hi, WalkKind.LAZY, probe)
    probed = tv[lo:hi + 1]
    frac = float((probed >= floor).mean())
    running_min = np.minimum.accumulate(tv)
    rebound = float((tv - running_min).max())
    return NonmixingReport(tv, (lo, hi), floor, frac, rebound, mode)
