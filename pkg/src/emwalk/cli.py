"""Reproducible experiment runner.

Scenario presets instantiate the six density/churn regimes at finite n;
``custom`` takes explicit (p, q). One run executes seeded independent
trajectories, writes a per-trial CSV series (schema
``t,edges,changes,tv_max,l2pi_sq,phi_lb``), a JSON summary with fields
(config, t_mix, mixed_fraction, seeds, convention), and optionally NDJSON
per-trial records and edge-list snapshot dumps. Identical (config, seed)
reruns produce byte-identical files; wall time is reported on stderr only.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ParameterError
from .graphs import (
    GraphState,
    ModelParams,
    Trajectory,
    read_snapshot,
    regime_metrics,
    write_snapshot,
)
from .mixing import MixingConfig, _window_t_mix, resolve_starts
from .rng import substream
from .spectral import cheeger_lower_bound
from .walks import (
    STEP_CONVENTION,
    WalkKind,
    l2pi_sq_batch,
    stationary_dist,
    step_batch,
    tv_batch,
)

__all__ = ["ScenarioConfig", "RunRecord", "preset_params", "run_scenario",
           "dump_trajectory", "main"]

SCENARIOS = (
    "fast_sparse", "fast_semisparse", "fast_dense",
    "slow_sparse", "slow_semisparse", "slow_dense", "custom",
)

CSV_HEADER = "t,edges,changes,tv_max,l2pi_sq,phi_lb"


def preset_params(scenario: str, n: int, p: float | None = None,
                  q: float | None = None) -> ModelParams:
    """(p, q) for a named regime preset at finite n; custom passes through."""
    if scenario == "custom":
        if p is None or q is None:
            raise ParameterError("custom scenario needs explicit --p and --q")
        return ModelParams(n, p, q)
    if p is not None or q is not None:
        raise ParameterError(f"scenario {scenario!r} derives p, q; do not pass them")
    ln_n = math.log(n)
    if scenario == "fast_dense":
        return ModelParams(n, 0.1, 0.5)
    if scenario == "fast_sparse":
        return ModelParams(n, 1.0 / n, 0.5)
    if scenario == "fast_semisparse":
        pt = 3.0 * ln_n / n
        qq = 0.5
        return ModelParams(n, qq * pt / (1.0 - pt), qq)
    if scenario == "slow_dense":
        pt = 0.5
        d = (n - 1) * pt
        qq = ln_n / (d * n)
        return ModelParams(n, qq * pt / (1.0 - pt), qq)
    if scenario == "slow_sparse":
        return ModelParams(n, 1.0 / (n * n), 1.0 / n)
    if scenario == "slow_semisparse":
        pt = 2.0 * ln_n / n
        qq = 2.0 / (n - 1)
        return ModelParams(n, qq * pt / (1.0 - pt), qq)
    raise ParameterError(f"unknown scenario {scenario!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "custom"
    n: int = 64
    p: float | None = None
    q: float | None = None
    horizon: int = 100
    trials: int = 5
    eps: float = 0.05
    window: int | None = None
    seed: int = 0
    starts: str = "all"          # "all" or comma-separated vertex list
    out: str = "out"
    formats: tuple[str, ...] = ("csv", "json")
    spectral: bool = False
    dump_every: int | None = None
    confidence: float = 0.9

    def params(self) -> ModelParams:
        return preset_params(self.scenario, self.n, self.p, self.q)

    def starts_spec(self) -> tuple[int, ...] | str:
        if self.starts == "all":
            return "all"
        return tuple(int(x) for x in self.starts.split(","))


@dataclass
class RunRecord:
    config: dict
    series: list[dict]           # one entry per trial: {"trial", "rows"}
    trial_summaries: list[dict]
    summary: dict
    version: str
    convention: str
    wall_time: float


def _fmt(x: float) -> str:
    """Shortest round-trip decimal; explicit sentinels for non-finite values."""
    if math.isnan(x):
        return "na"
    if math.isinf(x):
        return "inf"
    return repr(float(x))


def _series_rows(cfg: ScenarioConfig, traj: Trajectory, starts: np.ndarray
                 ) -> tuple[list[tuple], int | None]:
    """Full-horizon per-step series for one trajectory plus its t_mix."""
    n = traj.params.n
    M = np.zeros((starts.size, n), dtype=np.float64)
    M[np.arange(starts.size), starts] = 1.0
    window = MixingConfig(eps=cfg.eps, window=cfg.window,
                          horizon=max(cfg.horizon, cfg.window or 1)).resolved_window(n)
    rows = []
    tv_series = np.empty(cfg.horizon + 1, dtype=np.float64)
    g = traj.snapshot(0)
    pi = stationary_dist(g).values
    tv_series[0] = tv_batch(M, pi).max()
    phi = cheeger_lower_bound(g) if cfg.spectral else math.nan
    rows.append((0, g.edge_count, 0, tv_series[0],
                 float(l2pi_sq_batch(M, pi).max()), phi))
    for t in range(1, cfg.horizon + 1):
        g = traj.snapshot(t)
        M = step_batch(M, g, WalkKind.LAZY)
        pi = stationary_dist(g).values
        tv_series[t] = tv_batch(M, pi).max()
        phi = cheeger_lower_bound(g) if cfg.spectral else math.nan
        rows.append((t, g.edge_count, traj.changes(t), tv_series[t],
                     float(l2pi_sq_batch(M, pi).max()), phi))
    t_mix = _window_t_mix(tv_series, cfg.eps, window) if cfg.horizon >= window else None
    return rows, t_mix


def _config_echo(cfg: ScenarioConfig, params: ModelParams) -> dict:
    if params.p + params.q > 0:
        d, delta, label = regime_metrics(params)
        derived = {"p_tilde": params.p_tilde, "d": d, "delta": delta,
                   "regime": {"density": label.density.value, "churn": label.churn.value}}
    else:
        derived = {"p_tilde": "na", "d": "na", "delta": "na", "regime": "na"}
    return {
        "scenario": cfg.scenario,
        "n": cfg.n,
        "p": params.p,
        "q": params.q,
        **derived,
        "horizon": cfg.horizon,
        "trials": cfg.trials,
        "eps": cfg.eps,
        "window": cfg.window,
        "starts": cfg.starts,
        "seed": cfg.seed,
        "spectral": cfg.spectral,
        "dump_every": cfg.dump_every,
        "confidence": cfg.confidence,
    }


def run_scenario(cfg: ScenarioConfig, initial: GraphState | None = None) -> RunRecord:
    """Execute a scenario end to end and write the configured output files.

    The mixed/not-mixed verdict is data, not an error; the call succeeds
    either way. Trajectories start from ER(p_tilde) samples unless an
    explicit initial graph is given (required when p = q = 0, where the
    stationary start is undefined).
    """
    t0 = time.monotonic()
    params = cfg.params()
    if initial is None and params.p + params.q == 0.0:
        raise ParameterError("p = q = 0 has no stationary start; an explicit "
                             "initial graph is required")
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_echo = _config_echo(cfg, params)

    series_records = []
    trial_summaries = []
    t_values: list[int | None] = []
    for trial in range(cfg.trials):
        traj = Trajectory(params, substream(cfg.seed, trial), initial=initial)
        starts, mode = resolve_starts(params.n, cfg.starts_spec(),
                                      traj.substream(0x57A7))
        rows, t_mix = _series_rows(cfg, traj, starts)
        t_values.append(t_mix)
        series_records.append({"trial": trial, "rows": rows})
        trial_summaries.append({
            "trial": trial,
            "t_mix": t_mix if t_mix is not None else "na",
            "starts_mode": mode,
            "final_tv_max": rows[-1][3],
        })
        if cfg.dump_every:
            for t in range(0, cfg.horizon + 1, cfg.dump_every):
                path = out_dir / f"snap_trial{trial:03d}_t{t:06d}.txt"
                write_snapshot(traj.snapshot(t), path, t=t, seed=cfg.seed)
        if "csv" in cfg.formats:
            path = out_dir / f"trial{trial:03d}.csv"
            with open(path, "w") as fh:
                fh.write(CSV_HEADER + "\n")
                for row in rows:
                    t, edges, changes, tv, l2, phi = row
                    fh.write(f"{t},{edges},{changes},{_fmt(tv)},{_fmt(l2)},{_fmt(phi)}\n")

    finite = sorted(t for t in t_values if t is not None)
    need = math.ceil(cfg.confidence * cfg.trials)
    t_mix_model = finite[need - 1] if len(finite) >= need else None
    mixed_fraction = len(finite) / cfg.trials

    summary = {
        "config": config_echo,
        "t_mix": t_mix_model if t_mix_model is not None else "na",
        "mixed_fraction": mixed_fraction,
        "seeds": {"master": cfg.seed, "trial_keys": list(range(cfg.trials))},
        "convention": STEP_CONVENTION,
    }
    if "json" in cfg.formats:
        with open(out_dir / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if "ndjson" in cfg.formats:
        with open(out_dir / "trials.ndjson", "w") as fh:
            for rec in trial_summaries:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    wall = time.monotonic() - t0
    print(f"[emwalk] scenario={cfg.scenario} n={cfg.n} trials={cfg.trials} "
          f"t_mix={summary['t_mix']} mixed_fraction={mixed_fraction:.2f} "
          f"wall={wall:.2f}s", file=sys.stderr)
    return RunRecord(config_echo, series_records, trial_summaries, summary,
                     __version__, STEP_CONVENTION, wall)


def dump_trajectory(cfg: ScenarioConfig, t_list: list[int],
                    initial: GraphState | None = None) -> list[Path]:
    """Write edge-list snapshots of the trial-0 trajectory at the given steps."""
    params = cfg.params()
    if initial is None and params.p + params.q == 0.0:
        raise ParameterError("p = q = 0 has no stationary start; an explicit "
                             "initial graph is required")
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    traj = Trajectory(params, substream(cfg.seed, 0), initial=initial)
    paths = []
    for t in sorted(set(int(t) for t in t_list)):
        if t < 0:
            raise ParameterError("snapshot steps must be >= 0")
        path = out_dir / f"snapshot_t{t:06d}.txt"
        write_snapshot(traj.snapshot(t), path, t=t, seed=cfg.seed)
        paths.append(path)
    return paths


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--scenario", choices=SCENARIOS, default="custom")
    sub.add_argument("--n", type=int, default=64)
    sub.add_argument("--p", type=float, default=None)
    sub.add_argument("--q", type=float, default=None)
    sub.add_argument("--horizon", type=int, default=100)
    sub.add_argument("--trials", type=int, default=5)
    sub.add_argument("--eps", type=float, default=0.05)
    sub.add_argument("--window", type=int, default=None)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--starts", default="all",
                     help='"all" or comma-separated vertex list')
    sub.add_argument("--out", default="out")
    sub.add_argument("--format", default="csv,json",
                     help="comma subset of csv,json,ndjson")
    sub.add_argument("--spectral", action="store_true",
                     help="record the per-step Cheeger lower bound")
    sub.add_argument("--dump-every", type=int, default=None)


def _config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    formats = tuple(x for x in args.format.split(",") if x)
    bad = set(formats) - {"csv", "json", "ndjson"}
    if bad:
        raise ParameterError(f"unknown output formats: {sorted(bad)}")
    return ScenarioConfig(
        scenario=args.scenario, n=args.n, p=args.p, q=args.q,
        horizon=args.horizon, trials=args.trials, eps=args.eps,
        window=args.window, seed=args.seed, starts=args.starts,
        out=args.out, formats=formats, spectral=args.spectral,
        dump_every=args.dump_every,
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="emwalk",
        description="Random-walk experiments on edge-Markovian dynamic graphs")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a scenario and write series/summary files")
    _add_common(run_p)
    dump_p = sub.add_parser("dump", help="write edge-list snapshots of a trajectory")
    _add_common(dump_p)
    dump_p.add_argument("--t-list", default="0",
                        help="comma-separated snapshot steps")
    load_p = sub.add_parser("load", help="validate and describe an edge-list snapshot")
    load_p.add_argument("file")
    args = parser.parse_args(argv)
    try:
        if args.command == "load":
            g, t, seed = read_snapshot(args.file)
            print(f"n={g.n} m={g.edge_count} t={t} seed={seed}")
            return 0
        cfg = _config_from_args(args)
        if args.command == "run":
            run_scenario(cfg)
        else:
            paths = dump_trajectory(cfg, [int(x) for x in args.t_list.split(",")])
            for p in paths:
                print(p)
    except (ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
