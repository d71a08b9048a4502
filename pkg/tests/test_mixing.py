import numpy as np
import pytest

from emwalk.errors import ParameterError
from emwalk.graphs import (
    GraphState,
    ModelParams,
    Trajectory,
    complete_graph,
    is_connected,
    sample_er,
)
from emwalk.mixing import (
    MixingConfig,
    _window_t_mix,
    coarse_mixing_stat,
    dynamic_mixing_time,
    model_mixing_time,
    nonmixing_witness,
    resolve_starts,
    static_mixing_time,
)
from emwalk.rng import substream
from emwalk.walks import (
    Distribution,
    l2pi_sq_batch,
    propagate,
    stationary_dist,
)


def _connected_er(n, p, seed):
    s = seed
    while True:
        g = sample_er(n, p, s)
        if is_connected(g):
            return g
        s += 1


# ---------------------------------------------------------------------------
# static mixing time

def test_static_k2():
    g = GraphState.from_edges(2, [(0, 1)])
    assert static_mixing_time(g, 0.25) == 1


def test_static_complete_graphs_fast():
    for n in (8, 12, 20):
        assert static_mixing_time(complete_graph(n), 0.25) <= 2


def test_static_eps_monotonicity():
    g = _connected_er(16, 0.3, 5)
    t_loose = static_mixing_time(g, 0.2)
    t_tight = static_mixing_time(g, 0.02)
    assert t_tight >= t_loose


def test_static_disconnected_sentinel():
    g = GraphState.from_edges(4, [(0, 1), (2, 3)])
    assert static_mixing_time(g, 0.25) is None


# ---------------------------------------------------------------------------
# dynamic mixing time

def test_dynamic_static_trajectory_matches_static():
    for seed in range(5):
        g0 = _connected_er(12, 0.4, 100 + seed)
        traj = Trajectory(ModelParams(12, 0.0, 0.0), seed, initial=g0)
        cfg = MixingConfig(eps=0.1, window=1, horizon=300)
        report = dynamic_mixing_time(traj, cfg)
        assert report.t_mix == static_mixing_time(g0, 0.1)


def test_dynamic_isolated_start_never_mixes():
    g0 = GraphState.from_edges(4, [(1, 2), (2, 3)])
    traj = Trajectory(ModelParams(4, 0.0, 0.0), 0, initial=g0)
    cfg = MixingConfig(eps=0.3, window=2, horizon=50, starts=(0,))
    report = dynamic_mixing_time(traj, cfg)
    assert report.t_mix is None
    assert np.all(report.tv_max >= 1 - 1e-12)


def test_dynamic_report_window_consistency():
    params = ModelParams(24, 0.2, 0.3)
    for seed in range(5):
        traj = Trajectory(params, seed)
        cfg = MixingConfig(eps=0.1, window=4, horizon=60)
        report = dynamic_mixing_time(traj, cfg, full_series=True)
        revalidated = _window_t_mix(report.tv_max, cfg.eps, report.window)
        assert report.t_mix == revalidated
        if report.t_mix is not None:
            window_vals = report.tv_max[report.t_mix:report.t_mix + report.window + 1]
            assert np.all(window_vals <= cfg.eps)


def test_dynamic_early_stop_matches_full_series():
    params = ModelParams(24, 0.2, 0.3)
    for seed in range(5):
        cfg = MixingConfig(eps=0.1, window=4, horizon=60)
        fast = dynamic_mixing_time(Trajectory(params, seed), cfg)
        full = dynamic_mixing_time(Trajectory(params, seed), cfg, full_series=True)
        assert fast.t_mix == full.t_mix
        k = fast.tv_max.size
        assert np.allclose(fast.tv_max, full.tv_max[:k])


def test_dynamic_horizon_validation():
    traj = Trajectory(ModelParams(9, 0.1, 0.1), 0)
    with pytest.raises(ParameterError):
        dynamic_mixing_time(traj, MixingConfig(window=10, horizon=5))


def test_resolve_starts_policies():
    arr, mode = resolve_starts(40, "all", substream(0, 1))
    assert mode == "exhaustive" and arr.size == 40
    arr, mode = resolve_starts(500, "all", substream(0, 1))
    assert mode == "sampled" and arr.size == 20 and np.unique(arr).size == 20
    arr, mode = resolve_starts(10, (3, 1), substream(0, 1))
    assert mode == "explicit" and arr.tolist() == [1, 3]
    with pytest.raises(ParameterError):
        resolve_starts(10, (11,), substream(0, 1))


# ---------------------------------------------------------------------------
# model mixing time

def test_model_static_reduces_to_static():
    g0 = _connected_er(10, 0.5, 3)
    params = ModelParams(10, 0.0, 0.0)
    cfg = MixingConfig(eps=0.1, window=1, horizon=200, trials=4, confidence=1.0, seed=5)
    result = model_mixing_time(params, cfg, initial=g0)
    assert result.fraction_mixed == 1.0
    assert result.t_mix == static_mixing_time(g0, 0.1)
    assert all(t == result.t_mix for t in result.trial_t_mix)


def test_model_confidence_monotonicity():
    params = ModelParams(32, 0.2, 0.4)
    base = dict(eps=0.1, window=3, horizon=80, trials=10, seed=2)
    results = [model_mixing_time(params, MixingConfig(confidence=c, **base)).t_mix
               for c in (0.5, 0.7, 0.9, 1.0)]
    finite = [t for t in results if t is not None]
    assert finite == sorted(finite)
    for a, b in zip(results, results[1:]):
        if a is None:
            assert b is None


def test_model_fast_sparse_never_mixes():
    params = ModelParams(500, 1 / 500, 0.5)
    cfg = MixingConfig(eps=0.05, horizon=1000, trials=3, confidence=1.0, seed=8)
    result = model_mixing_time(params, cfg)
    assert result.t_mix is None
    assert result.fraction_mixed == 0.0


def test_model_reproducible():
    params = ModelParams(24, 0.15, 0.4)
    cfg = MixingConfig(eps=0.1, window=3, horizon=60, trials=6, seed=11)
    r1 = model_mixing_time(params, cfg)
    r2 = model_mixing_time(params, cfg)
    assert r1 == r2


# ---------------------------------------------------------------------------
# coarse mixing statistic

def test_coarse_stat_complete_graph_closed_form():
    # on static K_n the deviation from uniform is a lambda2-eigenvector, so
    # the series is exactly (n-1) * lambda2^(2t) with lambda2 = (n-2)/(2n-2)
    n = 8
    g0 = complete_graph(n)
    traj = Trajectory(ModelParams(n, 0.0, 0.0), 0, initial=g0)
    series = coarse_mixing_stat(traj, (0, 5), start=0)
    lam2 = (n - 2) / (2 * (n - 1))
    expect = [(n - 1) * lam2 ** (2 * t) for t in range(6)]
    assert np.allclose(series, expect, atol=1e-12)


def test_coarse_stat_matches_walk_engine():
    params = ModelParams(16, 0.1, 0.3)
    traj = Trajectory(params, 13)
    series = coarse_mixing_stat(traj, (0, 12), start=4)
    ref = []
    tv_sq = []
    mu = Distribution.point(16, 4)
    pi0 = stationary_dist(traj.snapshot(0)).values
    ref.append(l2pi_sq_batch(mu.values[None, :], pi0)[0])
    tv_sq.append(float(0.5 * np.abs(mu.values - pi0).sum()) ** 2)
    vals, tvs = {}, {}

    def probe(t, m, g):
        pi = stationary_dist(g).values
        vals[t] = l2pi_sq_batch(m.values[None, :], pi)[0]
        tvs[t] = float(0.5 * np.abs(m.values - pi).sum()) ** 2

    propagate(mu, Trajectory(params, 13), 12, probe=probe)
    ref.extend(vals[t] for t in range(1, 13))
    tv_sq.extend(tvs[t] for t in range(1, 13))
    assert np.allclose(series, ref, atol=1e-10)
    # the coarse statistic dominates squared TV at every step
    assert np.all(np.asarray(tv_sq) <= series + 1e-12)


def test_coarse_stat_range_validation():
    traj = Trajectory(ModelParams(8, 0.1, 0.1), 0)
    with pytest.raises(ParameterError):
        coarse_mixing_stat(traj, (5, 2), start=0)
    with pytest.raises(ParameterError):
        coarse_mixing_stat(traj, (0, 2), start=9)


# ---------------------------------------------------------------------------
# non-mixing witness

def test_nonmixing_static_no_rebound():
    g0 = _connected_er(12, 0.4, 9)
    traj = Trajectory(ModelParams(12, 0.0, 0.0), 0, initial=g0)
    cfg = MixingConfig(eps=0.05, window=2, horizon=60)
    report = nonmixing_witness(traj, cfg, floor=0.05)
    assert report.max_rebound <= 1e-9


def test_nonmixing_reports_floor_fraction():
    g0 = GraphState.from_edges(3, [(1, 2)])
    traj = Trajectory(ModelParams(3, 0.0, 0.0), 0, initial=g0)
    cfg = MixingConfig(eps=0.05, window=2, horizon=20, starts=(0,))
    report = nonmixing_witness(traj, cfg, floor=0.5, probe_range=(1, 20))
    assert report.frac_above_floor == 1.0     # isolated start pins TV at 1
    assert report.probe_range == (1, 20)
