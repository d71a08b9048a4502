"""End-to-end verification suite.

Each test implements one numbered criterion at its stated tolerance and
prints a single PASS/FAIL line (run with ``pytest -s`` to see them live).
Monte Carlo criteria are fully seeded and deterministic.
"""

import math
from pathlib import Path

import numpy as np

from emwalk.cli import ScenarioConfig, preset_params, run_scenario
from emwalk.conductance import (
    BDChain,
    bd_hitting_time,
    bd_simulate_occupancy,
    bd_stationary,
    check_thm3_assumptions,
    conductance_all_subsets,
    conductance_exact,
    enumerate_connected_sets,
    phi_preservation_experiment,
)
from emwalk.graphs import (
    GraphState,
    ModelParams,
    Trajectory,
    complete_graph,
    cycle_graph,
    disjoint_union,
    graph_chain_mixing_time,
    is_connected,
    path_graph,
    sample_er,
    slot_chain_tv,
    star_graph,
)
from emwalk.mixing import MixingConfig, coarse_mixing_stat, dynamic_mixing_time, nonmixing_witness
from emwalk.rng import substream
from emwalk.spectral import check_cheeger, check_contraction, cheeger_lower_bound
from emwalk.walks import Distribution, propagate_batch, stationary_dist, tv_batch

MASTER = 20250808


def _verdict(num: int, desc: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" | {detail}" if detail else ""
    print(f"[ACCEPTANCE {num:02d}] {status} {desc}{suffix}")
    assert ok, f"criterion {num} failed: {desc}{suffix}"


# ---------------------------------------------------------------------------

def test_acceptance_01_graph_chain_contraction():
    rng = np.random.default_rng(MASTER + 1)
    worst = 0.0
    for _ in range(1000):
        p = float(rng.uniform(0.01, 0.99))
        q = float(rng.uniform(0.01, 0.99))
        t = int(rng.integers(0, 61))
        start_open = bool(rng.integers(2))
        # independent oracle: iterate the 2x2 chain directly
        P = np.array([[1 - p, p], [q, 1 - q]])
        mu = np.array([0.0, 1.0]) if start_open else np.array([1.0, 0.0])
        for _ in range(t):
            mu = mu @ P
        pi = np.array([q / (p + q), p / (p + q)])
        tv_oracle = 0.5 * np.abs(mu - pi).sum()
        worst = max(worst, abs(tv_oracle - slot_chain_tv(p, q, t, start_open)))
    one_step = all(graph_chain_mixing_time(32, p, 1.0 - p, eps=0.05) == 1
                   for p in (0.1, 0.5, 0.73))
    _verdict(1, "per-slot chain TV contracts exactly by |1-p-q| per step",
             worst <= 1e-12 and one_step, f"max |error| = {worst:.2e}")


def _structured_graphs():
    graphs = []
    graphs += [path_graph(n) for n in range(2, 12)]                    # 10
    graphs += [cycle_graph(n) for n in range(3, 13)]                   # 10
    graphs += [complete_graph(n) for n in range(2, 12)]                # 10
    pairs = [(complete_graph(2), complete_graph(2)),
             (complete_graph(3), complete_graph(3)),
             (complete_graph(3), complete_graph(4)),
             (path_graph(4), path_graph(4)),
             (cycle_graph(4), cycle_graph(4)),
             (complete_graph(5), complete_graph(5)),
             (path_graph(3), cycle_graph(3)),
             (complete_graph(2), complete_graph(5)),
             (cycle_graph(6), complete_graph(3)),
             (path_graph(5), complete_graph(4))]
    graphs += [disjoint_union(a, b) for a, b in pairs]                 # 10
    withiso = [complete_graph(4), complete_graph(6), path_graph(5),
               cycle_graph(5), complete_graph(2)]
    graphs += [disjoint_union(g, GraphState.empty(1)) for g in withiso]  # 5
    graphs += [star_graph(n) for n in range(3, 8)]                     # 5
    assert len(graphs) == 50
    return graphs


def test_acceptance_02_cheeger_suite():
    failures = []
    for seed in range(200):
        g = sample_er(12, 0.5, substream(MASTER + 2, seed))
        phi, lam2, holds = check_cheeger(g)
        if not holds:
            failures.append(("er", seed, phi, lam2))
    for i, g in enumerate(_structured_graphs()):
        phi, lam2, holds = check_cheeger(g)
        if not holds:
            failures.append(("structured", i, phi, lam2))
    _verdict(2, "Cheeger inequality on 200 ER(12, 1/2) + 50 structured graphs",
             not failures, f"violations: {failures[:3]}")


def test_acceptance_03_spectral_contraction():
    rng = np.random.default_rng(MASTER + 3)
    bad = 0
    for _ in range(1000):
        n = int(rng.integers(3, 17))
        g = sample_er(n, 0.5, int(rng.integers(2**63)))
        while not is_connected(g):
            g = sample_er(n, 0.5, int(rng.integers(2**63)))
        v = rng.random(n) + 1e-9
        f = Distribution.from_values(v / v.sum())
        lhs, rhs, holds = check_contraction(f, g)
        bad += not holds
    _verdict(3, "one-step l2(pi) contraction on 1000 random (f, connected G)",
             bad == 0, f"violations: {bad}")


def test_acceptance_04_connected_set_lemmas():
    rng = np.random.default_rng(MASTER + 4)
    mismatches, bound_violations = 0, 0
    for _ in range(100):
        n = int(rng.integers(4, 13))
        g = sample_er(n, float(rng.uniform(0.15, 0.7)), int(rng.integers(2**63)))
        phi_conn, _ = conductance_exact(g)
        phi_all, _ = conductance_all_subsets(g)
        if abs(phi_conn - phi_all) > 1e-12:
            mismatches += 1
        delta = int(g.degrees.max())
        for k in range(1, 7):
            count = sum(1 for _ in enumerate_connected_sets(g, k))
            bound = g.n * delta ** (2 * k - 2)
            if count > bound:
                bound_violations += 1
    _verdict(4, "connected-set-restricted phi = all-subset phi; counts within n*Delta^(2k-2)",
             mismatches == 0 and bound_violations == 0,
             f"phi mismatches: {mismatches}, count violations: {bound_violations}")


def test_acceptance_05_birth_death_chain():
    rng = np.random.default_rng(MASTER + 5)
    # detailed balance, exactly
    db_worst = 0.0
    for _ in range(20):
        m = int(rng.integers(2, 16))
        b = rng.uniform(0.05, 0.45, m + 1)
        d = rng.uniform(0.05, 0.45, m + 1)
        b[m] = 0.0
        d[0] = 0.0
        chain = BDChain(b, d)
        pi = bd_stationary(chain).values
        db_worst = max(db_worst, float(np.abs(pi[:-1] * chain.b[:-1]
                                              - pi[1:] * chain.d[1:]).max()))
    # occupancy of a long simulation against the product-form stationary law
    chain = BDChain.constant(8, 0.3, 0.2)
    counts = bd_simulate_occupancy(chain, 1_000_000, start=0, seed=MASTER + 5)
    occupancy_tv = 0.5 * float(np.abs(counts / counts.sum()
                                      - bd_stationary(chain).values).sum())
    # Monte Carlo hitting times against the tridiagonal solve
    mc_ok = True
    gam = bd_hitting_time(BDChain.constant(10, 0.5, 0.5, absorbing=(0, 10)),
                          5, (0, 10), trials=10_000, seed=MASTER + 5)
    mc_ok &= gam.mean_exact == 25.0 or abs(gam.mean_exact - 25.0) < 1e-9
    mc_ok &= abs(gam.mean_mc - gam.mean_exact) <= 3 * gam.stderr_mc
    for i in range(4):
        m = int(rng.integers(5, 21))
        b = rng.uniform(0.1, 0.4, m + 1)
        d = rng.uniform(0.1, 0.4, m + 1)
        b[m] = 0.0
        d[0] = 0.0
        chain_i = BDChain(b, d)
        a = int(rng.integers(1, m + 1))
        ht = bd_hitting_time(chain_i, a, 0, trials=10_000, seed=MASTER + 50 + i)
        # a near-total hit rate keeps horizon-truncation bias well under a
        # standard error; the criterion itself is the 3-sigma mean agreement
        mc_ok &= ht.hit_fraction >= 0.999
        mc_ok &= abs(ht.mean_mc - ht.mean_exact) <= 3 * ht.stderr_mc
    _verdict(5, "birth-death chain: detailed balance, occupancy, hitting times",
             db_worst <= 1e-12 and occupancy_tv <= 0.01 and mc_ok,
             f"balance err {db_worst:.1e}, occupancy TV {occupancy_tv:.4f}")


def test_acceptance_06_fast_dense_mixing():
    n = 256
    params = ModelParams(n, 0.1, 0.5)
    bound = 3 * math.log2(n)                  # 24
    cfg = MixingConfig(eps=0.05, window=16, horizon=40, starts="all")
    mixed = 0
    window_ok = True
    for trial in range(20):
        traj = Trajectory(params, substream(MASTER + 6, trial))
        report = dynamic_mixing_time(traj, cfg)
        if report.t_mix is not None and report.t_mix <= bound:
            mixed += 1
            window_vals = report.tv_max[report.t_mix:report.t_mix + cfg.window + 1]
            window_ok &= bool(np.all(window_vals <= 0.1))
    _verdict(6, "fast dense: t_mix <= 3 log2 n with TV <= 0.1 through the window",
             mixed >= 18 and window_ok, f"mixed {mixed}/20 within {bound:.0f} steps")


def test_acceptance_07_fast_sparse_non_mixing():
    n = 500
    params = ModelParams(n, 1.0 / n, 0.5)
    cfg = MixingConfig(eps=0.05, horizon=150, starts="all", window=1)
    fracs = []
    for trial in range(20):
        traj = Trajectory(params, substream(MASTER + 7, trial))
        report = nonmixing_witness(traj, cfg, floor=0.05, probe_range=(50, 150))
        fracs.append(report.frac_above_floor)
    pooled = float(np.mean(fracs))
    _verdict(7, "fast sparse: worst-start TV >= 0.05 on >= 90% of steps in [50,150]",
             pooled >= 0.9, f"pooled fraction {pooled:.3f}")


def test_acceptance_08_coarse_mixing():
    n = 512
    params = preset_params("fast_semisparse", n)
    lo = int(10 * math.log2(n))               # 90
    hi = lo + math.ceil(math.sqrt(n))         # 113
    good = 0
    worst = 0.0
    for trial in range(20):
        traj = Trajectory(params, substream(MASTER + 8, trial))
        series = coarse_mixing_stat(traj, (lo, hi), start=0)
        peak = float(series.max())
        worst = max(worst, peak)
        good += peak <= 50.0
    _verdict(8, "fast semi-sparse: l2(pi)^2 <= 50 throughout [10 log2 n, +sqrt(n)]",
             good >= 18, f"runs within bound: {good}/20, worst peak {worst:.2f}")


def test_acceptance_09_slow_sparse_lower_bound():
    n = 500
    params = ModelParams(n, 1.0 / n**2, 1.0 / n)
    horizon = n // 10
    stuck = 0
    for trial in range(100):
        traj = Trajectory(params, substream(MASTER + 9, trial))
        iso = np.flatnonzero(traj.g0.degrees == 0)
        if iso.size == 0:
            continue
        start = int(iso[0])
        M = np.zeros((1, n))
        M[0, start] = 1.0
        tv_min = [math.inf]

        def probe(t, Mt, g):
            tv_min[0] = min(tv_min[0], float(tv_batch(Mt, stationary_dist(g).values)[0]))

        propagate_batch(M, traj, horizon, probe=probe)
        if tv_min[0] >= 1.0 - 1e-9:
            stuck += 1
    _verdict(9, "slow sparse: isolated start keeps TV = 1 for all t <= n/10",
             stuck >= 50, f"stuck runs: {stuck}/100")


def test_acceptance_10_slow_dense_conductance_preservation():
    n = 12
    params = preset_params("slow_dense", n)
    t_max = math.ceil(n * params.d * math.log(n))
    preserved = 0
    for trial in range(100):
        traj = Trajectory(params, substream(MASTER + 10, trial))
        series = phi_preservation_experiment(traj, t_max, mode="exact")
        if series.min() >= series[0] / 4.0:
            preserved += 1
    _verdict(10, "slow dense (exact n=12): min_t phi(G_t) >= phi(G_0)/4",
             preserved >= 95, f"preserved {preserved}/100 over t <= {t_max}")


def test_acceptance_11_slow_dense_mixing():
    n = 200
    params = preset_params("slow_dense", n)
    window = math.ceil(math.sqrt(n))
    mixed = 0
    used = 0
    trial = 0
    while used < 20 and trial < 40:
        traj = Trajectory(params, substream(MASTER + 11, trial))
        trial += 1
        if not check_thm3_assumptions(traj.g0, params.d, seed=trial).passed:
            continue
        used += 1
        phi_lb = cheeger_lower_bound(traj.g0)
        bound = 10 * math.log2(n) / phi_lb**2
        horizon = math.ceil(bound) + window + 1
        cfg = MixingConfig(eps=0.05, window=window, horizon=horizon, starts="all")
        report = dynamic_mixing_time(traj, cfg)
        if report.t_mix is not None and report.t_mix <= bound:
            mixed += 1
    _verdict(11, "slow dense: dynamic t_mix <= 10 log2 n / phi_lb^2 on assumption-passing starts",
             used == 20 and mixed >= 18, f"mixed {mixed}/{used}")


def test_acceptance_12_determinism(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        cfg = ScenarioConfig(scenario="fast_dense", n=32, horizon=20, trials=2,
                             eps=0.05, window=4, seed=MASTER + 12, out=str(out),
                             formats=("csv", "json", "ndjson"), spectral=True)
        run_scenario(cfg)
        outs.append({p.name: p.read_bytes() for p in sorted(Path(out).iterdir())})
    _verdict(12, "byte-identical CSV/JSON/NDJSON under identical config and seed",
             outs[0] == outs[1], f"files: {sorted(outs[0])}")
