"""Random walks on edge-Markovian dynamic random graphs.

Simulation of the G(n, p, q) edge process, exact walk-distribution
propagation, spectra and conductance of snapshots, mixing-time estimators
for the six density/churn regimes, and a reproducible CLI harness. Hot
kernels run through a compiled core when available and a numpy/scipy
fallback otherwise (see emwalk.kernels.backend()).
"""

__version__ = "0.1.0"

from .errors import DimensionError, DomainError, ParameterError
from .graphs import (
    GraphState,
    ModelParams,
    RegimeLabel,
    Trajectory,
    evolve_step,
    graph_chain_mixing_time,
    regime_metrics,
    sample_er,
    stationary_edge_prob,
)
from .walks import Distribution, WalkKind, l2pi_distance, propagate, stationary_dist, step, tv_distance
from .spectral import SpectralSummary, check_cheeger, check_contraction, spectrum
from .conductance import (
    BDChain,
    CutStats,
    bd_hitting_time,
    bd_stationary,
    check_thm3_assumptions,
    conductance_exact,
    cut_stats,
    enumerate_connected_sets,
    phi_preservation_experiment,
    track_cut_trajectory,
)
from .mixing import (
    MixingConfig,
    MixingReport,
    coarse_mixing_stat,
    dynamic_mixing_time,
    model_mixing_time,
    nonmixing_witness,
    static_mixing_time,
)

__all__ = [
    "__version__",
    "DimensionError", "DomainError", "ParameterError",
    "GraphState", "ModelParams", "RegimeLabel", "Trajectory",
    "evolve_step", "graph_chain_mixing_time", "regime_metrics",
    "sample_er", "stationary_edge_prob",
    "Distribution", "WalkKind", "l2pi_distance", "propagate",
    "stationary_dist", "step", "tv_distance",
    "SpectralSummary", "check_cheeger", "check_contraction", "spectrum",
    "BDChain", "CutStats", "bd_hitting_time", "bd_stationary",
    "check_thm3_assumptions", "conductance_exact", "cut_stats",
    "enumerate_connected_sets", "phi_preservation_experiment",
    "track_cut_trajectory",
    "MixingConfig", "MixingReport", "coarse_mixing_stat",
    "dynamic_mixing_time", "model_mixing_time", "nonmixing_witness",
    "static_mixing_time",
]
