"""Bi-static localization with an IRS.

Simulation and estimation for a three-phase protocol: sparse recovery of the
cascaded CIR from OFDM pilots, subspace AOA/range estimation per range
cluster on a virtual multi-symbol channel, and geometric localization.

The usual entry points are `TrialConfig` plus `run_trial`/`run_many`/`sweep`
for programmatic use, and the `irsloc` command line for file-based runs.
"""

from .channel import IrsBsChannel, assign_clusters, irs_bs_channel, tap_index
from .estimation import CirEstimate, GroupLassoConfig, group_lasso
from .geometry import (
    C0,
    FIELD_FAR,
    FIELD_NEAR,
    Scene,
    TargetTruth,
    UlaGeometry,
)
from .harness import (
    EventCounts,
    MetricsReport,
    RunOutcome,
    TrialConfig,
    TrialResult,
    aggregate,
    classify_events,
    run_many,
    run_trial,
    sample_scene,
    somp_baseline,
    sweep,
)
from .localize import (
    FarSolveConfig,
    NearSolveConfig,
    TargetEstimate,
    localize_far,
    localize_near,
)
from .ofdm import OfdmConfig, delay_manifold, generate_pilots, simulate_freq_rx
from .subspace import (
    IrsSchedule,
    SearchRegion,
    SpectrumGrid,
    VirtualManifold,
    build_grids,
    build_virtual,
    design_irs_schedule,
    detect_clusters,
    estimate_target_count,
    music_spectrum_far,
    music_spectrum_near,
    select_peaks,
)

__version__ = "0.1.0"

__all__ = [
    "C0",
    "FIELD_FAR",
    "FIELD_NEAR",
    "CirEstimate",
    "EventCounts",
    "FarSolveConfig",
    "GroupLassoConfig",
    "IrsBsChannel",
    "IrsSchedule",
    "MetricsReport",
    "NearSolveConfig",
    "OfdmConfig",
    "RunOutcome",
    "Scene",
    "SearchRegion",
    "SpectrumGrid",
    "TargetEstimate",
    "TargetTruth",
    "TrialConfig",
    "TrialResult",
    "UlaGeometry",
    "VirtualManifold",
    "aggregate",
    "assign_clusters",
    "build_grids",
    "build_virtual",
    "classify_events",
    "delay_manifold",
    "design_irs_schedule",
    "detect_clusters",
    "estimate_target_count",
    "generate_pilots",
    "group_lasso",
    "irs_bs_channel",
    "localize_far",
    "localize_near",
    "music_spectrum_far",
    "music_spectrum_near",
    "run_many",
    "run_trial",
    "sample_scene",
    "select_peaks",
    "simulate_freq_rx",
    "somp_baseline",
    "sweep",
    "tap_index",
    "__version__",
]
