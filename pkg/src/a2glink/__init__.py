"""Link-level OFDM simulator with adaptive pilot patterns for UAV A2G channels."""

__version__ = "0.1.0"

from .channel import (
    ChannelParams,
    ChannelRealization,
    LinkCondition,
    PathLossParams,
    apply_channel,
    generate_channel,
    ici_power,
    jakes_correlation,
    path_loss_db,
    pdp_frequency_correlation,
)
from .codebook import Codebook, build_default_codebook, match
from .estimator import (
    CachedMseProvider,
    ChannelEstimate,
    CorrelationProfile,
    empirical_mse,
    estimate_correlations,
    interpolate_2d,
    ls_at_pilots,
)
from .grid import (
    GridDims,
    PilotConfig,
    PowerAllocation,
    ResourceGrid,
    build_grid,
    pilot_positions,
    power_allocation,
    spectrum_utilization,
)
from .link import EpochState, FeedbackMessage, receiver_epoch, transmitter_apply
from .optimizer import (
    FeasibleSets,
    SinrTerms,
    default_feasible_sets,
    feedback_bits_explicit,
    feedback_bits_implicit,
    feedback_rate_explicit,
    feedback_rate_implicit,
    optimize,
    post_eq_sinr,
    rate_objective,
)
from .scenario import (
    RunReport,
    ScenarioStage,
    SimParams,
    default_fixed_configs,
    default_scenario,
    percentile_gains,
    run_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
