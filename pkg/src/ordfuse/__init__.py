"""Cooperative spectrum sensing with magnitude-ordered sequential LLR fusion."""

__version__ = "0.1.0"

from .bs_thresholds import (
    DecisionOutcome,
    map_block_decision,
    run_detector,
    run_detector_generalized,
    thresholds_at_stage,
)
from .dp_policy import (
    Action,
    CostMode,
    CostModel,
    PolicyTable,
    concavity_check,
    decision_cost,
    posterior_update,
    posterior_update_exact,
    run_policy,
    solve_backward,
    solve_one_threshold,
)
from .fading_link import (
    FadingConfig,
    effective_config,
    gain_threshold,
    participation_pmf,
    participation_prob,
    sample_participants,
)
from .fusion_sim import (
    SimMetrics,
    compare_with_block_oracle,
    make_detector,
    run_monte_carlo,
    run_monte_carlo_fading,
    sweep,
)
from .llr_distributions import (
    LlrLaw,
    central_mass,
    correction_extrema,
    correction_term,
    exceed_prob,
    law_for_sensor,
    llr_cdf,
    llr_pdf,
    log_density_ratio,
    staged_correction,
)
from .order_stats import (
    SensorEnsemble,
    conditional_pdf,
    joint_consecutive_pdf,
    joint_topk_pdf,
    ranked_pdf,
    subset_weight_sum,
)
from .sensing_model import (
    Hypothesis,
    MeasurementModel,
    ScenarioConfig,
    SlotRealization,
    draw_slot,
    llr_from_samples,
    rank_by_magnitude,
)
