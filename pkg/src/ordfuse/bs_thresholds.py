"""Sequential fusion detector over magnitude-ordered LLR reports.

The running sum of reported LLRs is compared per stage against data-dependent
thresholds built from the report's magnitude and the extrema of the
correction term for never-reporting sensors. The detector's declared
hypothesis matches the one-shot MAP rule on the top-K reports, realization by
realization, which the tests assert exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .llr_distributions import (
    LlrLaw,
    correction_extrema,
    correction_term,
    envelope_for,
    log_density_ratio,
)
from .sensing_model import Hypothesis, ScenarioConfig


@dataclass(frozen=True)
class DecisionOutcome:
    declared: Hypothesis
    stage: int
    sensing_time: float


def _ordered_values(ordered) -> np.ndarray:
    """Accepts plain LLR values or (sensor, llr) pairs."""
    seq = list(ordered)
    if seq and isinstance(seq[0], (tuple, list)):
        seq = [v for _, v in seq]
    return np.asarray(seq, dtype=float)


def thresholds_at_stage(
    k: int, y_k: float, config: ScenarioConfig, law: LlrLaw
) -> tuple[float, float]:
    """(t_low, t_high) for the running LLR sum at stage k given |y_k|.

    At the forced stage k == K the two thresholds coincide.
    """
    if not 1 <= k <= config.K:
        raise ValueError("stage k must satisfy 1 <= k <= K")
    logprior = config.log_prior_ratio()
    a = abs(y_k)
    unreported = config.M - config.K
    if k == config.K:
        t = logprior - unreported * correction_term(a, law)
        return t, t
    lo_corr, hi_corr = correction_extrema(a, law)
    span = (config.K - k) * a
    t_low = logprior - span - unreported * hi_corr
    t_high = logprior + span - unreported * lo_corr
    return t_low, t_high


def _stage_extrema(absy: np.ndarray, law: LlrLaw):
    """Running correction-term extrema per (slot, stage).

    Combines the precomputed envelope with this slot's own later report
    magnitudes so the stage-k extremum always dominates every later query
    point of the same slot, keeping the sequential and block rules aligned.
    """
    env = envelope_for(law)
    env_min, env_max = env.extrema(absy)
    point = np.asarray(correction_term(absy, law), dtype=float)
    suf_min = np.minimum.accumulate(point[:, ::-1], axis=1)[:, ::-1]
    suf_max = np.maximum.accumulate(point[:, ::-1], axis=1)[:, ::-1]
    return np.minimum(env_min, suf_min), np.maximum(env_max, suf_max), point


def decide_batch(
    ordered_values: np.ndarray,
    config: ScenarioConfig,
    law: LlrLaw,
    generalized: bool = False,
):
    """Vectorized sequential decisions.

    ordered_values: (n_slots, >=K) LLRs sorted by descending magnitude.
    Returns (declared, stage) with declared in {0, 1} and stage in 1..K.
    """
    k_max, m_total = config.K, config.M
    y = np.asarray(ordered_values, dtype=float)
    if y.ndim != 2 or y.shape[1] < k_max:
        raise ValueError(f"need at least K={k_max} ordered values per slot")
    y = y[:, :k_max]
    absy = np.abs(y)
    running = np.cumsum(y, axis=1)
    logprior = config.log_prior_ratio()
    unreported = m_total - k_max

    rho_min, rho_max, rho_point = _stage_extrema(absy, law)
    stages = np.arange(1, k_max)
    span_coeff = (k_max - stages)[None, :]
    if generalized:
        # valid for the supported families, whose log density ratio is
        # monotone increasing: its extrema over [-a, a] sit at the endpoints
        ratio_lo = np.asarray(log_density_ratio(-absy[:, : k_max - 1], law), dtype=float)
        ratio_hi = np.asarray(log_density_ratio(absy[:, : k_max - 1], law), dtype=float)
        t_low = logprior - span_coeff * ratio_hi - unreported * rho_max[:, : k_max - 1]
        t_high = logprior - span_coeff * ratio_lo - unreported * rho_min[:, : k_max - 1]
    else:
        span = span_coeff * absy[:, : k_max - 1]
        t_low = logprior - span - unreported * rho_max[:, : k_max - 1]
        t_high = logprior + span - unreported * rho_min[:, : k_max - 1]

    early = running[:, : k_max - 1]
    low_hit = early < t_low
    high_hit = early > t_high
    final_h1 = running[:, k_max - 1] + unreported * rho_point[:, k_max - 1] >= logprior

    stop = np.concatenate(
        [low_hit | high_hit, np.ones((y.shape[0], 1), dtype=bool)], axis=1
    )
    first = np.argmax(stop, axis=1)
    rows = np.arange(y.shape[0])
    at_final = first == k_max - 1
    declared = np.where(
        at_final,
        final_h1,
        high_hit[rows, np.minimum(first, k_max - 2)] if k_max > 1 else False,
    ).astype(np.int8)
    return declared, (first + 1).astype(np.int64)


def map_block_batch(ordered_values: np.ndarray, config: ScenarioConfig, law: LlrLaw):
    """Vectorized one-shot MAP decisions on the top-K reports."""
    k_max = config.K
    y = np.asarray(ordered_values, dtype=float)[:, :k_max]
    total = y.sum(axis=1)
    corr = (config.M - k_max) * np.asarray(correction_term(np.abs(y[:, -1]), law), dtype=float)
    return (total + corr >= config.log_prior_ratio()).astype(np.int8)


def run_detector(ordered, config: ScenarioConfig, law: LlrLaw) -> DecisionOutcome:
    """Sequential decision on one slot's ordered LLR list."""
    values = _ordered_values(ordered)
    if values.size < config.K:
        raise ValueError(f"need at least K={config.K} ordered values")
    declared, stage = decide_batch(values[None, :], config, law)
    k = int(stage[0])
    return DecisionOutcome(Hypothesis(int(declared[0])), k, config.sensing_time(k))


def run_detector_generalized(ordered, config: ScenarioConfig, law: LlrLaw) -> DecisionOutcome:
    """Sequential decision with the staged correction in place of the plain
    magnitude bound; handles laws whose observation statistic need not map
    monotonically to the LLR."""
    values = _ordered_values(ordered)
    if values.size < config.K:
        raise ValueError(f"need at least K={config.K} ordered values")
    declared, stage = decide_batch(values[None, :], config, law, generalized=True)
    k = int(stage[0])
    return DecisionOutcome(Hypothesis(int(declared[0])), k, config.sensing_time(k))


def map_block_decision(ordered_topk, config: ScenarioConfig, law: LlrLaw) -> Hypothesis:
    """MAP rule on exactly the K largest-magnitude LLRs."""
    values = _ordered_values(ordered_topk)
    if values.size != config.K:
        raise ValueError(f"block rule needs exactly K={config.K} values")
    declared = map_block_batch(values[None, :], config, law)
    return Hypothesis(int(declared[0]))
