"""Monte Carlo engine: run a detector over simulated slots and account for
error rate, probing depth and normalized throughputs.

Chunks use counter-derived child streams of the run seed, so results are
reproducible for a given seed and merge associatively across chunks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bs_thresholds import decide_batch, map_block_batch
from .dp_policy import CostModel, PolicyTable, run_policy_batch, solve_backward, solve_one_threshold
from .fading_link import FadingConfig, effective_config, participation_prob
from .llr_distributions import LlrLaw, law_for_sensor
from .order_stats import SensorEnsemble
from .sensing_model import ScenarioConfig, draw_slots

SIM_CHUNK = 8192  # fixed partition size; results depend only on (config, seed)


@dataclass(frozen=True)
class SimMetrics:
    trials: int
    p_error: float
    avg_stage: float
    norm_throughput_secondary: float
    norm_throughput_primary: float
    stage_histogram: tuple[int, ...]  # index k = slots decided after k reports; 0 = prior-only
    decision_confusion: tuple[tuple[int, int], tuple[int, int]]  # [truth][declared]


@dataclass(frozen=True)
class AgreementReport:
    trials: int
    agreement_fraction: float
    n_disagreements: int
    first_disagreement: dict | None


class SequentialDetector:
    """Running-sum detector with data-dependent thresholds."""

    def __init__(self, config: ScenarioConfig, law: LlrLaw, generalized: bool = False):
        self.config = config
        self.law = law
        self.generalized = generalized

    def decide(self, ordered_values):
        return decide_batch(ordered_values, self.config, self.law, generalized=self.generalized)


class BlockMapDetector:
    """One-shot MAP rule on the top-K reports; always probes K sensors."""

    def __init__(self, config: ScenarioConfig, law: LlrLaw):
        self.config = config
        self.law = law

    def decide(self, ordered_values):
        declared = map_block_batch(ordered_values, self.config, self.law)
        stage = np.full(declared.shape, self.config.K, dtype=np.int64)
        return declared, stage


class PolicyDetector:
    """Executes a solved belief-threshold policy."""

    def __init__(self, policy: PolicyTable, ensemble: SensorEnsemble, pi0: float):
        self.policy = policy
        self.ensemble = ensemble
        self.pi0 = pi0

    def decide(self, ordered_values):
        return run_policy_batch(ordered_values, self.policy, self.ensemble, self.pi0)


class PriorOnlyDetector:
    """Declares the prior MAP hypothesis without probing (ties go to busy)."""

    def __init__(self, pi0: float):
        self.declared = 0 if pi0 > 0.5 else 1

    def decide(self, ordered_values):
        n = np.asarray(ordered_values).shape[0]
        return (
            np.full(n, self.declared, dtype=np.int8),
            np.zeros(n, dtype=np.int64),
        )


DETECTOR_KINDS = ("bs", "bs-generalized", "block-map", "dp", "one-threshold", "prior-only")


def make_detector(
    kind: str,
    config: ScenarioConfig,
    cost_model: CostModel | None = None,
    grid_size: int = 1001,
):
    ensemble = SensorEnsemble.from_config(config)
    if kind in ("bs", "bs-generalized", "block-map"):
        if not ensemble.is_identical:
            raise ValueError(f"detector '{kind}' requires identical sensors")
        law = law_for_sensor(config, 0)
        if kind == "block-map":
            return BlockMapDetector(config, law)
        return SequentialDetector(config, law, generalized=(kind == "bs-generalized"))
    if kind == "dp":
        if cost_model is None:
            raise ValueError("dp detector needs a cost model")
        policy = solve_backward(config, cost_model, ensemble, grid_size)
        return PolicyDetector(policy, ensemble, config.pi0)
    if kind == "one-threshold":
        if cost_model is None:
            raise ValueError("one-threshold detector needs a cost model")
        policy = solve_one_threshold(config, cost_model, ensemble, grid_size)
        return PolicyDetector(policy, ensemble, config.pi0)
    if kind == "prior-only":
        return PriorOnlyDetector(config.pi0)
    raise ValueError(f"unknown detector kind: {kind}")


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _bernoulli(prob: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if prob >= 1.0:
        return np.ones(n, dtype=bool)
    if prob <= 0.0:
        return np.zeros(n, dtype=bool)
    return rng.random(n) < prob


class _Accumulator:
    def __init__(self, k_max: int):
        self.k_max = k_max
        self.trials = 0
        self.wrong = 0
        self.stage_sum = 0
        self.hist = np.zeros(k_max + 1, dtype=np.int64)
        self.confusion = np.zeros((2, 2), dtype=np.int64)
        self.thr_s = 0.0
        self.thr_p = 0.0

    def add(self, truth, declared, stage, config: ScenarioConfig,
            cost_model: CostModel | None, rng: np.random.Generator):
        cm = cost_model if cost_model is not None else CostModel.throughput()
        n = truth.shape[0]
        secondary_tx = declared == 0
        clean_s = secondary_tx & (truth == 0)
        collide_s = secondary_tx & (truth == 1)
        i_s = (clean_s & _bernoulli(cm.eta_s, n, rng)) | (collide_s & _bernoulli(cm.delta_s, n, rng))
        silent_p = (truth == 1) & (declared == 1)
        collide_p = (truth == 1) & (declared == 0)
        i_p = (silent_p & _bernoulli(cm.eta_p, n, rng)) | (collide_p & _bernoulli(cm.delta_p, n, rng))
        time_left = 1.0 - (config.tau_N + stage * config.tau) / config.tau_s
        self.trials += n
        self.wrong += int(np.count_nonzero(truth != declared))
        self.stage_sum += int(stage.sum())
        self.hist += np.bincount(np.minimum(stage, self.k_max), minlength=self.k_max + 1)
        for t in (0, 1):
            for d in (0, 1):
                self.confusion[t, d] += int(np.count_nonzero((truth == t) & (declared == d)))
        self.thr_s += float(np.sum(i_s * cm.R_s * time_left))
        self.thr_p += float(np.sum(i_p * cm.R_p))

    def metrics(self) -> SimMetrics:
        q = self.trials
        return SimMetrics(
            trials=q,
            p_error=self.wrong / q,
            avg_stage=self.stage_sum / q,
            norm_throughput_secondary=self.thr_s / q,
            norm_throughput_primary=self.thr_p / q,
            stage_histogram=tuple(int(v) for v in self.hist),
            decision_confusion=tuple(tuple(int(v) for v in row) for row in self.confusion),
        )


def run_monte_carlo(
    config: ScenarioConfig,
    detector,
    trials: int,
    seed: int | None = None,
    cost_model: CostModel | None = None,
) -> SimMetrics:
    """Simulate `trials` slots through `detector` and aggregate the metrics.

    `cost_model` only feeds the success probabilities and rates of the
    throughput bookkeeping; defaults are deterministic successes.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seed = config.rng_seed if seed is None else seed
    acc = _Accumulator(config.K)
    done = 0
    chunk_idx = 0
    while done < trials:
        n = min(SIM_CHUNK, trials - done)
        rng = _chunk_rng(seed, chunk_idx)
        truth, _, ordered_values, _ = draw_slots(config, rng, n)
        declared, stage = detector.decide(ordered_values)
        acc.add(truth, declared, stage, config, cost_model, rng)
        done += n
        chunk_idx += 1
    return acc.metrics()


def compare_with_block_oracle(
    config: ScenarioConfig,
    trials: int,
    seed: int | None = None,
    generalized: bool = False,
) -> AgreementReport:
    """Per-realization agreement of the sequential detector with the block MAP
    rule on shared slot draws; reports the first disagreement if any."""
    seed = config.rng_seed if seed is None else seed
    law = law_for_sensor(config, 0)
    n_disagree = 0
    first = None
    done = 0
    chunk_idx = 0
    while done < trials:
        n = min(SIM_CHUNK, trials - done)
        rng = _chunk_rng(seed, chunk_idx)
        truth, _, ordered_values, _ = draw_slots(config, rng, n)
        seq_declared, seq_stage = decide_batch(ordered_values, config, law, generalized=generalized)
        blk_declared = map_block_batch(ordered_values, config, law)
        mism = np.flatnonzero(seq_declared != blk_declared)
        if mism.size and first is None:
            i = int(mism[0])
            first = {
                "slot": done + i,
                "truth": int(truth[i]),
                "sequential": int(seq_declared[i]),
                "sequential_stage": int(seq_stage[i]),
                "block": int(blk_declared[i]),
                "top_k": [float(v) for v in ordered_values[i, : config.K]],
            }
        n_disagree += int(mism.size)
        done += n
        chunk_idx += 1
    return AgreementReport(
        trials=trials,
        agreement_fraction=1.0 - n_disagree / trials,
        n_disagreements=n_disagree,
        first_disagreement=first,
    )


SWEEP_AXES = ("M", "K", "c", "sigma2_s", "omega")


def _apply_axis(
    axis: str, value, config: ScenarioConfig, cost_model: CostModel | None
) -> tuple[ScenarioConfig, CostModel | None]:
    if axis == "M":
        m = int(value)
        kwargs = dict(M=m, K=min(config.K, m), sigma2_s=(config.sigma2_s[0],) * m)
        if config.mu0 is not None:
            kwargs["mu0"] = (config.mu0[0],) * m
            kwargs["mu1"] = (config.mu1[0],) * m
        return replace(config, **kwargs), cost_model
    if axis == "K":
        k = int(value)
        tau, tau_n = config.tau, config.tau_N
        if config.tau_s - tau_n - k * tau < 0:
            # keep the sampling window at two mini-slots and refit the slot
            tau = config.tau_s / (k + 2)
            tau_n = 2.0 * tau
        return replace(config, K=k, tau=tau, tau_N=tau_n), cost_model
    if axis == "sigma2_s":
        return replace(config, sigma2_s=(float(value),) * config.M), cost_model
    if axis == "c":
        if cost_model is None:
            raise ValueError("sweep over c needs a cost model")
        return config, replace(cost_model, c=float(value))
    if axis == "omega":
        if cost_model is None:
            raise ValueError("sweep over omega needs a cost model")
        return config, replace(cost_model, omega=float(value))
    raise ValueError(f"unknown sweep axis: {axis} (expected one of {SWEEP_AXES})")


def sweep(
    axis: str,
    values,
    config: ScenarioConfig,
    detector_kind: str,
    trials: int,
    seed: int | None = None,
    cost_model: CostModel | None = None,
    grid_size: int = 1001,
) -> list[tuple[float, SimMetrics]]:
    """One Monte Carlo run per axis value, all sharing the same seed so the
    slot randomness is common across points."""
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    seed = config.rng_seed if seed is None else seed
    out = []
    for value in values:
        cfg, cm = _apply_axis(axis, value, config, cost_model)
        detector = make_detector(detector_kind, cfg, cm, grid_size)
        out.append((value, run_monte_carlo(cfg, detector, trials, seed, cm)))
    return out


def run_monte_carlo_fading(
    config: ScenarioConfig,
    fading: FadingConfig,
    detector_kind: str,
    trials: int,
    seed: int | None = None,
    cost_model: CostModel | None = None,
    grid_size: int = 1001,
) -> SimMetrics:
    """Monte Carlo with the participant set redrawn every coherence period.

    Implemented for identical sensors with symmetric reporting links, where
    the reduced scenario depends only on the participant count; periods are
    grouped by that count and each group runs vectorized.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ensemble = SensorEnsemble.from_config(config)
    deltas = {participation_prob(i, fading) for i in range(config.M)}
    if not ensemble.is_identical or len(deltas) != 1:
        raise NotImplementedError("fading runs support identical sensors and symmetric links")
    delta = deltas.pop()
    seed = config.rng_seed if seed is None else seed

    n_periods = -(-trials // fading.T_c)
    rng_counts = _chunk_rng(seed, 0)
    counts = rng_counts.binomial(config.M, delta, size=n_periods)
    slots_per_period = np.full(n_periods, fading.T_c, dtype=np.int64)
    slots_per_period[-1] = trials - fading.T_c * (n_periods - 1)

    acc = _Accumulator(config.K)
    detectors: dict[int, object] = {}
    for m_eff in sorted(set(int(c) for c in counts)):
        n_slots = int(slots_per_period[counts == m_eff].sum())
        if n_slots == 0:
            continue
        if m_eff == 0:
            cfg = config
            detector = PriorOnlyDetector(config.pi0)
        else:
            cfg = effective_config(config, range(m_eff))
            if m_eff not in detectors:
                detectors[m_eff] = make_detector(detector_kind, cfg, cost_model, grid_size)
            detector = detectors[m_eff]
        done = 0
        chunk_idx = 0
        while done < n_slots:
            n = min(SIM_CHUNK, n_slots - done)
            rng = _chunk_rng(seed, (1 + m_eff) * 1_000_000 + chunk_idx)
            truth, _, ordered_values, _ = draw_slots(cfg, rng, n)
            declared, stage = detector.decide(ordered_values)
            acc.add(truth, declared, stage, cfg, cost_model, rng)
            done += n
            chunk_idx += 1
    return acc.metrics()
