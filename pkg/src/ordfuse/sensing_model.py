"""Slot-level measurement model: primary activity, sensor samples, local LLRs,
and the magnitude-ordered transmission sequence."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Hypothesis(enum.IntEnum):
    H0 = 0  # channel free
    H1 = 1  # channel busy


class MeasurementModel(enum.Enum):
    ENERGY_CHI_SQUARE = "energy"
    SHIFT_IN_MEAN_GAUSSIAN = "shift-in-mean"


def _as_sensor_list(value, m: int, name: str) -> tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),) * m
    out = tuple(float(v) for v in value)
    if len(out) != m:
        raise ValueError(f"{name} must have one entry per sensor (expected {m}, got {len(out)})")
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    """Slot timing, prior, sensor count and per-sensor signal powers.

    Timing must satisfy tau_s - tau_N - K*tau >= 0 so that K reporting
    mini-slots fit in the slot after the sampling window.
    """

    M: int
    N: int
    K: int
    tau_s: float
    tau_N: float
    tau: float
    pi0: float
    sigma2: float
    sigma2_s: tuple[float, ...]
    measurement_model: MeasurementModel = MeasurementModel.ENERGY_CHI_SQUARE
    mu0: tuple[float, ...] | None = None  # shift-in-mean only
    mu1: tuple[float, ...] | None = None
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sigma2_s", _as_sensor_list(self.sigma2_s, self.M, "sigma2_s"))
        if self.M < self.K or self.K < 1:
            raise ValueError("sensor counts must satisfy M >= K >= 1")
        if self.N < 1:
            raise ValueError("samples per slot must satisfy N >= 1")
        if not 0.0 <= self.pi0 <= 1.0:
            raise ValueError("prior pi0 must lie in [0, 1]")
        if self.sigma2 <= 0 or any(s <= 0 for s in self.sigma2_s):
            raise ValueError("all variances must be > 0")
        if self.tau_s - self.tau_N - self.K * self.tau < -1e-12:
            raise ValueError("timing must satisfy tau_s - tau_N - K*tau >= 0")
        if self.measurement_model is MeasurementModel.SHIFT_IN_MEAN_GAUSSIAN:
            if self.mu0 is None or self.mu1 is None:
                raise ValueError("shift-in-mean model requires mu0 and mu1")
            object.__setattr__(self, "mu0", _as_sensor_list(self.mu0, self.M, "mu0"))
            object.__setattr__(self, "mu1", _as_sensor_list(self.mu1, self.M, "mu1"))
            if any(a == b for a, b in zip(self.mu0, self.mu1)):
                raise ValueError("shift-in-mean model requires mu0 != mu1 per sensor")

    def snr(self, sensor: int) -> float:
        """Local SNR gamma_i = sigma2_s_i / sigma2."""
        return self.sigma2_s[sensor] / self.sigma2

    def sensing_time(self, stage: int) -> float:
        return self.tau_N + stage * self.tau

    def log_prior_ratio(self) -> float:
        """log(pi0 / (1 - pi0)); +-inf at the degenerate priors."""
        if self.pi0 == 0.0:
            return -math.inf
        if self.pi0 == 1.0:
            return math.inf
        return math.log(self.pi0 / (1.0 - self.pi0))


@dataclass(frozen=True)
class SlotRealization:
    true_hypothesis: Hypothesis
    llr: tuple[float, ...]
    ordered: tuple[tuple[int, float], ...] = field(repr=False)


def llr_from_samples(samples, sensor: int, config: ScenarioConfig) -> float:
    """Local log-likelihood ratio of one sensor's N samples."""
    x = np.asarray(samples, dtype=float)
    if x.shape != (config.N,):
        raise ValueError(f"expected {config.N} samples, got shape {x.shape}")
    if config.measurement_model is MeasurementModel.ENERGY_CHI_SQUARE:
        g = config.snr(sensor)
        energy = float(np.sum(x * x))
        return (g / (g + 1.0)) * energy / (2.0 * config.sigma2) - 0.5 * config.N * math.log1p(g)
    m0 = config.mu0[sensor]
    m1 = config.mu1[sensor]
    return float(np.sum((x - m0) ** 2 - (x - m1) ** 2)) / (2.0 * config.sigma2)


def rank_by_magnitude(llr) -> list[tuple[int, float]]:
    """(sensor, llr) pairs sorted by descending |llr|; ties keep the lower index."""
    values = np.asarray(llr, dtype=float)
    if values.size == 0:
        raise ValueError("cannot rank an empty LLR list")
    order = np.argsort(-np.abs(values), kind="stable")
    return [(int(i), float(values[i])) for i in order]


def draw_slots(config: ScenarioConfig, rng: np.random.Generator, n_slots: int):
    """Vectorized slot draws.

    Returns (truth, llr, ordered_values) where truth is (n,) of {0,1},
    llr is (n, M) and ordered_values is (n, M) sorted by descending |llr|
    per slot (ties broken by lower sensor index via a stable sort).
    """
    m, n_samp = config.M, config.N
    truth = (rng.random(n_slots) >= config.pi0).astype(np.int8)  # 1 = busy
    z = rng.standard_normal((n_slots, m, n_samp))
    sigma2_s = np.asarray(config.sigma2_s)
    if config.measurement_model is MeasurementModel.ENERGY_CHI_SQUARE:
        std0 = math.sqrt(config.sigma2)
        std1 = np.sqrt(sigma2_s + config.sigma2)
        scale = np.where(truth[:, None] == 0, std0, std1[None, :])
        x = z * scale[:, :, None]
        g = sigma2_s / config.sigma2
        energy = np.einsum("ijk,ijk->ij", x, x)
        llr = (g / (g + 1.0))[None, :] * energy / (2.0 * config.sigma2) \
            - 0.5 * n_samp * np.log1p(g)[None, :]
    else:
        mu0 = np.asarray(config.mu0)
        mu1 = np.asarray(config.mu1)
        mean = np.where(truth[:, None] == 0, mu0[None, :], mu1[None, :])
        x = z * math.sqrt(config.sigma2) + mean[:, :, None]
        diff = (x - mu0[None, :, None]) ** 2 - (x - mu1[None, :, None]) ** 2
        llr = diff.sum(axis=2) / (2.0 * config.sigma2)
    order = np.argsort(-np.abs(llr), axis=1, kind="stable")
    ordered_values = np.take_along_axis(llr, order, axis=1)
    return truth, llr, ordered_values, order


def draw_slot(config: ScenarioConfig, rng: np.random.Generator) -> SlotRealization:
    """One slot: primary state, per-sensor LLRs and the ordered report sequence."""
    truth, llr, _, order = draw_slots(config, rng, 1)
    values = llr[0]
    ordered = tuple((int(i), float(values[i])) for i in order[0])
    return SlotRealization(
        true_hypothesis=Hypothesis(int(truth[0])),
        llr=tuple(float(v) for v in values),
        ordered=ordered,
    )
