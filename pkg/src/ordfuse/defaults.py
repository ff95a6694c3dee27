"""Baseline simulation parameters shared by the CLI and the test suite."""

from __future__ import annotations

from dataclasses import replace

from .dp_policy import CostMode, CostModel
from .fading_link import FadingConfig
from .sensing_model import MeasurementModel, ScenarioConfig

DEFAULT_SEED = 20260811
DEFAULT_TRIALS = 20000


def default_scenario(**overrides) -> ScenarioConfig:
    """Ten identical energy sensors, eight reporting stages in a unit slot."""
    base = ScenarioConfig(
        M=10,
        N=3,
        K=8,
        tau_s=1.0,
        tau_N=0.2,
        tau=0.1,
        pi0=0.5,
        sigma2=1.0,
        sigma2_s=(2.0,) * 10,
        measurement_model=MeasurementModel.ENERGY_CHI_SQUARE,
        rng_seed=DEFAULT_SEED,
    )
    if not overrides:
        return base
    if "M" in overrides:
        m = overrides["M"]
        overrides.setdefault("sigma2_s", (base.sigma2_s[0],) * m)
        overrides.setdefault("K", min(base.K, m))
    return replace(base, **overrides)


def default_error_min_costs(c: float = 0.0001) -> CostModel:
    return CostModel.error_min(c=c)


def default_throughput_costs(omega: float = 0.5, c: float = 0.0001, **kwargs) -> CostModel:
    return CostModel(mode=CostMode.WEIGHTED_THROUGHPUT, omega=omega, c=c, **kwargs)


def default_fading(m: int) -> FadingConfig:
    """Unit-mean exponential link gains with a 20-bit report over 50 kHz."""
    return FadingConfig.symmetric(
        m=m,
        W=50_000.0,
        bits=20,
        tau_b=0.0005,
        P_over_sigma=5.0,
        Gamma=2.0,
        gain_mean=1.0,
        T_c=1,
    )
