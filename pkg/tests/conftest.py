import numpy as np
import pytest

from ordfuse.defaults import (
    default_error_min_costs,
    default_fading,
    default_scenario,
    default_throughput_costs,
)
from ordfuse.dp_policy import CostMode, CostModel, solve_backward, solve_one_threshold
from ordfuse.llr_distributions import law_for_sensor
from ordfuse.order_stats import SensorEnsemble
from ordfuse.sensing_model import MeasurementModel


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


@pytest.fixture(scope="session")
def law(scenario):
    return law_for_sensor(scenario, 0)


@pytest.fixture(scope="session")
def ensemble(scenario):
    return SensorEnsemble.from_config(scenario)


@pytest.fixture(scope="session")
def shift_scenario():
    return default_scenario(
        measurement_model=MeasurementModel.SHIFT_IN_MEAN_GAUSSIAN,
        mu0=(-1.0,) * 10,
        mu1=(1.0,) * 10,
    )


@pytest.fixture(scope="session")
def shift_law(shift_scenario):
    return law_for_sensor(shift_scenario, 0)


@pytest.fixture(scope="session")
def zero_cost_throughput():
    return CostModel(mode=CostMode.WEIGHTED_THROUGHPUT, c=0.0)


@pytest.fixture(scope="session")
def policy_throughput_zero(scenario, ensemble, zero_cost_throughput):
    return solve_backward(scenario, zero_cost_throughput, ensemble)


@pytest.fixture(scope="session")
def policy_one_threshold(scenario, ensemble, zero_cost_throughput):
    return solve_one_threshold(scenario, zero_cost_throughput, ensemble)


@pytest.fixture(scope="session")
def policy_error_min(scenario, ensemble):
    return solve_backward(scenario, default_error_min_costs(c=0.0001), ensemble)


@pytest.fixture(scope="session")
def policy_error_min_free(scenario, ensemble):
    return solve_backward(scenario, default_error_min_costs(c=0.0), ensemble)


@pytest.fixture(scope="session")
def policy_throughput_default(scenario, ensemble):
    return solve_backward(scenario, default_throughput_costs(c=0.0001), ensemble)


@pytest.fixture(scope="session")
def fading10():
    return default_fading(10)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
