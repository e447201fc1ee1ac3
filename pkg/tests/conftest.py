import pytest

from src.channel import Rayleigh
from src.config import ScenarioConfig, profile_overrides
from src.optimizer import Scenario
from src.schemes import RadioParameters


@pytest.fixture
def carrier() -> Scenario:
    return Scenario.carrier_defaults()


@pytest.fixture
def ook() -> Scenario:
    return Scenario.ook_defaults()


@pytest.fixture
def calibrated_carrier() -> Scenario:
    """Carrier scenario with coherent circuit energy scaled as in the calibrated profile."""
    scale = profile_overrides("calibrated")["coherent_circuit_scale"]
    return ScenarioConfig(coherent_circuit_scale=scale).carrier_scenario()


@pytest.fixture
def rayleigh() -> Rayleigh:
    return Rayleigh(1.0)


@pytest.fixture
def radio() -> RadioParameters:
    return RadioParameters.carrier_defaults()
