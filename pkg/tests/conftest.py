import numpy as np
import pytest

from app.models.traffic import Movement, Vehicle
from app.schemas.config import AgentConfig, BaselineConfig, SimParams
from app.services.patterns import PatternSpec
from app.services.qnet import init_params


@pytest.fixture
def params() -> SimParams:
    return SimParams()


@pytest.fixture
def short_params() -> SimParams:
    return SimParams(horizon=300)


@pytest.fixture
def small_agent_cfg() -> AgentConfig:
    return AgentConfig(batch_size=8, memory_size=256, hidden_sizes=(16,), epsilon_decay_steps=100)


@pytest.fixture
def baseline() -> BaselineConfig:
    return BaselineConfig()


@pytest.fixture
def zero_pattern() -> PatternSpec:
    return PatternSpec.uniform("Z", 0.0)


@pytest.fixture
def tiny_network():
    return init_params((12, 16, 8), seed=3)


def make_vehicle(movement: Movement, position: float, speed: float, vid: int = 0) -> Vehicle:
    return Vehicle(id=vid, movement=movement, position=position, speed=speed, entered_at=0)


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)
