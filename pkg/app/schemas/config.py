import math
from typing import Optional

from pydantic import BaseModel, Field, root_validator, validator


class _Section(BaseModel):
    class Config:
        allow_mutation = False
        extra = "forbid"


class SimParams(_Section):
    lane_length: float = Field(default=150.0, gt=0, description="meters")
    vehicle_length: float = Field(default=5.0, gt=0, description="meters")
    min_gap: float = Field(default=2.5, gt=0, description="meters")
    v_max: float = Field(default=13.42, gt=0, description="m/s")
    accel: float = Field(default=2.6, gt=0, description="m/s^2")
    decel: float = Field(default=4.5, gt=0, description="m/s^2")
    yellow_duration: int = Field(default=3, gt=0, description="seconds")
    phase_span: int = Field(default=10, gt=0, description="seconds, extension span of a green")
    time_step: float = Field(default=1.0, gt=0, description="seconds")
    halt_threshold: float = Field(default=0.1, gt=0, description="m/s")
    reaction_time: float = Field(default=1.0, gt=0, description="seconds")
    driver_imperfection: float = Field(default=0.0, ge=0, le=1)
    horizon: int = Field(default=1800, gt=0, description="simulation steps per episode")

    @root_validator(skip_on_failure=True)
    def _check_timing(cls, values):  # noqa: N805
        if values["halt_threshold"] >= values["v_max"]:
            raise ValueError("halt_threshold must be below v_max")
        dt = values["time_step"]
        if values["yellow_duration"] < dt:
            raise ValueError("yellow_duration must last at least one time_step")
        ratio = values["phase_span"] / dt
        if not math.isclose(ratio, round(ratio)):
            raise ValueError("phase_span must be a multiple of time_step")
        return values

    @property
    def lane_capacity(self) -> int:
        return int(self.lane_length // (self.vehicle_length + self.min_gap))


class BaselineConfig(_Section):
    cycle_green_total: int = Field(default=120, gt=0)
    min_green: int = Field(default=10, gt=0)
    max_green: int = Field(default=60, gt=0)
    max_time_gap: float = Field(default=5.0, gt=0)
    time_loss_threshold: float = Field(default=1.0, ge=0)

    @root_validator(skip_on_failure=True)
    def _check_green_bounds(cls, values):  # noqa: N805
        if values["min_green"] > values["max_green"]:
            raise ValueError("min_green must not exceed max_green")
        return values


class AgentConfig(_Section):
    gamma: float = Field(default=0.999, gt=0, lt=1)
    batch_size: int = Field(default=128, gt=0)
    memory_size: int = Field(default=10000, gt=0)
    learning_rate: float = Field(default=0.01, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    epsilon_start: float = Field(default=0.9, ge=0, le=1)
    epsilon_end: float = Field(default=0.05, ge=0, le=1)
    epsilon_decay_steps: int = Field(default=15000, gt=0)
    hidden_sizes: tuple[int, ...] = (64, 64)
    learn_start: Optional[int] = Field(default=None, description="defaults to batch_size")

    @validator("hidden_sizes")
    def _positive_layers(cls, v):  # noqa: N805
        if not v or any(h <= 0 for h in v):
            raise ValueError("hidden_sizes must be non-empty and positive")
        return tuple(v)

    @root_validator(skip_on_failure=True)
    def _check_epsilon(cls, values):  # noqa: N805
        if values["epsilon_end"] > values["epsilon_start"]:
            raise ValueError("epsilon_end must not exceed epsilon_start")
        if values["memory_size"] < values["batch_size"]:
            raise ValueError("memory_size must hold at least one batch")
        if values.get("learn_start") is None:
            values["learn_start"] = values["batch_size"]
        elif values["learn_start"] < values["batch_size"]:
            raise ValueError("learn_start must be at least batch_size")
        return values


CONTROLLER_NAMES = ("fixed", "gap", "timeloss", "rl")
PATTERN_IDS = ("P1", "P2", "P3", "P4")


class RunSection(_Section):
    pattern: str = "P1"
    episodes: int = Field(default=200, ge=1)
    runs: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0)
    out: Optional[str] = None
    model: Optional[str] = None
    models: tuple[str, ...] = ()
    controller: str = "rl"
    trace: bool = False

    @validator("pattern")
    def _known_pattern(cls, v):  # noqa: N805
        if v not in PATTERN_IDS:
            raise ValueError(f"unknown pattern {v!r}; expected one of {', '.join(PATTERN_IDS)}")
        return v

    @validator("controller")
    def _known_controller(cls, v):  # noqa: N805
        if v not in CONTROLLER_NAMES:
            raise ValueError(
                f"unknown controller {v!r}; expected one of {', '.join(CONTROLLER_NAMES)}"
            )
        return v


class RunConfig(_Section):
    sim: SimParams = SimParams()
    agent: AgentConfig = AgentConfig()
    baseline: BaselineConfig = BaselineConfig()
    run: RunSection = RunSection()
