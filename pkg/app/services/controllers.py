from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Protocol, Sequence, Tuple

import numpy as np

from app.core.errors import ConfigError
from app.models.network import NetworkParams
from app.models.signal import Phase, SignalState
from app.models.traffic import WorldState
from app.schemas.config import CONTROLLER_NAMES, BaselineConfig, SimParams
from app.services.agent import select_action
from app.services.patterns import PatternSpec
from app.services.qnet import forward
from app.services.signals import CYCLE_PHASES, PHASE_TABLE, served_lanes
from app.services.simulator import observe_state


class Decision(NamedTuple):
    phase: Phase
    green_seconds: float


class Controller(Protocol):
    name: str

    def decide(self, world: WorldState, signal: SignalState) -> Decision: ...


def _next_in_cycle(phase: Phase, order: Sequence[Phase]) -> Phase:
    if phase not in order:
        return order[0]
    return order[(list(order).index(phase) + 1) % len(order)]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def fixed_time_schedule(
    rates: np.ndarray,
    cfg: BaselineConfig,
    order: Sequence[Phase] = CYCLE_PHASES,
) -> List[Tuple[Phase, int]]:
    """Green split proportional to the demand each cycle phase serves."""
    weights = [sum(float(rates[m.index]) for m in PHASE_TABLE[p]) for p in order]
    total = sum(weights)
    if total <= 0.0:
        equal = _round_half_up(cfg.cycle_green_total / len(order))
        return [(p, max(cfg.min_green, equal)) for p in order]
    return [
        (p, max(cfg.min_green, _round_half_up(cfg.cycle_green_total * w / total)))
        for p, w in zip(order, weights)
    ]


class FixedTimeController:
    name = "fixed"

    def __init__(self, schedule: List[Tuple[Phase, int]]) -> None:
        self.schedule = schedule
        self._cursor = 0

    @classmethod
    def for_pattern(cls, pattern: PatternSpec, cfg: BaselineConfig, params: SimParams) -> "FixedTimeController":
        return cls(fixed_time_schedule(pattern.mean_rates(params.horizon), cfg))

    def decide(self, world: WorldState, signal: SignalState) -> Decision:
        phase, green = self.schedule[self._cursor]
        self._cursor = (self._cursor + 1) % len(self.schedule)
        return Decision(phase, green)


@dataclass(frozen=True)
class DetectorReading:
    time_gap: float  # seconds since the last stop-line crossing in this green; inf if none
    presence: int


def detector_view(world: WorldState, signal: SignalState, params: SimParams) -> Dict[int, DetectorReading]:
    view: Dict[int, DetectorReading] = {}
    for lane in served_lanes(world.lanes, signal.phase):
        gap = math.inf
        if lane.last_departure_at is not None:
            since = world.clock - lane.last_departure_at
            if since < signal.elapsed_green:
                gap = since * params.time_step
        view[lane.index] = DetectorReading(time_gap=gap, presence=len(lane.vehicles))
    return view


class _ExtendOrAdvance:
    name = ""

    def __init__(self, cfg: BaselineConfig, params: SimParams, order: Sequence[Phase] = CYCLE_PHASES) -> None:
        self.cfg = cfg
        self.params = params
        self.order = tuple(order)

    def wants_extension(self, world: WorldState, signal: SignalState) -> bool:
        raise NotImplementedError

    def decide(self, world: WorldState, signal: SignalState) -> Decision:
        elapsed = signal.elapsed_green * self.params.time_step
        if signal.phase in self.order:
            if elapsed < self.cfg.min_green:
                return Decision(signal.phase, self.cfg.min_green - elapsed)
            if elapsed < self.cfg.max_green and self.wants_extension(world, signal):
                span = min(float(self.params.phase_span), self.cfg.max_green - elapsed)
                return Decision(signal.phase, span)
        return Decision(_next_in_cycle(signal.phase, self.order), self.cfg.min_green)


class GapBasedController(_ExtendOrAdvance):
    name = "gap"

    def wants_extension(self, world: WorldState, signal: SignalState) -> bool:
        view = detector_view(world, signal, self.params)
        return any(r.time_gap <= self.cfg.max_time_gap for r in view.values())


class TimeLossController(_ExtendOrAdvance):
    name = "timeloss"

    def wants_extension(self, world: WorldState, signal: SignalState) -> bool:
        threshold = self.cfg.time_loss_threshold
        return any(
            v.time_loss_accum > threshold
            for lane in served_lanes(world.lanes, signal.phase)
            for v in lane.vehicles
        )


class GreedyRLController:
    name = "rl"

    def __init__(self, network: NetworkParams, params: SimParams) -> None:
        self.network = network
        self.params = params

    def decide(self, world: WorldState, signal: SignalState) -> Decision:
        q = forward(self.network, observe_state(world, self.params))
        return Decision(select_action(q, 0.0), self.params.phase_span)


class FixedPhaseController:
    """Holds one phase forever; a starvation reference for the other approaches."""

    name = "hold"

    def __init__(self, phase: Phase, params: SimParams) -> None:
        self.phase = phase
        self.params = params

    def decide(self, world: WorldState, signal: SignalState) -> Decision:
        return Decision(self.phase, self.params.phase_span)


@dataclass(frozen=True)
class ControllerSpec:
    """Picklable recipe for a controller; a fresh controller is built for every episode."""

    kind: str
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    network: Optional[NetworkParams] = None
    hold_phase: Optional[Phase] = None


def make_controller(spec: ControllerSpec, pattern: PatternSpec, params: SimParams) -> Controller:
    if spec.kind == "fixed":
        return FixedTimeController.for_pattern(pattern, spec.baseline, params)
    if spec.kind == "gap":
        return GapBasedController(spec.baseline, params)
    if spec.kind == "timeloss":
        return TimeLossController(spec.baseline, params)
    if spec.kind == "rl":
        if spec.network is None:
            raise ConfigError("controller 'rl' needs a trained model")
        return GreedyRLController(spec.network, params)
    if spec.kind == "hold" and spec.hold_phase is not None:
        return FixedPhaseController(spec.hold_phase, params)
    raise ConfigError(f"unknown controller {spec.kind!r}; expected one of {', '.join(CONTROLLER_NAMES)}")
