from __future__ import annotations

from typing import Callable, Optional, Tuple

from app.models.signal import SignalState
from app.models.traffic import WorldState
from app.schemas.config import SimParams
from app.schemas.results import EpisodeResult
from app.services.patterns import PatternSpec
from app.services.signals import green_movements, phase_is_safe, tick
from app.services.simulator import step

StepHook = Callable[[WorldState, SignalState], None]


def run_interval(
    world: WorldState,
    signal: SignalState,
    pattern: PatternSpec,
    params: SimParams,
    on_step: Optional[StepHook] = None,
) -> Tuple[WorldState, SignalState]:
    """Simulate until the next decision point or the episode horizon, whichever comes first."""
    while world.clock < params.horizon:
        assert phase_is_safe(green_movements(signal)), "conflicting movements share a green"
        world = step(world, signal, pattern, params)
        if on_step is not None:
            on_step(world, signal)
        signal = tick(signal)
        if signal.at_decision_point:
            break
    return world, signal


def episode_result(world: WorldState, params: SimParams) -> EpisodeResult:
    m = world.metrics
    lanes = len(world.lanes)
    steps = max(m.steps_elapsed, 1)
    return EpisodeResult(
        avg_queue_length=m.halting_vehicle_step_sum / float(steps * lanes),
        avg_wait_time=(m.wait_sum / m.vehicles_entered) if m.vehicles_entered else 0.0,
        vehicles_entered=m.vehicles_entered,
        vehicles_departed=m.vehicles_departed,
    )
