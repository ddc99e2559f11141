from __future__ import annotations

from itertools import combinations
from typing import Dict, FrozenSet, Optional

from app.core.errors import SequencingError
from app.models.signal import IntervalKind, LaneStatus, Phase, SignalState
from app.models.traffic import APPROACHES, MOVEMENTS, Approach, Lane, Movement, Turn
from app.schemas.config import SimParams


def _m(approach: str, *turns: str) -> FrozenSet[Movement]:
    return frozenset(Movement(Approach(approach), Turn(t)) for t in turns)


# Swappable convention: four dual-approach phases followed by four single-approach phases.
PHASE_TABLE: Dict[Phase, FrozenSet[Movement]] = {
    Phase.NS_THROUGH: _m("N", "through", "right") | _m("S", "through", "right"),
    Phase.NS_LEFT: _m("N", "left") | _m("S", "left"),
    Phase.EW_THROUGH: _m("E", "through", "right") | _m("W", "through", "right"),
    Phase.EW_LEFT: _m("E", "left") | _m("W", "left"),
    Phase.N_ALL: _m("N", "left", "through", "right"),
    Phase.S_ALL: _m("S", "left", "through", "right"),
    Phase.E_ALL: _m("E", "left", "through", "right"),
    Phase.W_ALL: _m("W", "left", "through", "right"),
}

CYCLE_PHASES = (Phase.NS_THROUGH, Phase.NS_LEFT, Phase.EW_THROUGH, Phase.EW_LEFT)


def conflicts(m1: Movement, m2: Movement) -> bool:
    """True iff the two paths cross or merge under right-hand four-leg geometry."""
    if m1.approach == m2.approach:
        return False
    if m1.turn is Turn.RIGHT or m2.turn is Turn.RIGHT:
        # a right turn only merges into the stream heading for the same exit
        return m1.destination == m2.destination
    opposing = (APPROACHES.index(m1.approach) - APPROACHES.index(m2.approach)) % 4 == 2
    if opposing:
        return (m1.turn is Turn.LEFT) != (m2.turn is Turn.LEFT)
    return True


def phase_is_safe(movements: FrozenSet[Movement]) -> bool:
    return not any(conflicts(a, b) for a, b in combinations(movements, 2))


def check_phase_table(table: Dict[Phase, FrozenSet[Movement]] = PHASE_TABLE) -> None:
    for phase, movements in table.items():
        if not phase_is_safe(movements):
            raise ValueError(f"phase {phase.name} grants conflicting movements")
    covered = frozenset().union(*(table[p] for p in CYCLE_PHASES))
    if covered != frozenset(MOVEMENTS):
        raise ValueError("cycle phases do not cover every movement")


check_phase_table()


def steps_for(seconds: float, params: SimParams) -> int:
    return max(1, int(round(seconds / params.time_step)))


def actuate(
    signal: SignalState,
    requested: Phase,
    params: SimParams,
    green_seconds: Optional[float] = None,
) -> SignalState:
    """Apply a decision: repeat extends the green by one span, a change inserts a yellow first."""
    if not signal.at_decision_point:
        raise SequencingError(
            f"actuate called mid-interval ({signal.kind.value}, {signal.remaining} steps left)"
        )
    span = steps_for(params.phase_span if green_seconds is None else green_seconds, params)
    requested = Phase(requested)
    if requested == signal.phase:
        return SignalState(
            kind=IntervalKind.GREEN,
            phase=requested,
            remaining=span,
            elapsed_green=signal.elapsed_green,
        )
    return SignalState(
        kind=IntervalKind.YELLOW,
        phase=signal.phase,
        next_phase=requested,
        remaining=steps_for(params.yellow_duration, params),
        pending_span=span,
    )


def tick(signal: SignalState) -> SignalState:
    """Advance the signal by one simulation step."""
    if signal.kind is IntervalKind.GREEN:
        return SignalState(
            kind=IntervalKind.GREEN,
            phase=signal.phase,
            remaining=max(0, signal.remaining - 1),
            elapsed_green=signal.elapsed_green + 1,
        )
    if signal.remaining > 1:
        return SignalState(
            kind=IntervalKind.YELLOW,
            phase=signal.phase,
            next_phase=signal.next_phase,
            remaining=signal.remaining - 1,
            pending_span=signal.pending_span,
        )
    assert signal.next_phase is not None
    return SignalState(
        kind=IntervalKind.GREEN,
        phase=signal.next_phase,
        remaining=signal.pending_span,
        elapsed_green=0,
    )


def is_green(movement: Movement, signal: SignalState) -> bool:
    return signal.kind is IntervalKind.GREEN and movement in PHASE_TABLE[signal.phase]


def green_movements(signal: SignalState) -> FrozenSet[Movement]:
    if signal.kind is not IntervalKind.GREEN:
        return frozenset()
    return PHASE_TABLE[signal.phase]


def lane_status(lane: Lane, signal: SignalState) -> LaneStatus:
    # the shared lane follows its through movement; no right turn on red
    served = PHASE_TABLE[signal.phase]
    if not all(m in served for m in lane.movements):
        return LaneStatus.RED
    if signal.kind is IntervalKind.GREEN:
        return LaneStatus.GREEN
    return LaneStatus.YELLOW


def served_lanes(lanes: list[Lane], phase: Phase) -> list[Lane]:
    served = PHASE_TABLE[phase]
    return [lane for lane in lanes if all(m in served for m in lane.movements)]
