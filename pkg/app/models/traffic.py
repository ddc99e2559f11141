from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, List, Optional

import numpy as np


class Approach(str, Enum):
    N = "N"
    E = "E"
    S = "S"
    W = "W"


class Turn(str, Enum):
    LEFT = "left"
    THROUGH = "through"
    RIGHT = "right"


class LaneRole(str, Enum):
    LEFT = "left"
    THROUGH = "through"
    THROUGH_RIGHT = "through_right"


# clockwise; also the lane / state-vector order
APPROACHES = (Approach.N, Approach.E, Approach.S, Approach.W)
TURNS = (Turn.LEFT, Turn.THROUGH, Turn.RIGHT)
LANE_ROLES = (LaneRole.LEFT, LaneRole.THROUGH, LaneRole.THROUGH_RIGHT)


@dataclass(frozen=True)
class Movement:
    approach: Approach
    turn: Turn

    def __str__(self) -> str:
        return f"{self.approach.value}.{self.turn.value}"

    @property
    def index(self) -> int:
        return APPROACHES.index(self.approach) * 3 + TURNS.index(self.turn)

    @property
    def destination(self) -> Approach:
        i = APPROACHES.index(self.approach)
        offset = {Turn.LEFT: 1, Turn.THROUGH: 2, Turn.RIGHT: 3}[self.turn]
        return APPROACHES[(i + offset) % 4]


MOVEMENTS = tuple(Movement(a, t) for a in APPROACHES for t in TURNS)


@dataclass
class Vehicle:
    id: int
    movement: Movement
    position: float
    speed: float
    entered_at: int
    wait_accum: float = 0.0
    time_loss_accum: float = 0.0


@dataclass
class Lane:
    index: int
    approach: Approach
    role: LaneRole
    vehicles: List[Vehicle] = field(default_factory=list)  # front (nearest stop line) first
    pending: Deque[Movement] = field(default_factory=deque)
    last_departure_at: Optional[int] = None

    @property
    def backlog(self) -> int:
        return len(self.pending)

    @property
    def movements(self) -> tuple[Movement, ...]:
        if self.role is LaneRole.LEFT:
            return (Movement(self.approach, Turn.LEFT),)
        if self.role is LaneRole.THROUGH:
            return (Movement(self.approach, Turn.THROUGH),)
        return (Movement(self.approach, Turn.THROUGH), Movement(self.approach, Turn.RIGHT))


def make_lanes() -> List[Lane]:
    return [
        Lane(index=i * 3 + j, approach=a, role=r)
        for i, a in enumerate(APPROACHES)
        for j, r in enumerate(LANE_ROLES)
    ]


@dataclass
class MetricsAccumulator:
    halting_vehicle_step_sum: int = 0
    vehicles_entered: int = 0
    vehicles_departed: int = 0
    wait_sum: float = 0.0
    steps_elapsed: int = 0
    arrivals_by_movement: List[int] = field(default_factory=lambda: [0] * len(MOVEMENTS))


@dataclass
class WorldState:
    lanes: List[Lane]
    rng: np.random.Generator
    clock: int = 0
    metrics: MetricsAccumulator = field(default_factory=MetricsAccumulator)
    next_vehicle_id: int = 0

    @classmethod
    def fresh(cls, seed) -> "WorldState":
        return cls(lanes=make_lanes(), rng=np.random.default_rng(seed))

    def lane_for(self, approach: Approach, role: LaneRole) -> Lane:
        return self.lanes[APPROACHES.index(approach) * 3 + LANE_ROLES.index(role)]
