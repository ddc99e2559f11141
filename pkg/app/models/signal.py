from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional


class Phase(IntEnum):
    NS_THROUGH = 1
    NS_LEFT = 2
    EW_THROUGH = 3
    EW_LEFT = 4
    N_ALL = 5
    S_ALL = 6
    E_ALL = 7
    W_ALL = 8

    @property
    def action(self) -> int:
        return self.value - 1

    @classmethod
    def from_action(cls, index: int) -> "Phase":
        return cls(int(index) + 1)


class IntervalKind(str, Enum):
    GREEN = "green"
    YELLOW = "yellow"


class LaneStatus(str, Enum):
    GREEN = "green"
    YELLOW = "yellow"
    RED = "red"


@dataclass(frozen=True)
class SignalState:
    kind: IntervalKind
    phase: Phase
    remaining: int
    next_phase: Optional[Phase] = None
    elapsed_green: int = 0
    pending_span: int = 0  # green length to apply when a yellow ends

    @classmethod
    def initial(cls, phase: Phase = Phase.NS_THROUGH) -> "SignalState":
        return cls(kind=IntervalKind.GREEN, phase=phase, remaining=0)

    @property
    def at_decision_point(self) -> bool:
        return self.kind is IntervalKind.GREEN and self.remaining == 0
