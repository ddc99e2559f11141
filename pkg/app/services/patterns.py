from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np

from app.core.errors import ConfigError
from app.models.traffic import MOVEMENTS, Approach, Movement, Turn

# (start_step, rate) pairs, ascending by start_step; the first entry starts at 0
RateSchedule = Tuple[Tuple[int, float], ...]


@dataclass(frozen=True)
class PatternSpec:
    id: str
    schedules: Tuple[RateSchedule, ...]  # one per movement, MOVEMENTS order
    _breaks: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.schedules) != len(MOVEMENTS):
            raise ValueError("a pattern needs one rate schedule per movement")
        breaks = set()
        for schedule in self.schedules:
            if not schedule or schedule[0][0] != 0:
                raise ValueError("every rate schedule must start at step 0")
            for start, rate in schedule:
                if not 0.0 <= rate <= 1.0:
                    raise ValueError(f"arrival rate {rate} outside [0, 1]")
                breaks.add(start)
        object.__setattr__(self, "_breaks", tuple(sorted(breaks)))
        object.__setattr__(self, "_cache", {})

    @classmethod
    def constant(cls, pattern_id: str, rates: Mapping[Movement, float]) -> "PatternSpec":
        return cls(pattern_id, tuple(((0, float(rates.get(m, 0.0))),) for m in MOVEMENTS))

    @classmethod
    def uniform(cls, pattern_id: str, rate: float) -> "PatternSpec":
        return cls.constant(pattern_id, {m: rate for m in MOVEMENTS})

    def _segment(self, step: int) -> int:
        start = 0
        for b in self._breaks:
            if b <= step:
                start = b
        return start

    def rates_at(self, step: int) -> np.ndarray:
        key = self._segment(step)
        cache: Dict[int, np.ndarray] = self._cache  # type: ignore[attr-defined]
        if key not in cache:
            rates = np.empty(len(MOVEMENTS))
            for i, schedule in enumerate(self.schedules):
                rate = schedule[0][1]
                for start, r in schedule:
                    if start <= key:
                        rate = r
                rates[i] = rate
            rates.setflags(write=False)
            cache[key] = rates
        return cache[key]

    def rate(self, movement: Movement, step: int) -> float:
        return float(self.rates_at(step)[movement.index])

    def mean_rates(self, horizon: int) -> np.ndarray:
        """Time-averaged rates over [0, horizon)."""
        edges = [b for b in self._breaks if b < horizon] + [horizon]
        total = np.zeros(len(MOVEMENTS))
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += self.rates_at(lo) * (hi - lo)
        return total / float(horizon)

    def __getstate__(self):
        return {"id": self.id, "schedules": self.schedules}

    def __setstate__(self, state) -> None:
        object.__setattr__(self, "id", state["id"])
        object.__setattr__(self, "schedules", state["schedules"])
        self.__post_init__()


def _row(through, left: float, right: float) -> Dict[Turn, RateSchedule]:
    through_schedule = tuple(through) if isinstance(through, Sequence) else ((0, through),)
    return {
        Turn.THROUGH: through_schedule,
        Turn.LEFT: ((0, left),),
        Turn.RIGHT: ((0, right),),
    }


# rows are keyed by the approach a flow enters from: "N-S" is the north approach heading south
_TABLE: Dict[str, Dict[Approach, Dict[Turn, RateSchedule]]] = {
    "P1": {
        Approach.N: _row(0.05, 0.025, 0.01),
        Approach.S: _row(0.05, 0.025, 0.01),
        Approach.E: _row(0.1, 0.05, 0.01),
        Approach.W: _row(0.1, 0.05, 0.01),
    },
    "P2": {
        Approach.N: _row(0.05, 0.025, 0.01),
        Approach.S: _row(0.05, 0.025, 0.01),
        Approach.E: _row(0.05, 0.1, 0.01),
        Approach.W: _row(0.05, 0.1, 0.01),
    },
    "P3": {
        Approach.N: _row(0.1, 0.08, 0.01),
        Approach.S: _row(0.05, 0.025, 0.01),
        Approach.E: _row(0.1, 0.08, 0.01),
        Approach.W: _row(0.05, 0.025, 0.01),
    },
    "P4": {
        Approach.N: _row(0.05, 0.025, 0.01),
        Approach.S: _row(0.05, 0.025, 0.01),
        Approach.E: _row(((0, 0.05), (1200, 0.15)), 0.025, 0.01),
        Approach.W: _row(((0, 0.15), (600, 0.05)), 0.025, 0.01),
    },
}

PATTERN_IDS = tuple(_TABLE)


def build_pattern(pattern_id: str) -> PatternSpec:
    table = _TABLE.get(pattern_id)
    if table is None:
        raise ConfigError(
            f"unknown pattern {pattern_id!r}; expected one of {', '.join(PATTERN_IDS)}"
        )
    schedules = tuple(table[m.approach][m.turn] for m in MOVEMENTS)
    return PatternSpec(pattern_id, schedules)
