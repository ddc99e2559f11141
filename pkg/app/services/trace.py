from __future__ import annotations

import csv
from contextlib import ExitStack
from pathlib import Path
from typing import IO, Optional, Tuple

from app.models.signal import SignalState
from app.models.traffic import WorldState
from app.schemas.config import SimParams
from app.services.results import fmt

TRACE_COLUMNS = ("step", "lane_index", "vehicle_id", "position", "speed", "halting_flag")
DECISION_COLUMNS = ("step", "chosen_phase", "interval_kind", "elapsed_green")


class _CsvSink:
    columns: tuple[str, ...] = ()

    def __init__(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        self.path = path
        self._fh: Optional[IO[str]] = path.open("w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(self.columns)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class VehicleTrace(_CsvSink):
    """Per-step vehicle rows, written after the metrics update of each step."""

    columns = TRACE_COLUMNS

    def __init__(self, path: Path, params: SimParams) -> None:
        super().__init__(path)
        self.params = params

    def on_step(self, world: WorldState, signal: SignalState) -> None:
        threshold = self.params.halt_threshold
        for lane in world.lanes:
            for v in lane.vehicles:
                self._writer.writerow(
                    [world.clock, lane.index, v.id, fmt(v.position), fmt(v.speed), int(v.speed <= threshold)]
                )


class DecisionLog(_CsvSink):
    columns = DECISION_COLUMNS

    def record(self, world: WorldState, signal: SignalState) -> None:
        """Called right after actuation; ``signal`` is the interval just started."""
        chosen = signal.next_phase if signal.next_phase is not None else signal.phase
        self._writer.writerow([world.clock, chosen.name, signal.kind.value, signal.elapsed_green])


def open_sinks(
    stack: ExitStack, trace_dir: Optional[str], tag: str, params: SimParams
) -> Tuple[Optional[VehicleTrace], Optional[DecisionLog]]:
    """Vehicle trace and decision log for one episode, closed with ``stack``; both None when tracing is off."""
    if trace_dir is None:
        return None, None
    base = Path(trace_dir)
    trace = stack.enter_context(VehicleTrace(base / f"trace_{tag}.csv", params))
    decisions = stack.enter_context(DecisionLog(base / f"decisions_{tag}.csv"))
    return trace, decisions
