"""
Experiment drivers: single episodes, training, seed-repeated evaluation,
benchmark comparison and the train-pattern x test-pattern generalization matrix.
"""

from __future__ import annotations

import logging
from contextlib import ExitStack
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from app.core.errors import MissingArtifactError
from app.models.network import NetworkParams
from app.models.signal import SignalState
from app.models.traffic import WorldState
from app.schemas.config import AgentConfig, BaselineConfig, SimParams
from app.schemas.results import (
    CompareSummary,
    EpisodeResult,
    EvalRun,
    EvalStats,
    GeneralizationCell,
    LearningCurveRow,
)
from app.services.agent import DQNAgent, EpisodeReport, run_training_episode
from app.services.controllers import Controller, ControllerSpec, make_controller
from app.services.episode import episode_result, run_interval
from app.services.patterns import PatternSpec, build_pattern
from app.services.qnet import DEFAULT_ARCHITECTURE, load_params, save_params
from app.services.results import (
    EVAL_RUN_COLUMNS,
    GENERALIZATION_COLUMNS,
    LEARNING_CURVE_COLUMNS,
    write_csv,
    write_json,
)
from app.services.signals import actuate
from app.services.stats import eval_stats, improvement_pct
from app.services.trace import open_sinks
from app.worker.evaluator import run_jobs

logger = logging.getLogger("harness")

COMPARE_ORDER = ("fixed", "gap", "timeloss", "rl")

# Published reference cells (avg queue veh/lane, avg wait s), train pattern -> test pattern.
# Produced with a different simulator; reported beside measured cells, never asserted.
REFERENCE_CELLS: Dict[str, Dict[str, tuple[float, float]]] = {
    "P1": {"P1": (0.72, 9.35), "P2": (1.13, 11.11), "P3": (1.42, 11.68), "P4": (0.56, 9.67)},
    "P2": {"P1": (0.71, 10.26), "P2": (0.91, 9.09), "P3": (1.04, 10.98), "P4": (0.61, 8.92)},
    "P3": {"P1": (0.67, 8.98), "P2": (0.96, 9.76), "P3": (1.17, 12.98), "P4": (0.66, 11.30)},
}


def run_episode(
    controller: Union[ControllerSpec, Controller],
    pattern: PatternSpec,
    seed: int,
    params: SimParams,
    trace_dir: Optional[str] = None,
) -> EpisodeResult:
    """One fresh world driven by ``controller`` for ``params.horizon`` steps."""
    if isinstance(controller, ControllerSpec):
        controller = make_controller(controller, pattern, params)
    world = WorldState.fresh(seed)
    signal = SignalState.initial()

    with ExitStack() as stack:
        trace, decisions = open_sinks(stack, trace_dir, f"{controller.name}_{pattern.id}_{seed}", params)
        while world.clock < params.horizon:
            decision = controller.decide(world, signal)
            signal = actuate(signal, decision.phase, params, decision.green_seconds)
            if decisions is not None:
                decisions.record(world, signal)
            world, signal = run_interval(
                world, signal, pattern, params, trace.on_step if trace is not None else None
            )
    return episode_result(world, params)


@dataclass
class TrainOutcome:
    network: NetworkParams
    curve: List[LearningCurveRow]
    reports: List[EpisodeReport]


def train(
    pattern: PatternSpec,
    episodes: int,
    master_seed: int,
    params: SimParams,
    agent_cfg: AgentConfig,
    out_dir: Optional[Path] = None,
    trace_dir: Optional[str] = None,
) -> TrainOutcome:
    agent = DQNAgent(agent_cfg, master_seed, params)
    curve: List[LearningCurveRow] = []
    reports: List[EpisodeReport] = []
    for episode in range(1, episodes + 1):
        report = run_training_episode(agent, pattern, episode, trace_dir=trace_dir)
        reports.append(report)
        row = LearningCurveRow(
            episode=episode,
            avg_queue=report.result.avg_queue_length,
            avg_wait=report.result.avg_wait_time,
            mean_loss=report.mean_loss,
            epsilon=report.epsilon_at_end,
        )
        curve.append(row)
        logger.info(
            "episode=%d/%d pattern=%s avg_queue=%.3f avg_wait=%.2f loss=%.4f eps=%.3f",
            episode,
            episodes,
            pattern.id,
            row.avg_queue,
            row.avg_wait,
            row.mean_loss,
            row.epsilon,
        )

    network = agent.online
    network.seed = master_seed
    network.trained_on_pattern = pattern.id
    if out_dir is not None:
        save_params(network, out_dir / "model.json")
        write_csv(out_dir / "learning_curve.csv", LEARNING_CURVE_COLUMNS, (r.dict() for r in curve))
    return TrainOutcome(network=network, curve=curve, reports=reports)


@dataclass
class Evaluation:
    controller: str
    pattern: str
    stats: EvalStats
    runs: List[EvalRun]
    results: List[EpisodeResult]


def evaluate(
    spec: ControllerSpec,
    pattern: PatternSpec,
    runs: int,
    seed_base: int,
    params: SimParams,
    workers: int = 1,
    trace_dir: Optional[str] = None,
) -> Evaluation:
    """Run ``runs`` episodes; run i uses seed ``seed_base + i`` and nothing else."""
    seeds = [seed_base + i for i in range(runs)]
    jobs = [(spec, pattern, seed, params, trace_dir) for seed in seeds]
    results: List[EpisodeResult] = run_jobs(run_episode, jobs, workers)
    rows = [
        EvalRun(
            controller=spec.kind,
            pattern=pattern.id,
            seed=seed,
            avg_queue=r.avg_queue_length,
            avg_wait=r.avg_wait_time,
        )
        for seed, r in zip(seeds, results)
    ]
    stats = eval_stats(results)
    logger.info(
        "controller=%s pattern=%s runs=%d median_queue=%.3f median_wait=%.2f",
        spec.kind,
        pattern.id,
        runs,
        stats.avg_queue_length.median,
        stats.avg_wait_time.median,
    )
    return Evaluation(controller=spec.kind, pattern=pattern.id, stats=stats, runs=rows, results=results)


def write_eval_runs(path: Path, evaluations: Sequence[Evaluation]) -> Path:
    return write_csv(path, EVAL_RUN_COLUMNS, (row.dict() for ev in evaluations for row in ev.runs))


@dataclass
class CompareOutcome:
    summary: CompareSummary
    evaluations: List[Evaluation]


def compare(
    pattern: PatternSpec,
    network: NetworkParams,
    runs: int,
    seed_base: int,
    params: SimParams,
    baseline: BaselineConfig,
    workers: int = 1,
    out_dir: Optional[Path] = None,
    trace_dir: Optional[str] = None,
) -> CompareOutcome:
    evaluations: List[Evaluation] = []
    for kind in COMPARE_ORDER:
        spec = ControllerSpec(kind=kind, baseline=baseline, network=network if kind == "rl" else None)
        evaluations.append(evaluate(spec, pattern, runs, seed_base, params, workers, trace_dir))

    by_kind = {ev.controller: ev.stats for ev in evaluations}
    rl = by_kind["rl"]
    improvements = {
        kind: {
            "avg_queue_length": improvement_pct(
                by_kind[kind].avg_queue_length.median, rl.avg_queue_length.median
            ),
            "avg_wait_time": improvement_pct(by_kind[kind].avg_wait_time.median, rl.avg_wait_time.median),
        }
        for kind in COMPARE_ORDER
        if kind != "rl"
    }
    summary = CompareSummary(
        pattern=pattern.id,
        runs=runs,
        stats=by_kind,
        median_improvement_pct=improvements,
        notes=["wait time includes vehicles still queued at the end of each episode"],
    )
    if out_dir is not None:
        write_json(out_dir / "compare_summary.json", summary.dict())
        write_eval_runs(out_dir / "eval_runs.csv", evaluations)
    return CompareOutcome(summary=summary, evaluations=evaluations)


def load_models(
    paths: Mapping[str, str],
    expected_architecture: Optional[Sequence[int]] = DEFAULT_ARCHITECTURE,
) -> Dict[str, NetworkParams]:
    """Load every model, reporting all missing files in one error."""
    missing = [p for p in paths.values() if not Path(p).is_file()]
    if missing:
        raise MissingArtifactError(missing)
    return {key: load_params(p, expected_architecture) for key, p in paths.items()}


@dataclass
class GeneralizationMatrix:
    train_ids: List[str]
    test_ids: List[str]
    cells: List[GeneralizationCell]

    def cell(self, train_id: str, test_id: str) -> GeneralizationCell:
        for c in self.cells:
            if c.train_pattern == train_id and c.test_pattern == test_id:
                return c
        raise KeyError((train_id, test_id))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.train_ids), len(self.test_ids)


def generalization(
    models: Mapping[str, NetworkParams],
    test_ids: Sequence[str],
    runs: int,
    seed_base: int,
    params: SimParams,
    workers: int = 1,
    out_dir: Optional[Path] = None,
) -> GeneralizationMatrix:
    cells: List[GeneralizationCell] = []
    evaluations: List[Evaluation] = []
    for train_id, network in models.items():
        spec = ControllerSpec(kind="rl", network=network)
        for test_id in test_ids:
            ev = evaluate(spec, build_pattern(test_id), runs, seed_base, params, workers)
            evaluations.append(ev)
            cell = GeneralizationCell(
                train_pattern=train_id,
                test_pattern=test_id,
                mean_queue=ev.stats.avg_queue_length.mean,
                mean_wait=ev.stats.avg_wait_time.mean,
            )
            cells.append(cell)
            ref = REFERENCE_CELLS.get(train_id, {}).get(test_id)
            ref_text = f"{ref[0]:.2f}/{ref[1]:.2f}" if ref else "n/a"
            logger.info(
                "train=%s test=%s measured=%.2f/%.2f reference=%s",
                train_id,
                test_id,
                cell.mean_queue,
                cell.mean_wait,
                ref_text,
            )
    matrix = GeneralizationMatrix(train_ids=list(models), test_ids=list(test_ids), cells=cells)
    if out_dir is not None:
        write_csv(out_dir / "generalization.csv", GENERALIZATION_COLUMNS, (c.dict() for c in cells))
    return matrix


def finite_matrix(matrix: GeneralizationMatrix) -> bool:
    return all(np.isfinite(c.mean_queue) and np.isfinite(c.mean_wait) for c in matrix.cells)
