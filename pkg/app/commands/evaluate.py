import argparse

from app.commands.common import (
    add_config_flag,
    add_controller_flags,
    add_pattern_flag,
    add_runs_flag,
    prepare_out_dir,
    require_model,
    resolve,
)
from app.core.config import get_settings
from app.schemas.config import RunConfig
from app.services.controllers import ControllerSpec
from app.services.harness import evaluate, write_eval_runs
from app.services.patterns import build_pattern
from app.services.results import write_json


def register(sub: argparse._SubParsersAction) -> None:
    parser = sub.add_parser("eval", help="evaluate one controller on one pattern over repeated seeds")
    add_config_flag(parser)
    add_pattern_flag(parser)
    add_runs_flag(parser)
    add_controller_flags(parser)
    parser.set_defaults(handler=_handle)


def _handle(args: argparse.Namespace) -> int:
    # a model alone selects the learned controller
    controller = args.controller
    if controller is None and args.model is not None:
        controller = "rl"
    return cmd_eval(resolve(args, controller=controller))


def cmd_eval(config: RunConfig) -> int:
    run = config.run
    network = require_model(config) if run.controller == "rl" else None
    out = prepare_out_dir(config, "eval")
    spec = ControllerSpec(kind=run.controller, baseline=config.baseline, network=network)
    evaluation = evaluate(
        spec,
        build_pattern(run.pattern),
        runs=run.runs,
        seed_base=run.seed,
        params=config.sim,
        workers=get_settings().workers,
        trace_dir=str(out / "traces") if run.trace else None,
    )
    write_eval_runs(out / "eval_runs.csv", [evaluation])
    write_json(
        out / "eval_summary.json",
        {"controller": run.controller, "pattern": run.pattern, "stats": evaluation.stats.dict()},
    )
    stats = evaluation.stats
    print(
        f"[eval] controller={run.controller} pattern={run.pattern} runs={stats.n} "
        f"median_queue={stats.avg_queue_length.median:.3f} median_wait={stats.avg_wait_time.median:.2f}"
    )
    return 0
