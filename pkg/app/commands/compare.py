import argparse

from app.commands.common import (
    add_config_flag,
    add_pattern_flag,
    add_runs_flag,
    prepare_out_dir,
    require_model,
    resolve,
)
from app.core.config import get_settings
from app.schemas.config import RunConfig
from app.services.harness import compare
from app.services.patterns import build_pattern


def register(sub: argparse._SubParsersAction) -> None:
    parser = sub.add_parser("compare", help="benchmark the learned controller against the three baselines")
    add_config_flag(parser)
    add_pattern_flag(parser)
    add_runs_flag(parser)
    parser.add_argument("--model", metavar="PATH", help="model trained on this pattern")
    parser.set_defaults(handler=lambda args: cmd_compare(resolve(args)))


def cmd_compare(config: RunConfig) -> int:
    run = config.run
    network = require_model(config)
    out = prepare_out_dir(config, "compare")
    outcome = compare(
        build_pattern(run.pattern),
        network,
        runs=run.runs,
        seed_base=run.seed,
        params=config.sim,
        baseline=config.baseline,
        workers=get_settings().workers,
        out_dir=out,
        trace_dir=str(out / "traces") if run.trace else None,
    )
    for kind, pct in outcome.summary.median_improvement_pct.items():
        print(
            f"[compare] pattern={run.pattern} rl_vs_{kind}: "
            f"queue {pct['avg_queue_length']:+.1f}% wait {pct['avg_wait_time']:+.1f}%"
        )
    return 0
