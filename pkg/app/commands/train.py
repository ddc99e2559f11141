import argparse

from app.commands.common import add_config_flag, add_pattern_flag, add_trace_flag, prepare_out_dir, resolve
from app.schemas.config import RunConfig
from app.services.harness import train
from app.services.patterns import build_pattern


def register(sub: argparse._SubParsersAction) -> None:
    parser = sub.add_parser("train", help="train a Q-network controller on one traffic pattern")
    add_config_flag(parser)
    add_pattern_flag(parser)
    parser.add_argument("--episodes", type=int, help="training episodes (default 200)")
    add_trace_flag(parser)
    parser.set_defaults(handler=lambda args: cmd_train(resolve(args)))


def cmd_train(config: RunConfig) -> int:
    out = prepare_out_dir(config, "train")
    run = config.run
    outcome = train(
        build_pattern(run.pattern),
        episodes=run.episodes,
        master_seed=run.seed,
        params=config.sim,
        agent_cfg=config.agent,
        out_dir=out,
        trace_dir=str(out / "traces") if run.trace else None,
    )
    last = outcome.curve[-1]
    print(
        f"[train] pattern={run.pattern} episodes={run.episodes} "
        f"final avg_queue={last.avg_queue:.3f} avg_wait={last.avg_wait:.2f} model={out / 'model.json'}"
    )
    return 0
