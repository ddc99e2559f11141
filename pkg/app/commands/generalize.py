import argparse

from app.commands.common import add_config_flag, add_runs_flag, model_path, prepare_out_dir, resolve
from app.core.config import get_settings
from app.core.errors import ConfigError
from app.schemas.config import PATTERN_IDS, RunConfig
from app.services.harness import generalization, load_models
from app.services.qnet import ACTION_COUNT, STATE_SIZE


def register(sub: argparse._SubParsersAction) -> None:
    parser = sub.add_parser("generalize", help="evaluate each trained model on every pattern")
    add_config_flag(parser)
    add_runs_flag(parser, trace=False)
    parser.add_argument(
        "--models",
        metavar="DIRS",
        type=lambda s: tuple(p for p in s.split(",") if p),
        help="comma-separated run directories or model files, one per training pattern",
    )
    parser.set_defaults(handler=lambda args: cmd_generalize(resolve(args, models=args.models)))


def cmd_generalize(config: RunConfig) -> int:
    run = config.run
    if not run.models:
        raise ConfigError("run.models: at least one trained model is required (--models)")
    paths = {str(model_path(raw)): str(model_path(raw)) for raw in run.models}
    loaded = load_models(paths, expected_architecture=(STATE_SIZE, *config.agent.hidden_sizes, ACTION_COUNT))

    models = {}
    for i, (path, network) in enumerate(loaded.items()):
        train_id = network.trained_on_pattern or PATTERN_IDS[i % len(PATTERN_IDS)]
        if train_id in models:
            raise ConfigError(f"run.models: two models were trained on {train_id} ({path})")
        models[train_id] = network

    out = prepare_out_dir(config, "generalize")
    matrix = generalization(
        models,
        test_ids=PATTERN_IDS,
        runs=run.runs,
        seed_base=run.seed,
        params=config.sim,
        workers=get_settings().workers,
        out_dir=out,
    )
    rows, cols = matrix.shape
    print(f"[generalize] {rows}x{cols} cells -> {out / 'generalization.csv'}")
    return 0
