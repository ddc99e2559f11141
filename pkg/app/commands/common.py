import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from app import __version__
from app.core.config import Settings, effective_config_document, get_settings, resolve_run_config
from app.core.errors import ConfigError, MissingArtifactError
from app.models.network import NetworkParams
from app.schemas.config import CONTROLLER_NAMES, PATTERN_IDS, RunConfig
from app.services.qnet import ACTION_COUNT, STATE_SIZE, load_params
from app.services.results import write_json

logger = logging.getLogger("cli")

# flag name -> RunSection field
_RUN_FLAGS = ("pattern", "episodes", "runs", "seed", "out", "model", "controller", "trace")


def add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON file with sim/agent/baseline/run sections")
    parser.add_argument("--seed", type=int, help="master seed (training) or seed base (evaluation)")
    parser.add_argument("--out", metavar="DIR", help="run directory for outputs")


def add_pattern_flag(parser: argparse.ArgumentParser, required: bool = False) -> None:
    parser.add_argument("--pattern", choices=PATTERN_IDS, required=required)


def add_trace_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trace", action="store_true", default=None, help="write per-step CSV traces under OUT/traces")


def add_runs_flag(parser: argparse.ArgumentParser, trace: bool = True) -> None:
    parser.add_argument("--runs", type=int, help="evaluation episodes per controller and pattern")
    if trace:
        add_trace_flag(parser)


def add_controller_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--controller", choices=CONTROLLER_NAMES)
    parser.add_argument("--model", metavar="PATH", help="trained model.json")


def resolve(args: argparse.Namespace, **extra: Any) -> RunConfig:
    run_overrides: Dict[str, Any] = {
        name: getattr(args, name) for name in _RUN_FLAGS if getattr(args, name, None) is not None
    }
    run_overrides.update({k: v for k, v in extra.items() if v is not None})
    return resolve_run_config(getattr(args, "config", None), {"run": run_overrides})


def prepare_out_dir(cfg: RunConfig, command: str, settings: Optional[Settings] = None) -> Path:
    settings = settings or get_settings()
    out = Path(cfg.run.out) if cfg.run.out else Path(settings.output_root) / f"{command}-{cfg.run.pattern}"
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"run.out: cannot create {out}: {exc}") from exc
    resolved = cfg.copy(update={"run": cfg.run.copy(update={"out": str(out)})})
    write_json(out / "effective_config.json", effective_config_document(resolved, __version__))
    logger.info("%s -> %s", command, out)
    return out


def model_path(raw: str) -> Path:
    p = Path(raw)
    return p / "model.json" if p.is_dir() else p


def require_model(cfg: RunConfig) -> NetworkParams:
    if not cfg.run.model:
        raise ConfigError("run.model: a trained model is required (--model PATH)")
    path = model_path(cfg.run.model)
    if not path.is_file():
        raise MissingArtifactError([str(path)])
    return load_params(path, expected_architecture=(STATE_SIZE, *cfg.agent.hidden_sizes, ACTION_COUNT))
