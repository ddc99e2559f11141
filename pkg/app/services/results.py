import csv
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

FLOAT_FORMAT = ".10g"


def fmt(value: Any) -> Any:
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return value


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row[c]) for c in columns])
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    with path.open("r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


LEARNING_CURVE_COLUMNS = ("episode", "avg_queue", "avg_wait", "mean_loss", "epsilon")
EVAL_RUN_COLUMNS = ("controller", "pattern", "seed", "avg_queue", "avg_wait")
GENERALIZATION_COLUMNS = ("train_pattern", "test_pattern", "mean_queue", "mean_wait")
