from typing import Dict, List, Optional

from pydantic import BaseModel, Field, root_validator


class LayerDocument(BaseModel):
    w: List[List[float]]
    b: List[float]


class ModelDocument(BaseModel):
    architecture: List[int]
    activation: str = "relu"
    layers: List[LayerDocument]
    seed: Optional[int] = None
    trained_on_pattern: Optional[str] = None

    @root_validator(skip_on_failure=True)
    def _layer_count(cls, values):  # noqa: N805
        if values["activation"] != "relu":
            raise ValueError(f"unsupported activation {values['activation']!r}")
        if len(values["architecture"]) < 2:
            raise ValueError("architecture needs at least an input and an output size")
        if len(values["layers"]) != len(values["architecture"]) - 1:
            raise ValueError("layer count does not match architecture")
        return values


class EpisodeResult(BaseModel):
    avg_queue_length: float = Field(..., ge=0, description="halting vehicles per incoming lane")
    avg_wait_time: float = Field(..., ge=0, description="seconds per incoming vehicle")
    vehicles_entered: int = Field(..., ge=0)
    vehicles_departed: int = Field(..., ge=0)


class LearningCurveRow(BaseModel):
    episode: int
    avg_queue: float
    avg_wait: float
    mean_loss: float
    epsilon: float


class MetricStats(BaseModel):
    mean: float
    median: float
    q1: float
    q3: float
    min: float
    max: float


class EvalStats(BaseModel):
    n: int
    avg_queue_length: MetricStats
    avg_wait_time: MetricStats


class EvalRun(BaseModel):
    controller: str
    pattern: str
    seed: int
    avg_queue: float
    avg_wait: float


class GeneralizationCell(BaseModel):
    train_pattern: str
    test_pattern: str
    mean_queue: float
    mean_wait: float


class CompareSummary(BaseModel):
    pattern: str
    runs: int
    stats: Dict[str, EvalStats]
    median_improvement_pct: Dict[str, Dict[str, float]]
    notes: List[str] = []
