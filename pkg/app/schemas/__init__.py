from .config import AgentConfig, BaselineConfig, RunConfig, RunSection, SimParams  # noqa: F401
from .results import (  # noqa: F401
    CompareSummary,
    EpisodeResult,
    EvalRun,
    EvalStats,
    GeneralizationCell,
    LearningCurveRow,
    MetricStats,
    ModelDocument,
)
