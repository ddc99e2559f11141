from .experience import Minibatch, Transition  # noqa: F401
from .network import Gradients, NetworkParams, OptimizerState  # noqa: F401
from .signal import IntervalKind, LaneStatus, Phase, SignalState  # noqa: F401
from .traffic import (  # noqa: F401
    APPROACHES,
    MOVEMENTS,
    Approach,
    Lane,
    LaneRole,
    MetricsAccumulator,
    Movement,
    Turn,
    Vehicle,
    WorldState,
)
