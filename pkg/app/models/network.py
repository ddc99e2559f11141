from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass
class NetworkParams:
    weights: List[np.ndarray]  # weights[k] has shape (fan_in, fan_out)
    biases: List[np.ndarray]
    seed: Optional[int] = None
    trained_on_pattern: Optional[str] = None

    @property
    def architecture(self) -> List[int]:
        return [int(self.weights[0].shape[0])] + [int(w.shape[1]) for w in self.weights]

    def tensors(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out


@dataclass
class Gradients:
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def tensors(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out


@dataclass
class OptimizerState:
    learning_rate: float = 0.01
    momentum: float = 0.9
    velocity: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: NetworkParams, learning_rate: float, momentum: float) -> "OptimizerState":
        return cls(
            learning_rate=learning_rate,
            momentum=momentum,
            velocity=[np.zeros_like(t) for t in params.tensors()],
        )
