from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.models.signal import Phase


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: Phase
    r: int
    s_next: np.ndarray


@dataclass(frozen=True)
class Minibatch:
    states: np.ndarray  # (B, n_in)
    actions: np.ndarray  # (B,) action indices 0..7
    rewards: np.ndarray  # (B,)
    next_states: np.ndarray  # (B, n_in)

    def __len__(self) -> int:
        return int(self.actions.shape[0])
