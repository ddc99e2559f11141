"""
Fully-connected Q-function approximator in numpy.

Hidden layers use rectified-linear units, the output layer is linear. Training
minimizes the mean Huber loss between Q(s)[a] and a constant learning target
with classic momentum SGD.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from app.core.errors import (
    ArchitectureMismatchError,
    MalformedModelError,
    MissingArtifactError,
    NonFiniteInputError,
)
from app.models.experience import Minibatch
from app.models.network import Gradients, NetworkParams, OptimizerState
from app.schemas.results import LayerDocument, ModelDocument

STATE_SIZE = 12
ACTION_COUNT = 8
DEFAULT_ARCHITECTURE = (STATE_SIZE, 64, 64, ACTION_COUNT)


def init_params(
    sizes: Sequence[int] = DEFAULT_ARCHITECTURE,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> NetworkParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases."""
    rng = rng if rng is not None else np.random.default_rng(seed)
    weights: List[np.ndarray] = []
    biases: List[np.ndarray] = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return NetworkParams(weights=weights, biases=biases, seed=seed)


def _activations(params: NetworkParams, x: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    inputs = [x]
    pre: List[np.ndarray] = []
    h = x
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pre.append(z)
        h = z if k == last else np.maximum(z, 0.0)
        inputs.append(h)
    return inputs, pre


def forward(params: NetworkParams, state: np.ndarray) -> np.ndarray:
    """Q-values for one state (n_in,) or a batch (B, n_in)."""
    x = np.asarray(state, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInputError("state contains non-finite entries")
    inputs, _ = _activations(params, x)
    return inputs[-1]


def huber(x: float, y: float) -> float:
    d = y - x
    if abs(d) < 1.0:
        return 0.5 * d * d
    return abs(d) - 0.5


def _huber_vec(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    d = np.abs(y - x)
    return np.where(d < 1.0, 0.5 * d * d, d - 0.5)


def td_targets(
    online: NetworkParams,
    target: NetworkParams,
    batch: Minibatch,
    gamma: float,
) -> np.ndarray:
    """y = R + gamma * Q_target(s')[argmax_a Q_online(s')[a]]; no terminal masking."""
    best = np.argmax(forward(online, batch.next_states), axis=1)
    q_next = forward(target, batch.next_states)
    evaluated = q_next[np.arange(len(batch)), best]
    return batch.rewards.astype(np.float64) + gamma * evaluated


def batch_gradients(
    online: NetworkParams,
    batch: Minibatch,
    targets: np.ndarray,
) -> Tuple[Gradients, float]:
    inputs, pre = _activations(online, batch.states)
    n = len(batch)
    rows = np.arange(n)
    chosen = inputs[-1][rows, batch.actions]
    loss = float(np.mean(_huber_vec(chosen, targets)))

    # d huber / dx = clip(x - y, -1, 1); only the taken action's output carries gradient
    delta = np.zeros_like(inputs[-1])
    delta[rows, batch.actions] = np.clip(chosen - targets, -1.0, 1.0) / n

    grad_w: List[np.ndarray] = [None] * len(online.weights)  # type: ignore[list-item]
    grad_b: List[np.ndarray] = [None] * len(online.biases)  # type: ignore[list-item]
    for k in range(len(online.weights) - 1, -1, -1):
        grad_w[k] = inputs[k].T @ delta
        grad_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ online.weights[k].T) * (pre[k - 1] > 0.0)
    return Gradients(weights=grad_w, biases=grad_b), loss


def sgd_momentum_step(
    params: NetworkParams,
    gradients: Gradients,
    opt: OptimizerState,
) -> NetworkParams:
    """v <- mu*v + g ; theta <- theta - lr*v, in place."""
    tensors = params.tensors()
    grads = gradients.tensors()
    if not opt.velocity:
        opt.velocity = [np.zeros_like(t) for t in tensors]
    if len(grads) != len(tensors) or len(opt.velocity) != len(tensors):
        raise ValueError("gradient / velocity tensor count does not match parameters")
    for theta, g, v in zip(tensors, grads, opt.velocity):
        if theta.shape != g.shape or theta.shape != v.shape:
            raise ValueError(f"shape mismatch: param {theta.shape}, grad {g.shape}, velocity {v.shape}")
        v *= opt.momentum
        v += g
        theta -= opt.learning_rate * v
    return params


def copy_into_target(online: NetworkParams) -> NetworkParams:
    return copy.deepcopy(online)


def save_params(params: NetworkParams, path: str | Path) -> Path:
    doc = ModelDocument(
        architecture=params.architecture,
        activation="relu",
        layers=[LayerDocument(w=w.tolist(), b=b.tolist()) for w, b in zip(params.weights, params.biases)],
        seed=params.seed,
        trained_on_pattern=params.trained_on_pattern,
    )
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    # json writes floats with repr(), which round-trips float64 exactly
    p.write_text(doc.json(), encoding="utf-8")
    return p


def load_params(
    path: str | Path,
    expected_architecture: Optional[Sequence[int]] = DEFAULT_ARCHITECTURE,
) -> NetworkParams:
    p = Path(path)
    if not p.is_file():
        raise MissingArtifactError([str(p)])
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
        doc = ModelDocument.parse_obj(raw)
    except (OSError, json.JSONDecodeError, ValidationError, TypeError) as exc:
        raise MalformedModelError(f"{p}: {exc}") from exc

    if expected_architecture is not None and list(doc.architecture) != list(expected_architecture):
        raise ArchitectureMismatchError(
            f"{p}: architecture {doc.architecture}, expected {list(expected_architecture)}"
        )
    weights = [np.array(layer.w, dtype=np.float64) for layer in doc.layers]
    biases = [np.array(layer.b, dtype=np.float64) for layer in doc.layers]
    sizes = doc.architecture
    for k, (w, b) in enumerate(zip(weights, biases)):
        if w.shape != (sizes[k], sizes[k + 1]) or b.shape != (sizes[k + 1],):
            raise ArchitectureMismatchError(f"{p}: layer {k} shape {w.shape} does not match {sizes}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise MalformedModelError(f"{p}: layer {k} holds non-finite values")
    return NetworkParams(
        weights=weights,
        biases=biases,
        seed=doc.seed,
        trained_on_pattern=doc.trained_on_pattern,
    )
