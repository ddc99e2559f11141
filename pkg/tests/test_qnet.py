import json

import numpy as np
import pytest

from app.core.errors import (
    ArchitectureMismatchError,
    MalformedModelError,
    MissingArtifactError,
    NonFiniteInputError,
)
from app.models.experience import Minibatch
from app.models.network import Gradients, NetworkParams, OptimizerState
from app.services.qnet import (
    DEFAULT_ARCHITECTURE,
    batch_gradients,
    copy_into_target,
    forward,
    huber,
    init_params,
    load_params,
    save_params,
    sgd_momentum_step,
    td_targets,
)


def constant_net(sizes, output_bias) -> NetworkParams:
    weights = [np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(b) for b in sizes[1:]]
    biases[-1] = np.asarray(output_bias, dtype=np.float64)
    return NetworkParams(weights=weights, biases=biases)


def random_batch(rng, n_in, n_out, size) -> Minibatch:
    return Minibatch(
        states=rng.uniform(0, 1, size=(size, n_in)),
        actions=rng.integers(0, n_out, size=size),
        rewards=rng.integers(-5, 6, size=size).astype(np.float64),
        next_states=rng.uniform(0, 1, size=(size, n_in)),
    )


def test_zero_network_outputs_zero():
    net = constant_net(DEFAULT_ARCHITECTURE, np.zeros(8))
    assert not forward(net, np.random.default_rng(0).uniform(size=12)).any()


def test_hand_computed_forward():
    net = NetworkParams(
        weights=[np.array([[1.0, 0.0], [0.0, -1.0]]), np.array([[2.0], [3.0]])],
        biases=[np.zeros(2), np.array([0.5])],
    )
    # hidden pre-activations (1, -2) -> relu (1, 0) -> 2*1 + 0.5
    assert forward(net, np.array([1.0, 2.0])) == pytest.approx([2.5])


def test_forward_is_pure_and_batched():
    net = init_params(seed=0)
    states = np.random.default_rng(1).uniform(size=(5, 12))
    out = forward(net, states)
    assert out.shape == (5, 8)
    np.testing.assert_array_equal(out, forward(net, states))
    # batched and single-row matmuls may round differently
    np.testing.assert_allclose(out[2], forward(net, states[2]), rtol=1e-12, atol=1e-15)


def test_forward_rejects_non_finite_state():
    state = np.zeros(12)
    state[3] = np.nan
    with pytest.raises(NonFiniteInputError):
        forward(init_params(seed=0), state)


def test_init_is_seeded_and_bounded():
    a, b = init_params(seed=4), init_params(seed=4)
    for wa, wb in zip(a.tensors(), b.tensors()):
        np.testing.assert_array_equal(wa, wb)
    assert np.abs(a.weights[0]).max() <= 1.0 / np.sqrt(12)
    assert a.architecture == list(DEFAULT_ARCHITECTURE)


def test_huber_branches():
    assert huber(0.0, 0.5) == 0.125
    assert huber(0.0, 3.0) == 2.5
    assert huber(1.0, 1.0) == 0.0
    assert huber(0.0, 1.0) == 0.5
    assert 0.5 * 0.999999**2 == pytest.approx(huber(0.0, 0.999999), abs=1e-12)


def test_td_target_with_constant_target_net():
    online = init_params((4, 6, 3), seed=1)
    target = constant_net((4, 6, 3), [1.5, 1.5, 1.5])
    batch = random_batch(np.random.default_rng(2), 4, 3, 6)
    np.testing.assert_allclose(td_targets(online, target, batch, 0.999), batch.rewards + 0.999 * 1.5)


def test_td_target_evaluates_online_argmax_on_target_net():
    online = constant_net((12, 4, 8), [0, 0, 0, 9, 0, 0, 0, 0])
    target = constant_net((12, 4, 8), [5, 5, 5, 1, 5, 5, 5, 5])
    batch = Minibatch(
        states=np.zeros((1, 12)),
        actions=np.array([0]),
        rewards=np.array([2.0]),
        next_states=np.zeros((1, 12)),
    )
    assert td_targets(online, target, batch, 0.999)[0] == pytest.approx(2.999)


def test_td_target_after_copy_is_plain_q_learning():
    online = init_params((4, 6, 3), seed=5)
    target = copy_into_target(online)
    batch = random_batch(np.random.default_rng(6), 4, 3, 8)
    expected = batch.rewards + 0.9 * forward(target, batch.next_states).max(axis=1)
    np.testing.assert_allclose(td_targets(online, target, batch, 0.9), expected)


def test_zero_error_gives_zero_gradient():
    net = init_params((4, 8, 8, 3), seed=7)
    batch = random_batch(np.random.default_rng(8), 4, 3, 10)
    chosen = forward(net, batch.states)[np.arange(10), batch.actions]
    grads, loss = batch_gradients(net, batch, chosen)
    assert loss == 0.0
    assert all(not g.any() for g in grads.tensors())


def test_only_chosen_action_outputs_carry_gradient():
    net = init_params((4, 8, 3), seed=9)
    rng = np.random.default_rng(10)
    batch = random_batch(rng, 4, 3, 6)
    batch = Minibatch(batch.states, np.zeros(6, dtype=np.int64), batch.rewards * 7.0, batch.next_states)
    grads, _ = batch_gradients(net, batch, rng.uniform(-3, 3, size=6))
    assert not grads.weights[-1][:, 1:].any()
    assert not grads.biases[-1][1:].any()


def _loss(net, batch, targets) -> float:
    chosen = forward(net, batch.states)[np.arange(len(batch)), batch.actions]
    return float(np.mean([huber(x, y) for x, y in zip(chosen, targets)]))


def _near_kink(net, batch, targets, margin=1e-3) -> bool:
    h = batch.states
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b
        if k < len(net.weights) - 1:
            if np.any(np.abs(z) < margin):
                return True
            h = np.maximum(z, 0.0)
        else:
            chosen = z[np.arange(len(batch)), batch.actions]
            if np.any(np.abs(np.abs(chosen - targets) - 1.0) < margin):
                return True
    return False


def test_gradients_match_central_differences():
    rng = np.random.default_rng(12)
    eps = 1e-5
    checked = 0
    while checked < 20:
        net = init_params((4, 8, 8, 3), rng=rng)
        batch = random_batch(rng, 4, 3, 5)
        chosen = forward(net, batch.states)[np.arange(5), batch.actions]
        targets = chosen + rng.uniform(-3, 3, size=5)
        if _near_kink(net, batch, targets):
            continue
        grads, loss = batch_gradients(net, batch, targets)
        assert loss == pytest.approx(_loss(net, batch, targets))
        for theta, g in zip(net.tensors(), grads.tensors()):
            numeric = np.zeros_like(theta)
            for idx in np.ndindex(theta.shape):
                saved = theta[idx]
                theta[idx] = saved + eps
                up = _loss(net, batch, targets)
                theta[idx] = saved - eps
                down = _loss(net, batch, targets)
                theta[idx] = saved
                numeric[idx] = (up - down) / (2 * eps)
            np.testing.assert_allclose(g, numeric, rtol=1e-4, atol=1e-8)
        checked += 1


def test_momentum_step():
    net = init_params((3, 2), seed=0)
    before = [t.copy() for t in net.tensors()]

    zero = Gradients(weights=[np.zeros((3, 2))], biases=[np.zeros(2)])
    opt = OptimizerState.for_params(net, 0.01, 0.9)
    sgd_momentum_step(net, zero, opt)
    for a, b in zip(before, net.tensors()):
        np.testing.assert_array_equal(a, b)

    g = Gradients(weights=[np.full((3, 2), 0.5)], biases=[np.full(2, -1.0)])
    sgd_momentum_step(net, g, opt)
    np.testing.assert_allclose(net.weights[0], before[0] - 0.01 * 0.5)
    np.testing.assert_allclose(net.biases[0], before[1] + 0.01)


def test_momentum_velocity_unrolls_geometrically():
    net = init_params((3, 2), seed=0)
    opt = OptimizerState.for_params(net, 0.01, 0.9)
    g = Gradients(weights=[np.ones((3, 2))], biases=[np.ones(2)])
    for _ in range(50):
        sgd_momentum_step(net, g, opt)
    expected = (1 - 0.9**50) / (1 - 0.9)
    for v in opt.velocity:
        np.testing.assert_allclose(v, expected)
    assert expected == pytest.approx(10.0, rel=0.01)


def test_momentum_step_rejects_shape_mismatch():
    net = init_params((3, 2), seed=0)
    opt = OptimizerState.for_params(net, 0.01, 0.9)
    bad = Gradients(weights=[np.ones((2, 3))], biases=[np.ones(2)])
    with pytest.raises(ValueError):
        sgd_momentum_step(net, bad, opt)


def test_target_is_isolated_from_online_updates():
    online = init_params(seed=1)
    target = copy_into_target(online)
    inputs = np.random.default_rng(2).uniform(size=(100, 12))
    np.testing.assert_array_equal(forward(online, inputs), forward(target, inputs))
    snapshot = forward(target, inputs)

    online.weights[0] += 1.0
    np.testing.assert_array_equal(forward(target, inputs), snapshot)
    again = copy_into_target(target)
    np.testing.assert_array_equal(forward(again, inputs), snapshot)


def test_save_load_preserves_outputs(tmp_path):
    net = init_params(seed=3)
    net.trained_on_pattern = "P2"
    path = save_params(net, tmp_path / "model.json")
    loaded = load_params(path)
    inputs = np.random.default_rng(4).uniform(size=(20, 12))
    np.testing.assert_array_equal(forward(loaded, inputs), forward(net, inputs))
    assert loaded.trained_on_pattern == "P2"
    assert loaded.seed == 3


def test_load_wrong_architecture(tmp_path):
    path = save_params(init_params((12, 4, 8), seed=0), tmp_path / "small.json")
    with pytest.raises(ArchitectureMismatchError):
        load_params(path)
    assert load_params(path, expected_architecture=None).architecture == [12, 4, 8]


def test_load_inconsistent_layer_shapes(tmp_path):
    path = save_params(init_params((12, 4, 8), seed=0), tmp_path / "m.json")
    doc = json.loads(path.read_text())
    doc["architecture"] = [12, 5, 8]
    path.write_text(json.dumps(doc))
    with pytest.raises(ArchitectureMismatchError):
        load_params(path, expected_architecture=None)


def test_load_truncated_file(tmp_path):
    path = save_params(init_params(seed=0), tmp_path / "model.json")
    path.write_text(path.read_text()[:200])
    with pytest.raises(MalformedModelError):
        load_params(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(MissingArtifactError):
        load_params(tmp_path / "nope.json")
