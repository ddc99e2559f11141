import numpy as np
import pytest

from app.models.signal import IntervalKind, Phase, SignalState
from app.models.traffic import Approach, LaneRole, Movement, Turn, WorldState
from app.schemas.config import SimParams
from app.services.patterns import build_pattern
from app.services.signals import actuate, tick
from app.services.simulator import (
    FREE_ROAD_GAP,
    effective_leader,
    krauss_safe_speed,
    krauss_update,
    observe_state,
    queue_length,
    raw_queues,
    step,
    total_queue,
)
from tests.conftest import make_vehicle

N_THROUGH = Movement(Approach.N, Turn.THROUGH)

NS_GREEN = SignalState(kind=IntervalKind.GREEN, phase=Phase.NS_THROUGH, remaining=1000)
NS_RED = SignalState(kind=IntervalKind.GREEN, phase=Phase.EW_THROUGH, remaining=1000)


def _north_through(world: WorldState):
    return world.lane_for(Approach.N, LaneRole.THROUGH)


def test_safe_speed_hand_values(params):
    assert krauss_safe_speed(10.0, 0.0, 0.0, params) == 0.0
    assert krauss_safe_speed(10.0, 5.0, 20.0, params) == pytest.approx(10.625)
    # unclamped above; krauss_update applies v_max
    assert krauss_safe_speed(0.0, 0.0, 100.0, params) == pytest.approx(100.0)


def test_update_from_rest_on_free_road(params):
    v = make_vehicle(N_THROUGH, 0.0, 0.0)
    assert krauss_update(v, params.v_max, FREE_ROAD_GAP, params) == pytest.approx(2.6)


def test_update_caps_at_v_max(params):
    v = make_vehicle(N_THROUGH, 0.0, params.v_max)
    assert krauss_update(v, params.v_max, FREE_ROAD_GAP, params) == params.v_max


def test_update_stops_behind_stationary_leader(params):
    v = make_vehicle(N_THROUGH, 0.0, 5.0)
    assert krauss_update(v, 0.0, 0.0, params) == 0.0


def test_driver_imperfection_only_slows(params):
    noisy = SimParams(driver_imperfection=0.5)
    v = make_vehicle(N_THROUGH, 0.0, 5.0)
    rng = np.random.default_rng(1)
    for _ in range(50):
        out = krauss_update(v, noisy.v_max, FREE_ROAD_GAP, noisy, rng)
        assert 5.0 + noisy.accel - 0.5 * noisy.accel <= out <= 5.0 + noisy.accel


def test_effective_leader_front_vehicle(params):
    world = WorldState.fresh(0)
    lane = _north_through(world)
    lane.vehicles.append(make_vehicle(N_THROUGH, 140.0, 0.0))
    assert effective_leader(lane, 0, NS_GREEN, params) == (params.v_max, FREE_ROAD_GAP)
    assert effective_leader(lane, 0, NS_RED, params) == (0.0, pytest.approx(10.0))


def test_effective_leader_gap_nets_length_and_min_gap(params):
    world = WorldState.fresh(0)
    lane = _north_through(world)
    lane.vehicles.append(make_vehicle(N_THROUGH, 60.0, 4.0, vid=0))
    lane.vehicles.append(make_vehicle(N_THROUGH, 40.0, 6.0, vid=1))
    speed, gap = effective_leader(lane, 1, NS_GREEN, params)
    assert speed == 4.0
    assert gap == pytest.approx(12.5)


def test_yellow_lets_a_vehicle_that_cannot_stop_proceed(params):
    yellow = SignalState(
        kind=IntervalKind.YELLOW, phase=Phase.NS_THROUGH, next_phase=Phase.EW_THROUGH, remaining=3
    )
    world = WorldState.fresh(0)
    lane = _north_through(world)
    lane.vehicles.append(make_vehicle(N_THROUGH, 149.0, params.v_max))
    assert effective_leader(lane, 0, yellow, params) == (params.v_max, FREE_ROAD_GAP)

    lane.vehicles[0] = make_vehicle(N_THROUGH, 50.0, 10.0)
    assert effective_leader(lane, 0, yellow, params) == (0.0, pytest.approx(100.0))


def test_empty_world_step_only_advances_clock(params, zero_pattern):
    world = step(WorldState.fresh(0), NS_GREEN, zero_pattern, params)
    assert world.clock == 1
    assert all(not lane.vehicles and lane.backlog == 0 for lane in world.lanes)
    assert world.metrics.steps_elapsed == 1


def test_vehicle_crossing_stop_line_departs(params, zero_pattern):
    world = WorldState.fresh(0)
    lane = _north_through(world)
    lane.vehicles.append(make_vehicle(N_THROUGH, 149.0, params.v_max))
    step(world, NS_GREEN, zero_pattern, params)
    assert lane.vehicles == []
    assert world.metrics.vehicles_departed == 1
    assert lane.last_departure_at == 1


def test_vehicle_held_at_red_accumulates_wait_and_time_loss(params, zero_pattern):
    world = WorldState.fresh(0)
    lane = _north_through(world)
    lane.vehicles.append(make_vehicle(N_THROUGH, params.lane_length, 0.0))
    for _ in range(10):
        step(world, NS_RED, zero_pattern, params)
    v = lane.vehicles[0]
    assert v.speed == 0.0
    assert v.wait_accum == pytest.approx(10.0)
    assert v.time_loss_accum == pytest.approx(10.0)
    assert world.metrics.halting_vehicle_step_sum == 10


def test_reaches_v_max_in_six_steps(params, zero_pattern):
    world = WorldState.fresh(0)
    lane = _north_through(world)
    lane.vehicles.append(make_vehicle(N_THROUGH, 0.0, 0.0))
    speeds = []
    for _ in range(6):
        step(world, NS_GREEN, zero_pattern, params)
        speeds.append(lane.vehicles[0].speed)
    assert speeds[4] < params.v_max
    assert speeds[5] == params.v_max


def test_queue_length_counts_halting_vehicles(params):
    world = WorldState.fresh(0)
    lane = _north_through(world)
    assert queue_length(lane, params) == 0
    for i, speed in enumerate([0.0, 0.0, 0.1, 5.0, 5.0]):
        lane.vehicles.append(make_vehicle(N_THROUGH, 140.0 - 8 * i, speed, vid=i))
    assert queue_length(lane, params) == 3


def test_observe_state_normalizes_by_capacity(params):
    world = WorldState.fresh(0)
    assert not observe_state(world, params).any()

    lane = _north_through(world)
    for i in range(params.lane_capacity):
        lane.vehicles.append(make_vehicle(N_THROUGH, 150.0 - 7.5 * i, 0.0, vid=i))
    state = observe_state(world, params)
    assert state.shape == (12,)
    assert state[lane.index] == 1.0
    assert raw_queues(world, params).sum() == total_queue(world, params) == params.lane_capacity


def test_entry_blocked_arrivals_wait_in_backlog(params):
    full = build_pattern("P1")
    world = WorldState.fresh(0)
    for _ in range(300):
        step(world, NS_RED, full, params)
    m = world.metrics
    backlog = sum(lane.backlog for lane in world.lanes)
    assert m.vehicles_entered == m.vehicles_departed + sum(len(lane.vehicles) for lane in world.lanes) + backlog
    assert all(len(lane.vehicles) <= params.lane_capacity for lane in world.lanes)


def _check_lanes(world: WorldState, params: SimParams) -> None:
    for lane in world.lanes:
        for lead, follow in zip(lane.vehicles, lane.vehicles[1:]):
            assert lead.position - params.vehicle_length - follow.position >= -1e-9
        for v in lane.vehicles:
            assert 0.0 <= v.speed <= params.v_max
    m = world.metrics
    on_road = sum(len(lane.vehicles) + lane.backlog for lane in world.lanes)
    assert m.vehicles_entered == m.vehicles_departed + on_road


def _fuzz(seed: int, steps: int, params: SimParams) -> None:
    pattern = build_pattern("P3")
    world = WorldState.fresh(seed)
    signal = SignalState.initial()
    chooser = np.random.default_rng(seed + 1000)
    last_halting = 0
    for _ in range(steps):
        if signal.at_decision_point:
            signal = actuate(signal, Phase.from_action(int(chooser.integers(8))), params)
        step(world, signal, pattern, params)
        signal = tick(signal)
        _check_lanes(world, params)
        assert world.metrics.halting_vehicle_step_sum >= last_halting
        last_halting = world.metrics.halting_vehicle_step_sum


@pytest.mark.parametrize("seed", [0, 1])
def test_random_phase_fuzz_keeps_invariants(params, seed):
    _fuzz(seed, 2000, params)


def test_fuzz_with_driver_imperfection():
    _fuzz(5, 2000, SimParams(driver_imperfection=0.5))


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_long_fuzz_keeps_invariants(params, seed):
    _fuzz(seed, 10_000, params)


def test_same_seed_gives_identical_metric_stream(params):
    pattern = build_pattern("P2")

    def run():
        world = WorldState.fresh(42)
        stream = []
        for _ in range(200):
            step(world, NS_GREEN, pattern, params)
            m = world.metrics
            stream.append((m.halting_vehicle_step_sum, m.vehicles_entered, m.wait_sum))
        return stream

    assert run() == run()
