"""
Microscopic single-intersection simulator.

Twelve incoming lanes, Krauss car-following, Bernoulli arrivals per movement and
per step. Positions are front-bumper distances from the lane entry; the stop
line sits at ``lane_length``. Gaps handed to the car-following model are
bumper-to-bumper distances with ``min_gap`` already subtracted.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from app.models.signal import LaneStatus, SignalState
from app.models.traffic import MOVEMENTS, Lane, LaneRole, Turn, Vehicle, WorldState
from app.schemas.config import SimParams
from app.services.patterns import PatternSpec
from app.services.signals import lane_status

FREE_ROAD_GAP = 1.0e6


def krauss_safe_speed(v_follower: float, v_leader: float, gap: float, params: SimParams) -> float:
    tau = params.reaction_time
    v_bar = 0.5 * (v_leader + v_follower)
    v_safe = v_leader + (gap - v_leader * tau) / (tau + v_bar / params.decel)
    return max(0.0, v_safe)


def krauss_update(
    vehicle: Vehicle,
    leader_speed: float,
    gap: float,
    params: SimParams,
    rng: Optional[np.random.Generator] = None,
) -> float:
    v_des = min(
        params.v_max,
        vehicle.speed + params.accel * params.time_step,
        krauss_safe_speed(vehicle.speed, leader_speed, gap, params),
    )
    sigma = params.driver_imperfection
    if sigma > 0.0 and rng is not None:
        v_des -= sigma * params.accel * float(rng.random())
    return max(0.0, v_des)


def _must_stop(vehicle: Vehicle, status: LaneStatus, params: SimParams) -> bool:
    if status is LaneStatus.GREEN:
        return False
    if status is LaneStatus.RED:
        return True
    braking = vehicle.speed * vehicle.speed / (2.0 * params.decel)
    return braking <= params.lane_length - vehicle.position


def effective_leader(
    lane: Lane,
    vehicle_index: int,
    signal: SignalState,
    params: SimParams,
) -> Tuple[float, float]:
    """(leader_speed, gap) seen by the vehicle: a physical leader, the stop line, or free road."""
    vehicle = lane.vehicles[vehicle_index]
    if vehicle_index > 0:
        leader = lane.vehicles[vehicle_index - 1]
        gap = leader.position - params.vehicle_length - vehicle.position - params.min_gap
        return leader.speed, max(0.0, gap)
    if _must_stop(vehicle, lane_status(lane, signal), params):
        return 0.0, max(0.0, params.lane_length - vehicle.position)
    return params.v_max, FREE_ROAD_GAP


def _entry_has_space(lane: Lane, params: SimParams) -> bool:
    if not lane.vehicles:
        return True
    clear = lane.vehicles[-1].position - params.vehicle_length
    return clear >= params.vehicle_length + params.min_gap


def _lane_for_arrival(world: WorldState, index: int) -> Lane:
    movement = MOVEMENTS[index]
    if movement.turn is Turn.LEFT:
        return world.lane_for(movement.approach, LaneRole.LEFT)
    shared = world.lane_for(movement.approach, LaneRole.THROUGH_RIGHT)
    if movement.turn is Turn.RIGHT:
        return shared
    dedicated = world.lane_for(movement.approach, LaneRole.THROUGH)
    load_dedicated = len(dedicated.vehicles) + dedicated.backlog
    load_shared = len(shared.vehicles) + shared.backlog
    return shared if load_shared < load_dedicated else dedicated


def sample_arrivals(
    world: WorldState,
    pattern: PatternSpec,
    step: int,
    params: SimParams,
) -> List[Tuple[Lane, Vehicle]]:
    """One Bernoulli draw per movement; blocked arrivals wait in the lane backlog."""
    draws = world.rng.random(len(MOVEMENTS))
    hits = np.flatnonzero(draws < pattern.rates_at(step))
    for index in hits:
        lane = _lane_for_arrival(world, int(index))
        lane.pending.append(MOVEMENTS[index])
        world.metrics.vehicles_entered += 1
        world.metrics.arrivals_by_movement[index] += 1

    inserted: List[Tuple[Lane, Vehicle]] = []
    for lane in world.lanes:
        if lane.pending and _entry_has_space(lane, params):
            vehicle = Vehicle(
                id=world.next_vehicle_id,
                movement=lane.pending.popleft(),
                position=0.0,
                speed=params.v_max,
                entered_at=world.clock,
            )
            world.next_vehicle_id += 1
            lane.vehicles.append(vehicle)
            inserted.append((lane, vehicle))
    return inserted


def _move_lane(lane: Lane, signal: SignalState, params: SimParams, rng: np.random.Generator) -> None:
    # leaders first, so each follower reacts to its leader's new speed
    for i, vehicle in enumerate(lane.vehicles):
        leader_speed, gap = effective_leader(lane, i, signal, params)
        vehicle.speed = krauss_update(vehicle, leader_speed, gap, params, rng)
    for vehicle in lane.vehicles:
        vehicle.position += vehicle.speed * params.time_step


def _discharge(lane: Lane, world: WorldState, params: SimParams) -> int:
    # only an unheld vehicle can be past the line; the stop-line leader caps others at lane_length
    departed = 0
    while lane.vehicles and lane.vehicles[0].position > params.lane_length:
        lane.vehicles.pop(0)
        departed += 1
    if departed:
        lane.last_departure_at = world.clock + 1
        world.metrics.vehicles_departed += departed
    return departed


def step(
    world: WorldState,
    signal: SignalState,
    pattern: PatternSpec,
    params: SimParams,
) -> WorldState:
    """Advance the world by one time step under the given signal."""
    for lane in world.lanes:
        _move_lane(lane, signal, params, world.rng)
    for lane in world.lanes:
        _discharge(lane, world, params)
    sample_arrivals(world, pattern, world.clock, params)

    dt = params.time_step
    halting = 0
    metrics = world.metrics
    for lane in world.lanes:
        for vehicle in lane.vehicles:
            if vehicle.speed <= params.halt_threshold:
                vehicle.wait_accum += dt
                halting += 1
            loss = (1.0 - vehicle.speed / params.v_max) * dt
            vehicle.time_loss_accum += loss
    metrics.halting_vehicle_step_sum += halting
    metrics.wait_sum += halting * dt
    metrics.steps_elapsed += 1
    world.clock += 1
    return world


def queue_length(lane: Lane, params: Optional[SimParams] = None) -> int:
    threshold = params.halt_threshold if params is not None else 0.1
    return sum(1 for v in lane.vehicles if v.speed <= threshold)


def raw_queues(world: WorldState, params: Optional[SimParams] = None) -> np.ndarray:
    return np.array([queue_length(lane, params) for lane in world.lanes], dtype=np.int64)


def observe_state(world: WorldState, params: SimParams) -> np.ndarray:
    return raw_queues(world, params).astype(np.float64) / float(params.lane_capacity)


def total_queue(world: WorldState, params: Optional[SimParams] = None) -> int:
    return int(raw_queues(world, params).sum())
