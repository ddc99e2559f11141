from __future__ import annotations

from contextlib import ExitStack
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.core.errors import InsufficientMemoryError
from app.core.seeding import AGENT_STREAM, EPISODE_STREAM, NETWORK_STREAM, derive_seed, make_rng
from app.models.experience import Minibatch, Transition
from app.models.network import NetworkParams, OptimizerState
from app.models.signal import Phase, SignalState
from app.models.traffic import WorldState
from app.schemas.config import AgentConfig, SimParams
from app.schemas.results import EpisodeResult
from app.services.episode import StepHook, episode_result, run_interval
from app.services.patterns import PatternSpec
from app.services.qnet import (
    ACTION_COUNT,
    STATE_SIZE,
    batch_gradients,
    copy_into_target,
    forward,
    init_params,
    sgd_momentum_step,
    td_targets,
)
from app.services.signals import actuate
from app.services.simulator import raw_queues
from app.services.trace import DecisionLog, open_sinks


class ReplayMemory:
    """Fixed-capacity ring buffer of transitions; the oldest entry is overwritten first."""

    def __init__(self, capacity: int = 10000, state_size: int = STATE_SIZE) -> None:
        self.capacity = int(capacity)
        self.states = np.zeros((self.capacity, state_size))
        self.actions = np.zeros(self.capacity, dtype=np.int64)
        self.rewards = np.zeros(self.capacity)
        self.next_states = np.zeros((self.capacity, state_size))
        self.cursor = 0
        self.occupancy = 0

    def __len__(self) -> int:
        return self.occupancy

    def store(self, transition: Transition) -> None:
        i = self.cursor
        self.states[i] = transition.s
        self.actions[i] = Phase(transition.a).action
        self.rewards[i] = transition.r
        self.next_states[i] = transition.s_next
        self.cursor = (i + 1) % self.capacity
        self.occupancy = min(self.occupancy + 1, self.capacity)

    def sample_batch(self, rng: np.random.Generator, batch_size: int) -> Minibatch:
        """Uniform with replacement over the current occupancy."""
        if self.occupancy < batch_size or self.occupancy == 0:
            raise InsufficientMemoryError(
                f"replay memory holds {self.occupancy} transitions, batch needs {batch_size}"
            )
        idx = rng.integers(0, self.occupancy, size=batch_size)
        return Minibatch(
            states=self.states[idx],
            actions=self.actions[idx],
            rewards=self.rewards[idx],
            next_states=self.next_states[idx],
        )


@dataclass(frozen=True)
class EpsilonSchedule:
    start: float = 0.9
    end: float = 0.05
    decay_steps: int = 15000

    def value(self, training_step: int) -> float:
        if training_step >= self.decay_steps:
            return self.end
        frac = training_step / float(self.decay_steps)
        return max(self.end, self.start - (self.start - self.end) * frac)


def select_action(
    q_values: np.ndarray,
    epsilon: float,
    rng: Optional[np.random.Generator] = None,
) -> Phase:
    """Epsilon-greedy over the eight phases; ties go to the lowest phase index."""
    if epsilon > 0.0:
        if rng is None:
            raise ValueError("exploration needs a random generator")
        if rng.random() < epsilon:
            return Phase.from_action(int(rng.integers(ACTION_COUNT)))
    return Phase.from_action(int(np.argmax(q_values)))


def compute_reward(l_t: int, l_next: int) -> int:
    return int(l_t) - int(l_next)


class DQNAgent:
    def __init__(self, cfg: AgentConfig, master_seed: int, params: SimParams) -> None:
        self.cfg = cfg
        self.params = params
        sizes = (STATE_SIZE, *cfg.hidden_sizes, ACTION_COUNT)
        self.online: NetworkParams = init_params(
            sizes, seed=master_seed, rng=make_rng(master_seed, NETWORK_STREAM)
        )
        self.target: NetworkParams = copy_into_target(self.online)
        self.optimizer = OptimizerState.for_params(self.online, cfg.learning_rate, cfg.momentum)
        self.memory = ReplayMemory(cfg.memory_size, STATE_SIZE)
        self.epsilon = EpsilonSchedule(cfg.epsilon_start, cfg.epsilon_end, cfg.epsilon_decay_steps)
        self.rng = make_rng(master_seed, AGENT_STREAM)
        self.master_seed = master_seed
        self.train_steps = 0

    def current_epsilon(self) -> float:
        return self.epsilon.value(self.train_steps)

    def act(self, state: np.ndarray, epsilon: float) -> Phase:
        return select_action(forward(self.online, state), epsilon, self.rng)

    def learn(self) -> Optional[float]:
        """One gradient step once the memory holds ``learn_start`` transitions."""
        if len(self.memory) < (self.cfg.learn_start or self.cfg.batch_size):
            return None
        batch = self.memory.sample_batch(self.rng, self.cfg.batch_size)
        targets = td_targets(self.online, self.target, batch, self.cfg.gamma)
        grads, loss = batch_gradients(self.online, batch, targets)
        sgd_momentum_step(self.online, grads, self.optimizer)
        return loss

    def sync_target(self) -> None:
        self.target = copy_into_target(self.online)


@dataclass
class CycleOutcome:
    world: WorldState
    signal: SignalState
    transition: Transition
    loss: Optional[float]
    queue_before: int
    queue_after: int


def decision_cycle(
    world: WorldState,
    signal: SignalState,
    agent: DQNAgent,
    pattern: PatternSpec,
    epsilon: Optional[float] = None,
    on_step: Optional[StepHook] = None,
    decisions: Optional[DecisionLog] = None,
) -> CycleOutcome:
    params = agent.params
    capacity = float(params.lane_capacity)
    s_raw = raw_queues(world, params)
    s = s_raw / capacity
    eps = agent.current_epsilon() if epsilon is None else epsilon
    action = agent.act(s, eps)

    signal = actuate(signal, action, params)
    if decisions is not None:
        decisions.record(world, signal)
    world, signal = run_interval(world, signal, pattern, params, on_step)

    s_next_raw = raw_queues(world, params)
    s_next = s_next_raw / capacity
    # reward is on raw counts, not the normalized network input
    reward = compute_reward(int(s_raw.sum()), int(s_next_raw.sum()))
    transition = Transition(s=s, a=action, r=reward, s_next=s_next)
    agent.memory.store(transition)
    loss = agent.learn()
    agent.train_steps += 1
    return CycleOutcome(
        world=world,
        signal=signal,
        transition=transition,
        loss=loss,
        queue_before=int(s_raw.sum()),
        queue_after=int(s_next_raw.sum()),
    )


@dataclass
class EpisodeReport:
    episode: int
    result: EpisodeResult
    mean_loss: float
    epsilon_at_end: float
    rewards: List[int] = field(default_factory=list)
    queue_first: int = 0
    queue_last: int = 0
    decision_clocks: List[int] = field(default_factory=list)


def run_training_episode(
    agent: DQNAgent,
    pattern: PatternSpec,
    episode: int,
    epsilon_override: Optional[float] = None,
    trace_dir: Optional[str] = None,
) -> EpisodeReport:
    """One full horizon of decision cycles, then a target refresh."""
    params = agent.params
    world = WorldState.fresh(derive_seed(agent.master_seed, EPISODE_STREAM, episode))
    signal = SignalState.initial()
    losses: List[float] = []
    rewards: List[int] = []
    clocks: List[int] = []
    queue_first: Optional[int] = None
    queue_last = 0

    with ExitStack() as stack:
        trace, decisions = open_sinks(stack, trace_dir, f"rl_{pattern.id}_ep{episode}", params)
        on_step = trace.on_step if trace is not None else None
        while world.clock < params.horizon:
            clocks.append(world.clock)
            outcome = decision_cycle(world, signal, agent, pattern, epsilon_override, on_step, decisions)
            world, signal = outcome.world, outcome.signal
            if queue_first is None:
                queue_first = outcome.queue_before
            queue_last = outcome.queue_after
            rewards.append(outcome.transition.r)
            if outcome.loss is not None:
                losses.append(outcome.loss)

    agent.sync_target()
    eps = agent.current_epsilon() if epsilon_override is None else epsilon_override
    return EpisodeReport(
        episode=episode,
        result=episode_result(world, params),
        mean_loss=float(np.mean(losses)) if losses else 0.0,
        epsilon_at_end=eps,
        rewards=rewards,
        queue_first=queue_first or 0,
        queue_last=queue_last,
        decision_clocks=clocks,
    )
