"""
DDPG agent that outputs the HAPS beamforming matrix.

The state is the composite channel split into real and imaginary parts; the
action is the beamforming matrix packed the same way. Four networks take
part: the training actor and critic, and their slowly blended target
copies that produce the bootstrap target ``r + discount * Q'(s', mu'(s'))``.

The environment is quasi-static: within an episode the channel is fixed,
so the problem each episode is a contextual bandit seen through a
discounted critic.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import neural
from .beamforming import compute_sinr, project_power, total_power
from .channel import build_channels
from .errors import NumericalError
from .numerics import make_rng

log = logging.getLogger(__name__)

# Stream ids handed to make_rng for each consumer of randomness.
STREAM_LAYOUT = 0
STREAM_CHANNEL = 1
STREAM_INIT = 2
STREAM_NOISE = 3
STREAM_REPLAY = 4

SINR_FLOOR = 1e-12


@dataclass(frozen=True)
class AgentConfig:
    discount: float = 0.99
    learning_rate: float = 0.01
    weight_decay: float = 1e-5
    batch_size: int = 16
    buffer_capacity: int = 1000
    warmup_steps: int = 50
    noise_std: float = 0.1
    steps_per_episode: int = 4000
    max_episodes: int = 10
    seed: int = 42
    target_blend: float = 0.005
    # "soft" blends every step; "hard" copies every hard_period steps
    target_mode: str = "soft"
    hard_period: int = 100
    hidden: tuple = (256, 128)
    a_max: float | None = None
    lambda_power: float = 0.1
    lambda_violation: float = 1.0
    redraw_per_step: bool = False

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not 0.0 <= self.discount < 1.0:
            raise ValueError(f"discount must be in [0, 1), got {self.discount}")
        if not 1 <= self.batch_size <= self.buffer_capacity:
            raise ValueError("batch_size must be between 1 and buffer_capacity")
        if self.target_mode not in ("soft", "hard"):
            raise ValueError(f"unknown target_mode {self.target_mode!r}")
        if not 0.0 < self.target_blend <= 1.0:
            raise ValueError("target_blend must be in (0, 1]")

    @property
    def total_steps(self):
        return self.steps_per_episode * self.max_episodes


def default_a_max(cfg):
    """Per-coordinate bound at which a fully saturated action uses ``P_t``."""
    return math.sqrt(cfg.p_t) / math.sqrt(2 * cfg.n_antennas * cfg.n_streams)


# -- codecs ---------------------------------------------------------------

def encode_state(h):
    h = np.asarray(h)
    return np.concatenate([h.real.ravel(), h.imag.ravel()])


def decode_state(s, rows, cols):
    s = np.asarray(s, dtype=float)
    half = rows * cols
    if s.shape != (2 * half,):
        raise ValueError(f"state of length {s.size} does not match {rows}x{cols}")
    return (s[:half] + 1j * s[half:]).reshape(rows, cols)


def encode_action(w):
    return encode_state(w)


def decode_action(a, cfg):
    """Unpack an action into ``W`` and enforce the power budget."""
    a = np.asarray(a, dtype=float)
    n, k = cfg.n_antennas, cfg.n_streams
    if a.shape != (2 * n * k,):
        raise ValueError(f"action length {a.size} != 2 * N * K = {2 * n * k}")
    return project_power(decode_state(a, n, k), cfg.p_t)


def compute_reward(h, w, sigma2, cfg, lambda_power=0.1, lambda_violation=1.0):
    """Sum log-rate of the ground users minus power and SINR-shortfall penalties."""
    gamma = compute_sinr(h, w, sigma2).sinr[cfg.k_sat:]
    rate = float(np.sum(np.log2(1.0 + gamma)))
    power = total_power(w) / cfg.p_t
    shortfall = np.log10(cfg.gamma_min / np.maximum(gamma, SINR_FLOOR))
    return rate - lambda_power * power - lambda_violation * float(np.sum(np.maximum(0.0, shortfall)))


# -- replay ---------------------------------------------------------------

@dataclass(frozen=True)
class Experience:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray

    def __post_init__(self):
        if np.shape(self.state) != np.shape(self.next_state):
            raise ValueError("state and next_state dimensions differ")
        for part in (self.state, self.action, self.next_state, self.reward):
            if not np.all(np.isfinite(part)):
                raise ValueError("experience contains non-finite values")


@dataclass
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray

    def __len__(self):
        return len(self.rewards)


class ReplayBuffer:
    """Fixed-capacity FIFO of transitions, sampled uniformly with replacement."""

    def __init__(self, capacity=1000, rng=None):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.rng = rng if rng is not None else make_rng(0, STREAM_REPLAY)
        self._items = [None] * capacity
        self._next = 0
        self._size = 0

    def __len__(self):
        return self._size

    def push(self, exp):
        self._items[self._next] = exp
        self._next = (self._next + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def items(self):
        """Stored experiences, oldest first."""
        start = self._next if self._size == self.capacity else 0
        return [self._items[(start + i) % self.capacity] for i in range(self._size)]

    def sample_indices(self, batch_size, rng=None):
        if batch_size > self._size:
            raise ValueError(f"cannot sample {batch_size} from a buffer holding {self._size}")
        rng = rng if rng is not None else self.rng
        return rng.integers(0, self._size, size=batch_size)

    def sample(self, batch_size, rng=None):
        start = self._next if self._size == self.capacity else 0
        picks = [self._items[(start + i) % self.capacity]
                 for i in self.sample_indices(batch_size, rng)]
        return Batch(np.array([e.state for e in picks]),
                     np.array([e.action for e in picks]),
                     np.array([e.reward for e in picks], dtype=float),
                     np.array([e.next_state for e in picks]))


# -- networks and updates -------------------------------------------------

@dataclass
class Networks:
    actor: neural.MlpParams
    critic: neural.MlpParams
    actor_target: neural.MlpParams
    critic_target: neural.MlpParams


def make_networks(state_dim, action_dim, a_max, hidden, rng):
    actor = neural.init_params(neural.actor_arch(state_dim, action_dim, hidden, a_max), rng)
    critic = neural.init_params(neural.critic_arch(state_dim, action_dim, hidden), rng)
    return Networks(actor, critic, actor.copy(), critic.copy())


def q_values(critic, states, actions, mode="eval", update_stats=False):
    return neural.forward(critic, np.hstack([states, actions]), mode, update_stats)


def critic_target(batch, target_actor, target_critic, discount):
    next_actions, _ = neural.forward(target_actor, batch.next_states, "eval")
    q_next, _ = q_values(target_critic, batch.next_states, next_actions)
    return batch.rewards + discount * q_next[:, 0]


def td_loss(q, y):
    """Mean squared TD error and its gradient with respect to ``q``."""
    err = np.asarray(q, dtype=float).reshape(-1) - np.asarray(y, dtype=float).reshape(-1)
    return float(np.mean(err ** 2)), (2.0 / err.size) * err


def critic_loss_and_grads(batch, nets, y):
    q, cache = q_values(nets.critic, batch.states, batch.actions, "train", update_stats=True)
    loss, dq = td_loss(q, y)
    grads, _ = neural.backward(nets.critic, cache, dq[:, None])
    return loss, grads


def critic_update(batch, nets, cfg):
    """One descent step on the mean squared TD error; returns the pre-step loss."""
    y = critic_target(batch, nets.actor_target, nets.critic_target, cfg.discount)
    loss, grads = critic_loss_and_grads(batch, nets, y)
    neural.optimizer_step(nets.critic, grads, cfg.learning_rate, cfg.weight_decay)
    return loss


def action_gradient(critic, states, actions):
    """Critic values and ``dQ/da`` per sample, with the critic left untouched."""
    q, cache = q_values(critic, states, actions)
    _, grad_in = neural.backward(critic, cache, np.ones_like(q), param_grads=False)
    return q[:, 0], grad_in[:, critic.arch.state_dim:]


def policy_ascent(actor, cache, dq_da, cfg):
    """Move the actor along the mean of ``dQ/da`` chained through its outputs."""
    grads, _ = neural.backward(actor, cache, -dq_da / len(dq_da))
    neural.optimizer_step(actor, grads, cfg.learning_rate, cfg.weight_decay)


def actor_update(batch, nets, cfg):
    """Ascend the critic's value of the actor's own actions.

    The critic is evaluated with its running batch-norm statistics and is
    not modified. Returns the mean critic value before the step.
    """
    actions, cache = neural.forward(nets.actor, batch.states, "train")
    q, dq_da = action_gradient(nets.critic, batch.states, actions)
    policy_ascent(nets.actor, cache, dq_da, cfg)
    return float(np.mean(q))


def update_targets(nets, cfg, step):
    if cfg.target_mode == "soft":
        neural.blend_params(nets.actor_target, nets.actor, cfg.target_blend)
        neural.blend_params(nets.critic_target, nets.critic, cfg.target_blend)
    elif step % cfg.hard_period == 0:
        neural.copy_params(nets.actor_target, nets.actor)
        neural.copy_params(nets.critic_target, nets.critic)


# -- environment and training --------------------------------------------

class BeamformingEnv:
    """The scenario seen as an environment: state is the channel, action is ``W``."""

    def __init__(self, scenario, agent_cfg, rng=None):
        self.scenario = scenario
        self.cfg = scenario.cfg
        self.agent_cfg = agent_cfg
        self.rng = rng if rng is not None else make_rng(agent_cfg.seed, STREAM_CHANNEL)
        self.h = scenario.h

    @property
    def state_dim(self):
        return 2 * self.cfg.n_streams * self.cfg.n_antennas

    @property
    def action_dim(self):
        return 2 * self.cfg.n_antennas * self.cfg.n_streams

    def redraw(self):
        """Resynthesise the channel; only changes anything when fading is on."""
        if self.cfg.fading_variance > 0:
            self.h = build_channels(self.cfg, self.scenario.layout,
                                    self.scenario.profile, self.rng).h_composite
        return encode_state(self.h)

    def state(self):
        return encode_state(self.h)

    def evaluate(self, action):
        w = decode_action(action, self.cfg)
        report = compute_sinr(self.h, w, self.scenario.sigma2)
        reward = compute_reward(self.h, w, self.scenario.sigma2, self.cfg,
                                self.agent_cfg.lambda_power, self.agent_cfg.lambda_violation)
        return reward, w, report


@dataclass
class TrainingLog:
    step: list = field(default_factory=list)
    episode: list = field(default_factory=list)
    reward: list = field(default_factory=list)
    critic_loss: list = field(default_factory=list)
    total_power_watts: list = field(default_factory=list)
    min_user_sinr_db: list = field(default_factory=list)

    COLUMNS = ("step", "episode", "reward", "critic_loss",
               "total_power_watts", "min_user_sinr_db")

    def append(self, **row):
        for name in self.COLUMNS:
            getattr(self, name).append(row[name])

    def rewards(self):
        return np.asarray(self.reward)

    def rows(self):
        return zip(*(getattr(self, c) for c in self.COLUMNS))


@dataclass
class TrainResult:
    log: TrainingLog
    nets: Networks
    a_max: float


def act(nets, state):
    a, _ = neural.forward(nets.actor, state[None, :], "eval")
    return a[0]


def train(scenario, cfg, progress=None):
    """Run the full DDPG loop on one scenario."""
    env = BeamformingEnv(scenario, cfg, make_rng(cfg.seed, STREAM_CHANNEL))
    a_max = cfg.a_max if cfg.a_max is not None else default_a_max(scenario.cfg)
    nets = make_networks(env.state_dim, env.action_dim, a_max, cfg.hidden,
                         make_rng(cfg.seed, STREAM_INIT))
    noise_rng = make_rng(cfg.seed, STREAM_NOISE)
    buffer = ReplayBuffer(cfg.buffer_capacity, make_rng(cfg.seed, STREAM_REPLAY))
    k_sat = scenario.cfg.k_sat
    log_ = TrainingLog()

    step = 0
    for episode in range(cfg.max_episodes):
        state = env.redraw()
        for _ in range(cfg.steps_per_episode):
            step += 1
            noise = noise_rng.normal(0.0, cfg.noise_std * a_max, env.action_dim)
            action = np.clip(act(nets, state) + noise, -a_max, a_max)
            reward, w, report = env.evaluate(action)
            next_state = env.redraw() if cfg.redraw_per_step else state
            if not math.isfinite(reward):
                raise NumericalError(f"non-finite reward at step {step}: "
                                     f"power={total_power(w)!r} sinr={report.sinr!r}")
            buffer.push(Experience(state, action, reward, next_state))

            loss = float("nan")
            if step > cfg.warmup_steps and len(buffer) >= cfg.batch_size:
                batch = buffer.sample(cfg.batch_size)
                loss = critic_update(batch, nets, cfg)
                actor_update(batch, nets, cfg)
                update_targets(nets, cfg, step)
                if not math.isfinite(loss):
                    raise NumericalError(f"non-finite critic loss at step {step} "
                                         f"(reward {reward:.4g})")

            with np.errstate(divide="ignore"):
                min_sinr_db = float(10 * np.log10(report.sinr[k_sat:].min()))
            log_.append(step=step, episode=episode, reward=reward, critic_loss=loss,
                        total_power_watts=total_power(w), min_user_sinr_db=min_sinr_db)
            state = next_state
            if progress is not None:
                progress(step, reward)
    return TrainResult(log_, nets, a_max)


def evaluate_policy(nets, scenario, agent_cfg):
    """Reward, beamformer and SINR of the deterministic policy."""
    env = BeamformingEnv(scenario, agent_cfg)
    return env.evaluate(act(nets, env.state()))
