"""Desk-scale MADDPG: decentralized actors, per-agent centralized critics.

Each critic sees the shared state and the joint action (ally then
opponent, each scaled by 1/max_action). Agents that are not learning (for
example a scripted opponent) contribute the action recorded in the batch,
which also stands in for their next action when building critic targets.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from uavfpg import EncodingError
from uavfpg.agents.nets import MLP, Adam, soft_update
from uavfpg.buffer import Batch, ReplayBuffer
from uavfpg.config import MaddpgConfig, ScenarioConfig
from uavfpg.game import (
    ALLY_ACTION_DIM, MAX_ACTION, OPPONENT_ACTION_DIM, STATE_DIM, FrequencyPointGame,
)

log = logging.getLogger(__name__)

AGENTS = ("ally", "opponent")
ACTION_DIMS = {"ally": ALLY_ACTION_DIM, "opponent": OPPONENT_ACTION_DIM}
SLOTS = {"ally": slice(STATE_DIM, STATE_DIM + ALLY_ACTION_DIM),
         "opponent": slice(STATE_DIM + ALLY_ACTION_DIM, STATE_DIM + ALLY_ACTION_DIM + OPPONENT_ACTION_DIM)}
CRITIC_IN = STATE_DIM + ALLY_ACTION_DIM + OPPONENT_ACTION_DIM


def act(policy: MLP, state, sigma: float, rng: Optional[np.random.Generator] = None,
        max_action: float = MAX_ACTION) -> np.ndarray:
    """Actor output plus Gaussian exploration noise, clipped to the action bound."""
    s = np.asarray(state, dtype=np.float64)
    if s.shape != (STATE_DIM,):
        raise EncodingError(f"state must have {STATE_DIM} components, got shape {s.shape}")
    a = policy(s[None, :])[0]
    if sigma > 0:
        rng = rng if rng is not None else np.random.default_rng()
        a = a + rng.normal(0.0, sigma, a.shape)
    return np.clip(a, -max_action, max_action)


@dataclass
class AgentNets:
    name: str
    actor: MLP
    critic: MLP
    actor_target: MLP
    critic_target: MLP
    actor_opt: Adam
    critic_opt: Adam

    @classmethod
    def create(cls, name: str, hidden, lr: float, rng: np.random.Generator) -> "AgentNets":
        actor = MLP([STATE_DIM, *hidden, ACTION_DIMS[name]], "tanh", MAX_ACTION, rng)
        critic = MLP([CRITIC_IN, *hidden, 1], "linear", 1.0, rng)
        return cls(name, actor, critic, actor.copy(), critic.copy(),
                   Adam(actor.params, lr), Adam(critic.params, lr))

    def nets(self) -> dict:
        return {f"{self.name}.actor": self.actor, f"{self.name}.critic": self.critic,
                f"{self.name}.actor_target": self.actor_target,
                f"{self.name}.critic_target": self.critic_target}


def joint_input(s: np.ndarray, a_ally: np.ndarray, a_opp: np.ndarray) -> np.ndarray:
    return np.concatenate([s, a_ally / MAX_ACTION, a_opp / MAX_ACTION], axis=1)


def critic_loss_and_grads(agent: AgentNets, batch: Batch, agents: dict, cfg: MaddpgConfig):
    """MSE between Q(s, a) and r + gamma * Q_target(s', pi_target(s'))."""
    nxt = {}
    for name in AGENTS:
        other = agents.get(name)
        nxt[name] = other.actor_target(batch.s_next) if other is not None else batch.actions(name)
    q_next = agent.critic_target(joint_input(batch.s_next, nxt["ally"], nxt["opponent"]))[:, 0]
    y = cfg.reward_scale * batch.rewards(agent.name) + cfg.gamma * q_next
    q, cache = agent.critic.forward(joint_input(batch.s, batch.a_ally, batch.a_opponent))
    diff = q[:, 0] - y
    loss = float(np.mean(diff * diff))
    grads, _ = agent.critic.backward(cache, (2.0 * diff / len(diff))[:, None])
    return loss, grads


def critic_update(agent: AgentNets, batch: Batch, agents: dict, cfg: MaddpgConfig) -> float:
    """One optimizer step on the critic; returns the pre-step loss."""
    loss, grads = critic_loss_and_grads(agent, batch, agents, cfg)
    agent.critic_opt.step(agent.critic.params, grads)
    return loss


def actor_objective_and_grads(agent: AgentNets, batch: Batch, critic=None):
    """Mean Q(s, pi(s), a_other) and the actor gradients of its negation."""
    critic = critic if critic is not None else agent.critic
    a, acache = agent.actor.forward(batch.s)
    acts = {"ally": batch.a_ally, "opponent": batch.a_opponent}
    acts[agent.name] = a
    q, ccache = critic.forward(joint_input(batch.s, acts["ally"], acts["opponent"]))
    objective = float(np.mean(q))
    _, gx = critic.backward(ccache, np.full_like(q, 1.0 / len(q)))
    dq_da = gx[:, SLOTS[agent.name]] / MAX_ACTION
    grads, _ = agent.actor.backward(acache, -dq_da)
    return objective, grads


def actor_update(agent: AgentNets, batch: Batch, cfg: MaddpgConfig = None, critic=None) -> float:
    """One ascent step on mean Q w.r.t. the actor; returns the pre-step objective."""
    objective, grads = actor_objective_and_grads(agent, batch, critic)
    agent.actor_opt.step(agent.actor.params, grads)
    return objective


def sigma_at(step: int, total: int, cfg: MaddpgConfig) -> float:
    if total <= 1:
        return cfg.sigma_start
    frac = min(1.0, step / (total - 1))
    return cfg.sigma_start + frac * (cfg.sigma_end - cfg.sigma_start)


class MaddpgPolicy:
    """Adapter exposing a learned actor through the scripted-policy interface."""

    def __init__(self, actor: MLP, sigma: float = 0.0, rng: Optional[np.random.Generator] = None):
        self.actor = actor
        self.sigma = sigma
        self.rng = rng if rng is not None else np.random.default_rng(0)

    name = "maddpg"

    def reset(self, env):
        pass

    def act(self, env):
        return act(self.actor, env.encode(), self.sigma, self.rng)

    def observe(self, env, result):
        pass


@dataclass
class TrainResult:
    agents: dict
    curves: dict = field(default_factory=lambda: {"ally": [], "opponent": []})
    losses: dict = field(default_factory=dict)
    steps: int = 0

    def nets(self) -> dict:
        out = {}
        for a in self.agents.values():
            out.update(a.nets())
        return out


def learning_agents(cfg: ScenarioConfig) -> list[str]:
    return [name for name in AGENTS if getattr(cfg.agents, name) == "maddpg"]


def train(cfg: ScenarioConfig, mcfg: Optional[MaddpgConfig] = None, seed: Optional[int] = None,
          steps: Optional[int] = None, progress=None) -> TrainResult:
    """Run the act/step/store/sample/update loop serially.

    Agents configured as ``maddpg`` learn; the others follow their scripted
    policies. Curves hold per-episode mean rewards of both agents.
    """
    from uavfpg.agents import build_policy

    mcfg = mcfg or cfg.agents.maddpg
    seed = cfg.seed if seed is None else seed
    steps = mcfg.total_steps if steps is None else steps
    ss = np.random.SeedSequence(seed)
    net_ss, buf_ss, noise_ss, pol_ss = ss.spawn(4)
    net_rng = np.random.default_rng(net_ss)
    noise_rng = np.random.default_rng(noise_ss)

    learners = learning_agents(cfg)
    agents = {name: AgentNets.create(name, mcfg.hidden, mcfg.lr, net_rng) for name in learners}
    result = TrainResult(agents, losses={n: [] for n in learners})
    if steps <= 0:
        return result

    env = FrequencyPointGame(cfg)
    env.reset(seed)
    pol_rngs = [np.random.default_rng(s) for s in pol_ss.spawn(2)]
    scripted = {name: build_policy(name, cfg, env, pol_rngs[i])
                for i, name in enumerate(AGENTS) if name not in learners}
    for p in scripted.values():
        p.reset(env)
    buf = ReplayBuffer(mcfg.buffer_capacity, buf_ss)

    ep_r = {"ally": 0.0, "opponent": 0.0}
    ep_n = 0
    for t in range(steps):
        s = env.encode()
        sigma = sigma_at(t, steps, mcfg)
        actions = {}
        for name in AGENTS:
            if name in agents:
                if t < mcfg.warmup_steps:
                    actions[name] = noise_rng.uniform(-MAX_ACTION, MAX_ACTION, ACTION_DIMS[name])
                else:
                    actions[name] = act(agents[name].actor, s, sigma, noise_rng)
            else:
                actions[name] = np.asarray(scripted[name].act(env), dtype=np.float64)
        res = env.step(actions["ally"], actions["opponent"])
        for p in scripted.values():
            p.observe(env, res)
        buf.push(s, actions["ally"], actions["opponent"], res.r_ally, res.r_opponent, env.encode())
        ep_r["ally"] += res.r_ally
        ep_r["opponent"] += res.r_opponent
        ep_n += 1
        if res.done:
            for name in AGENTS:
                result.curves[name].append(ep_r[name] / ep_n)
            ep_r = {"ally": 0.0, "opponent": 0.0}
            ep_n = 0
            env.reset()
            for p in scripted.values():
                p.reset(env)
        if agents and len(buf) >= mcfg.batch_size and t >= mcfg.warmup_steps:
            batch = buf.sample(mcfg.batch_size)
            for name, agent in agents.items():
                result.losses[name].append(critic_update(agent, batch, agents, mcfg))
                actor_update(agent, batch, mcfg)
                soft_update(agent.actor_target, agent.actor, mcfg.tau)
                soft_update(agent.critic_target, agent.critic, mcfg.tau)
        if progress is not None:
            progress(t, res)
    result.steps = steps
    return result
