"""Hand-written ally and opponent policies.

Every policy maps the current environment to a raw action vector in
[-5, 5] with the same layout the learned actors use, so scripted and
learned agents are interchangeable in the game loop.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from uavfpg.game import MAX_ACTION, FrequencyPointGame, StepResult, detection_due
from uavfpg.planner import (
    LlmClient, LlmClientConfig, Planner, PlannedPath, PositionRewardHistory,
)
from uavfpg.world import pattern_waypoint

ON, OFF = MAX_ACTION, -MAX_ACTION


def to_raw(u: float) -> float:
    """Inverse of the [0, 1] action normalization."""
    return u * 2 * MAX_ACTION - MAX_ACTION


def move_toward(pos, target, step_length: float) -> list[float]:
    """Raw move components that carry ``pos`` toward ``target``.

    The vector is scaled uniformly (direction preserved) so that no
    component exceeds the action bound.
    """
    v = np.asarray(target, dtype=np.float64) - np.asarray(pos, dtype=np.float64)
    raw = v * (MAX_ACTION / step_length)
    peak = np.abs(raw).max()
    if peak > MAX_ACTION:
        raw *= MAX_ACTION / peak
    return raw.tolist()


class Policy:
    name = "policy"

    def reset(self, env: FrequencyPointGame) -> None:
        pass

    def act(self, env: FrequencyPointGame) -> np.ndarray:
        raise NotImplementedError

    def observe(self, env: FrequencyPointGame, result: StepResult) -> None:
        pass


# -- ally ----------------------------------------------------------------------

class FixedFrequencyAlly(Policy):
    name = "fixed"

    def act(self, env):
        return np.array([OFF, OFF, 0.0])


class RandomHopAlly(Policy):
    """Hops to a uniformly random channel with probability ``p_hop`` each tick."""

    name = "random_hop"

    def __init__(self, p_hop: float = 0.5, rng: Optional[np.random.Generator] = None):
        self.p_hop = p_hop
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def act(self, env):
        hop = ON if self.rng.random() < self.p_hop else OFF
        return np.array([hop, OFF, self.rng.uniform(-MAX_ACTION, MAX_ACTION)])


class KbAlly(Policy):
    """Hops when the opponent has locked onto the ally frequency or the channel is jammed.

    The target channel comes from the knowledge base inside the environment
    when it is enabled; otherwise the random channel proposed here is used.
    """

    name = "kb"

    def __init__(self, rng: Optional[np.random.Generator] = None):
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def act(self, env):
        s = env.state
        locked = s.f_jam_detected is not None and abs(s.f_jam_detected - s.f_ally) < 1e-9
        hop = ON if (locked or s.overlap > 0.0) else OFF
        return np.array([hop, OFF, self.rng.uniform(-MAX_ACTION, MAX_ACTION)])


# -- opponent ------------------------------------------------------------------

class _Jammer(Policy):
    """Shared jamming behaviour: track the detected frequency, re-pick the
    jamming type at every detection check, jam blind on a random frequency
    while nothing is detected."""

    def __init__(self, rng: Optional[np.random.Generator] = None):
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._type_u = 0.5

    def reset(self, env):
        self._pick_type(env)

    def _pick_type(self, env):
        n = len(env.jam_types)
        self._type_u = (int(self.rng.integers(n)) + 0.5) / n

    def jam_components(self, env) -> list[float]:
        s = env.state
        if detection_due(s.sim_time, env.check_interval):
            self._pick_type(env)
        return [to_raw(self._type_u), self.rng.uniform(-MAX_ACTION, MAX_ACTION), ON]

    def target(self, env):
        raise NotImplementedError

    def act(self, env):
        jam = self.jam_components(env)
        return np.array(jam + move_toward(env.state.p_opponent, self.target(env), env.limits.step_length))


class PatrolOpponent(_Jammer):
    name = "patrol"

    def __init__(self, pattern=None, rng=None):
        super().__init__(rng)
        self.pattern = pattern
        self.s = 0.0

    def reset(self, env):
        super().reset(env)
        if self.pattern is None:
            self.pattern = env.opponent_pattern
        self.s = 0.0

    def target(self, env):
        self.s += env.limits.step_length
        return pattern_waypoint(self.pattern, self.s)


class PursuitOpponent(_Jammer):
    name = "pursuit"

    def target(self, env):
        return env.state.p_ally


class PlannedOpponent(_Jammer):
    """Follows a planned waypoint list, replanned at episode start.

    With ``replan_interval`` > 0 the path is replanned every that many ticks
    (the last waypoint is held in between); with 0 a new path is requested
    as soon as the current one is used up.
    """

    name = "planned"

    def __init__(self, planner: Planner, history_len: int = 20, replan_interval: int = 0, rng=None):
        super().__init__(rng)
        self.planner = planner
        self.history = PositionRewardHistory(history_len)
        self.replan_interval = replan_interval
        self.path: Optional[PlannedPath] = None
        self.i = 0

    def replan(self, env):
        s = env.state
        self.path = self.planner.plan(self.history, s.p_opponent, s.p_ally)
        self.i = 0

    def reset(self, env):
        super().reset(env)
        self.replan(env)

    def target(self, env):
        if self.replan_interval:
            if env.state.tick > 0 and env.state.tick % self.replan_interval == 0:
                self.replan(env)
        elif self.i >= len(self.path):
            self.replan(env)
        wp = self.path[min(self.i, len(self.path) - 1)]
        self.i += 1
        return wp

    def observe(self, env, result):
        self.history.append(result.state.p_opponent, result.r_opponent)


def make_planner(cfg, env: FrequencyPointGame, rng: np.random.Generator, endpoint: Optional[str] = None,
                 api_key: Optional[str] = None) -> Planner:
    p = cfg.planner
    client = None
    if p.mode == "llm":
        client = LlmClient(LlmClientConfig(endpoint or p.endpoint, p.model, p.timeout, p.max_retries,
                                           p.temperature, api_key))
    return Planner(env.limits, env.bounds, p.n_waypoints, client, rng)
