"""Game loop driving two policies through the environment."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Optional

import numpy as np

from uavfpg.agents import build_policy
from uavfpg.config import ScenarioConfig
from uavfpg.game import FrequencyPointGame


@dataclass
class RunResult:
    records: list = field(default_factory=list)
    steps: int = 0
    episodes: int = 0
    sum_r_ally: float = 0.0
    sum_r_opponent: float = 0.0
    fallback_events: list = field(default_factory=list)

    @property
    def mean_r_ally(self) -> float:
        return self.sum_r_ally / self.steps if self.steps else 0.0

    @property
    def mean_r_opponent(self) -> float:
        return self.sum_r_opponent / self.steps if self.steps else 0.0


def record_line(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


def simulate(cfg: ScenarioConfig, seed: Optional[int] = None, steps: Optional[int] = None,
             log: Optional[IO[str]] = None, keep_records: bool = True, nets: Optional[dict] = None,
             endpoint: Optional[str] = None, api_key: Optional[str] = None) -> RunResult:
    """Play ``steps`` ticks, resetting at episode ends, optionally logging one JSON line per tick."""
    seed = cfg.seed if seed is None else seed
    steps = cfg.world.total_steps if steps is None else steps
    env = FrequencyPointGame(cfg)
    env.reset(seed)
    ally_ss, opp_ss = np.random.SeedSequence(seed).spawn(3)[1:]
    ally = build_policy("ally", cfg, env, np.random.default_rng(ally_ss), nets, endpoint, api_key)
    opp = build_policy("opponent", cfg, env, np.random.default_rng(opp_ss), nets, endpoint, api_key)
    ally.reset(env)
    opp.reset(env)

    out = RunResult()
    for _ in range(steps):
        res = env.step(ally.act(env), opp.act(env))
        ally.observe(env, res)
        opp.observe(env, res)
        out.steps += 1
        out.sum_r_ally += res.r_ally
        out.sum_r_opponent += res.r_opponent
        if keep_records:
            out.records.append(res.record)
        if log is not None:
            log.write(record_line(res.record) + "\n")
        if res.done:
            out.episodes += 1
            env.reset()
            ally.reset(env)
            opp.reset(env)
    planner = getattr(opp, "planner", None)
    if planner is not None:
        out.fallback_events = list(planner.events)
    return out
