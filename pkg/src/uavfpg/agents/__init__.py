"""Ally and opponent policies: scripted baselines and MADDPG."""
from __future__ import annotations

from typing import Optional

import numpy as np

from uavfpg import ConfigError
from uavfpg.agents.scripted import (
    FixedFrequencyAlly, KbAlly, PatrolOpponent, PlannedOpponent, Policy, PursuitOpponent,
    RandomHopAlly, make_planner,
)


def build_policy(agent: str, cfg, env, rng: np.random.Generator, nets: Optional[dict] = None,
                 endpoint: Optional[str] = None, api_key: Optional[str] = None):
    """Policy for ``agent`` ("ally" or "opponent") as selected in ``cfg.agents``."""
    kind = getattr(cfg.agents, agent)
    if kind == "maddpg":
        from uavfpg.agents.maddpg import MaddpgPolicy
        key = f"{agent}.actor"
        if not nets or key not in nets:
            raise ConfigError(f"agents.{agent}=maddpg needs a checkpoint holding '{key}'")
        return MaddpgPolicy(nets[key], 0.0, rng)
    if agent == "ally":
        if kind == "fixed":
            return FixedFrequencyAlly()
        if kind == "random_hop":
            return RandomHopAlly(cfg.agents.p_hop, rng)
        return KbAlly(rng)
    if kind == "patrol" or (kind == "planned" and cfg.planner.mode == "pattern"):
        return PatrolOpponent(env.opponent_pattern, rng)
    if kind == "pursuit":
        return PursuitOpponent(rng)
    planner_rng, jam_rng = rng.spawn(2)
    planner = make_planner(cfg, env, planner_rng, endpoint, api_key)
    return PlannedOpponent(planner, cfg.planner.history_len, cfg.planner.replan_interval, jam_rng)


__all__ = ["build_policy", "Policy", "FixedFrequencyAlly", "RandomHopAlly", "KbAlly",
           "PatrolOpponent", "PursuitOpponent", "PlannedOpponent"]
