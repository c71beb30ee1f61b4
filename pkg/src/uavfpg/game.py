"""The frequency-point game environment.

One tick of :meth:`FrequencyPointGame.step` runs, in order: action decoding,
the ally's hop/spread decision (optionally routed through the knowledge
base), the opponent's jammer setup and movement, the ally's movement along
its Bezier path, the link budget, the detection schedule and both rewards.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from uavfpg import EncodingError
from uavfpg.config import ScenarioConfig
from uavfpg.knowledge import KnowledgeBase, classify_jamming, observe
from uavfpg.radio import (
    AllyChannel, FrequencyGrid, JamWidths, JammingSpec, JammingType, LinkBudget,
    link_budget, make_jamming,
)
from uavfpg.world import (
    BezierPath, MotionLimits, Vec3, WorldBounds, as_vec3, pattern_start,
    step_motion, trajectory_from_dict,
)

STATE_DIM = 15
ALLY_ACTION_DIM = 3
OPPONENT_ACTION_DIM = 6
ACTION_DIM = ALLY_ACTION_DIM + OPPONENT_ACTION_DIM
MAX_ACTION = 5.0
LOG_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CostModel:
    H: float = 2.0
    M: float = 8.0
    E: float = 1.0
    alpha: float = 0.5
    proximity_radius: float = 30.0

    def __post_init__(self):
        if self.H < 0 or self.E < 0 or self.alpha < 0 or self.proximity_radius <= 0:
            raise ValueError("H, E, alpha must be >= 0 and proximity_radius > 0")


def spreading_cost(t: float) -> float:
    """Cost of ``t`` consecutive seconds spent spread."""
    if t < 0:
        raise ValueError("spreading time must be non-negative")
    if t <= 10:
        return 0.5 * t
    if t <= 20:
        return 5.0 + 1.0 * (t - 10)
    if t <= 40:
        return 15.0 + 1.2 * (t - 20)
    return 39.0 + 1.5 * (t - 40)


def unit_step(x: float) -> float:
    return 1.0 if x > 0 else 0.0


def ally_reward(snr: float, cost: CostModel, t_spread: float, a_hopping: float) -> float:
    hop = 1.0 if a_hopping > 0.5 else 0.0
    return snr - cost.M - spreading_cost(t_spread) - cost.H * hop


def opponent_reward(p_opp, p_ally, d_snr: float, cost: CostModel) -> float:
    """Proximity bonus plus credit for degrading the ally's SNR (``d_snr`` = previous - current)."""
    dist = math.dist(p_opp, p_ally)
    return cost.E * unit_step(cost.proximity_radius - dist) + cost.alpha * d_snr


def detection_due(sim_time: float, interval: float) -> bool:
    q = sim_time / interval
    return sim_time > 0 and abs(q - round(q)) < 1e-9


def detect_center_frequency(sim_time: float, interval: float, snr: float, m: float,
                            f_ally: float, previous: Optional[float]) -> tuple[Optional[float], bool]:
    """Run the opponent's detection schedule.

    Returns ``(detected, fired)``. A detection fires only on schedule and
    only when the ally SNR is at least ``m``; otherwise the previous value
    is carried over unchanged.
    """
    if detection_due(sim_time, interval) and snr >= m:
        return f_ally, True
    return previous, False


@dataclass(frozen=True)
class GameState:
    p_ally: Vec3
    p_opponent: Vec3
    f_ally: float
    f_jam_detected: Optional[float]
    jam_type: Optional[JammingType]
    spread: bool
    t_spread: float
    snr_prev: float
    sim_time: float
    tick: int = 0
    jam: Optional[JammingSpec] = None
    overlap: float = 0.0
    ally_s: float = 0.0


def encode_state(state: GameState, grid: FrequencyGrid, bounds: WorldBounds) -> np.ndarray:
    """Canonical 15-vector observation shared by both agents."""
    onehot = [0.0] * 4
    if state.jam_type is not None:
        onehot[state.jam_type.index] = 1.0
    det = -1.0 if state.f_jam_detected is None else grid.normalize(state.f_jam_detected)
    v = [
        state.p_ally.x / bounds.x_max, state.p_ally.y / bounds.y_max, state.p_ally.z / bounds.z_max,
        state.p_opponent.x / bounds.x_max, state.p_opponent.y / bounds.y_max,
        state.p_opponent.z / bounds.z_max,
        grid.normalize(state.f_ally), det, *onehot,
        1.0 if state.spread else 0.0, state.t_spread / 100.0, state.snr_prev / 100.0,
    ]
    return np.asarray(v, dtype=np.float64)


def normalize_action(a: float) -> float:
    """Map a raw action component in [-5, 5] onto [0, 1]."""
    return min(1.0, max(0.0, (a + MAX_ACTION) / (2 * MAX_ACTION)))


@dataclass(frozen=True)
class AllyAction:
    hopping: float
    spread_toggle: float
    channel: float

    @classmethod
    def decode(cls, a) -> "AllyAction":
        a = np.asarray(a, dtype=np.float64).ravel()
        if a.shape != (ALLY_ACTION_DIM,):
            raise EncodingError(f"ally action needs {ALLY_ACTION_DIM} components, got {a.size}")
        return cls(*(normalize_action(x) for x in a))


@dataclass(frozen=True)
class OpponentAction:
    jam_type: float
    jam_freq: float
    track: float
    move: Vec3

    @classmethod
    def decode(cls, a) -> "OpponentAction":
        a = np.asarray(a, dtype=np.float64).ravel()
        if a.shape != (OPPONENT_ACTION_DIM,):
            raise EncodingError(f"opponent action needs {OPPONENT_ACTION_DIM} components, got {a.size}")
        mv = np.clip(a[3:6], -MAX_ACTION, MAX_ACTION)
        return cls(normalize_action(a[0]), normalize_action(a[1]), normalize_action(a[2]), Vec3(*mv))


@dataclass
class StepResult:
    state: GameState
    r_ally: float
    r_opponent: float
    done: bool
    budget: LinkBudget
    record: dict = field(default_factory=dict)


class FrequencyPointGame:
    """Single-threaded environment instance; see module docstring for tick order."""

    def __init__(self, cfg: ScenarioConfig):
        cfg.validate()
        self.cfg = cfg
        w, r, c, kb = cfg.world, cfg.radio, cfg.costs, cfg.kb
        self.bounds = WorldBounds(*w.bounds)
        self.limits = MotionLimits(w.max_speed, w.dt)
        self.grid = FrequencyGrid(tuple(r.grid)) if r.grid is not None else FrequencyGrid.uniform()
        self.band = self.grid.span
        self.widths = JamWidths(kb.tone_width, kb.narrowband_width, kb.broadband_halfwidth,
                                kb.comb_f0, kb.comb_spacing, kb.comb_teeth, kb.comb_tooth_width)
        self.costs = CostModel(c.H, c.M, c.E, c.alpha, c.radius)
        self.check_interval = c.check_interval
        self.jam_types = [JammingType(t) for t in r.jam_types]
        spec = trajectory_from_dict(w.ally_path)
        self.ally_path = BezierPath(spec.control_points, spec.round_trip)
        self.opponent_pattern = trajectory_from_dict(w.opponent_pattern)
        self.base_station = as_vec3(w.base_station)
        self.episode_steps = w.episode_steps
        self.kb_enabled = kb.enabled
        self.kb: Optional[KnowledgeBase] = None
        self.rng = np.random.default_rng(cfg.seed)
        self.episode = -1
        self.state: Optional[GameState] = None

    # -- helpers -------------------------------------------------------------

    def channel(self, f: float, spread: bool) -> AllyChannel:
        r = self.cfg.radio
        return AllyChannel(f, spread, r.bw_narrow, r.bw_spread)

    def budget(self, p_ally, p_opp, f: float, spread: bool, jam: Optional[JammingSpec]) -> LinkBudget:
        r = self.cfg.radio
        return link_budget(d_base_km=self.base_station.dist(p_ally) / 1000.0,
                           d_opponent_km=math.dist(p_opp, p_ally) / 1000.0,
                           channel=self.channel(f, spread), jam=jam, p_base_dbm=r.P_base,
                           noise_density_dbm_hz=r.noise_density, mode=r.link_mode,
                           floor_dbm=r.floor_dbm)

    def perceive(self, jam: Optional[JammingSpec], l_opp: float) -> Optional[JammingType]:
        obs = observe(jam, self.grid.points, l_opp, self.cfg.radio.bw_narrow)
        return classify_jamming(obs, self.cfg.kb.classify_threshold_dbm)

    def opponent_origin(self) -> Vec3:
        if self.cfg.agents.opponent == "patrol" or (
                self.cfg.agents.opponent == "planned" and self.cfg.planner.mode == "pattern"):
            return pattern_start(self.opponent_pattern)
        return as_vec3(self.cfg.world.opponent_start)

    def encode(self, state: Optional[GameState] = None) -> np.ndarray:
        return encode_state(state or self.state, self.grid, self.bounds)

    # -- gym-style API ---------------------------------------------------------

    def reset(self, seed: Optional[int] = None) -> GameState:
        """Start a new episode. A seed restarts every random stream."""
        if seed is not None or self.kb is None:
            ss = np.random.SeedSequence(self.cfg.seed if seed is None else seed)
            env_ss, kb_ss = ss.spawn(2)
            self.rng = np.random.default_rng(env_ss)
            self.kb = KnowledgeBase.seeded(kb_ss)
            self.episode = -1
        self.episode += 1
        f = self.grid[int(self.rng.integers(len(self.grid)))]
        p_ally = self.ally_path.start
        p_opp = self.opponent_origin()
        b = self.budget(p_ally, p_opp, f, False, None)
        self.state = GameState(p_ally=p_ally, p_opponent=p_opp, f_ally=f, f_jam_detected=None,
                               jam_type=None, spread=False, t_spread=0.0, snr_prev=b.snr,
                               sim_time=0.0, tick=0)
        return self.state

    def step(self, a_ally, a_opp) -> StepResult:
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        s = self.state
        ally = AllyAction.decode(a_ally)
        opp = OpponentAction.decode(a_opp)
        dt = self.limits.dt

        # ally: hop / spread
        hop = bool(ally.hopping > 0.5)
        spread = s.spread
        if ally.spread_toggle > 0.5:
            spread = not spread
        spread = bool(spread)
        f_ally = s.f_ally
        if hop:
            if self.kb_enabled:
                rec = self.kb.recommend(s.jam, self.grid, self.channel(f_ally, spread))
                if rec.action == "hop":
                    f_ally = rec.target
                    if rec.despread:
                        spread = False
                else:
                    spread = True
            else:
                idx = int(round(ally.channel * (len(self.grid) - 1)))
                f_ally = self.grid[idx]
        t_spread = s.t_spread + dt if spread else 0.0

        # opponent: jammer and movement
        jt = self.jam_types[min(len(self.jam_types) - 1, int(opp.jam_type * len(self.jam_types)))]
        lo, hi = self.band
        if opp.track > 0.5 and s.f_jam_detected is not None:
            f_target = s.f_jam_detected
        else:
            f_target = lo + opp.jam_freq * (hi - lo)
        jam = make_jamming(jt, f_target, self.widths, self.cfg.radio.P_opponent, self.band)
        desired = s.p_opponent + opp.move.scale(self.limits.step_length / MAX_ACTION)
        p_opp = step_motion(s.p_opponent, desired, self.limits, self.bounds)
        if self.kb is not None:
            self.kb.remember(f_target)

        # ally: fixed-speed motion along its path
        ally_s = s.ally_s + self.limits.step_length
        p_ally = self.bounds.clamp(self.ally_path.position_at(ally_s))

        b = self.budget(p_ally, p_opp, f_ally, spread, jam)
        sim_time = s.sim_time + dt
        tick = s.tick + 1
        detected, fired = detect_center_frequency(sim_time, self.check_interval, b.snr,
                                                  self.costs.M, f_ally, s.f_jam_detected)
        r_ally = ally_reward(b.snr, self.costs, t_spread, ally.hopping)
        r_opp = opponent_reward(p_opp, p_ally, s.snr_prev - b.snr, self.costs)

        self.state = GameState(p_ally=p_ally, p_opponent=p_opp, f_ally=f_ally,
                               f_jam_detected=detected, jam_type=self.perceive(jam, b.l_opponent),
                               spread=spread, t_spread=t_spread, snr_prev=b.snr,
                               sim_time=sim_time, tick=tick, jam=jam, overlap=b.overlap,
                               ally_s=ally_s)
        lo_j, hi_j = jam.extent
        record = {
            "v": LOG_SCHEMA_VERSION,
            "episode": self.episode,
            "tick": tick,
            "p_ally": list(p_ally),
            "p_opponent": list(p_opp),
            "f_ally": f_ally,
            "jam_type": jt.value,
            "jam_band": [lo_j, hi_j],
            "jam_target": f_target,
            "overlap": b.overlap,
            "snr": b.snr,
            "capacity": b.capacity,
            "r_ally": r_ally,
            "r_opponent": r_opp,
            "spread": spread,
            "hop": hop,
            "detected": detected,
            "detection_event": fired,
        }
        done = tick >= self.episode_steps
        return StepResult(self.state, r_ally, r_opp, done, b, record)


def with_state(state: GameState, **changes) -> GameState:
    return dataclasses.replace(state, **changes)
