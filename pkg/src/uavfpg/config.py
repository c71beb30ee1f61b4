"""Scenario configuration: schema, defaults, strict loading and overrides.

Configs are YAML files mirroring :class:`ScenarioConfig`. Every key is
optional (defaults fill the gaps) but unknown keys are rejected with the
dotted path of the offending field.
"""
from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import math
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from uavfpg import ConfigError

DEFAULT_ALLY_PATH = {
    "kind": "bezier",
    "control_points": [[150.0, 150.0, 300.0], [450.0, 1350.0, 300.0],
                       [1050.0, 150.0, 300.0], [1350.0, 1350.0, 300.0]],
    "round_trip": True,
}
DEFAULT_OPPONENT_PATTERN = {"kind": "circle", "center": [750.0, 750.0, 250.0], "radius": 400.0}


@dataclass
class WorldConfig:
    bounds: list = field(default_factory=lambda: [1500.0, 1500.0, 600.0])
    dt: float = 1.0
    max_speed: float = 10.0
    episode_steps: int = 1000
    total_steps: int = 1000
    base_station: list = field(default_factory=lambda: [750.0, 750.0, 0.0])
    ally_path: dict = field(default_factory=lambda: json.loads(json.dumps(DEFAULT_ALLY_PATH)))
    opponent_start: list = field(default_factory=lambda: [750.0, 50.0, 300.0])
    opponent_pattern: dict = field(default_factory=lambda: dict(DEFAULT_OPPONENT_PATTERN))


@dataclass
class RadioConfig:
    P_base: float = 45.0
    P_opponent: float = 20.0
    noise_density: float = -170.0
    bw_narrow: float = 5.0
    bw_spread: float = 2400.0
    grid: Optional[list] = None
    link_mode: str = "conventional"
    floor_dbm: float = -200.0
    jam_types: list = field(default_factory=lambda: ["single_tone", "narrowband", "broadband", "comb"])


@dataclass
class CostConfig:
    H: float = 2.0
    M: float = 8.0
    E: float = 1.0
    alpha: float = 0.5
    radius: float = 30.0
    check_interval: float = 5.0


@dataclass
class KbConfig:
    enabled: bool = True
    tone_width: float = 0.2
    narrowband_width: float = 10.0
    broadband_halfwidth: float = 30.0
    comb_f0: float = 150.0
    comb_spacing: float = 10.0
    comb_teeth: int = 11
    comb_tooth_width: float = 1.0
    classify_threshold_dbm: float = -150.0


@dataclass
class PlannerConfig:
    mode: str = "heuristic"
    endpoint: str = "http://127.0.0.1:8000/v1/chat/completions"
    model: str = "chat-model"
    timeout: float = 30.0
    max_retries: int = 2
    temperature: float = 0.0
    n_waypoints: int = 10
    history_len: int = 20
    replan_interval: int = 0
    mock_fixture: Optional[str] = None


@dataclass
class MaddpgConfig:
    gamma: float = 0.99
    total_steps: int = 100_000
    batch_size: int = 32
    lr: float = 0.001
    buffer_capacity: int = 1_000_000
    sigma_start: float = 0.1
    sigma_end: float = 0.01
    tau: float = 0.005
    hidden: list = field(default_factory=lambda: [64, 64])
    warmup_steps: int = 1000
    reward_scale: float = 0.01


@dataclass
class AgentsConfig:
    ally: str = "kb"
    opponent: str = "planned"
    p_hop: float = 0.5
    checkpoint: Optional[str] = None
    maddpg: MaddpgConfig = field(default_factory=MaddpgConfig)


@dataclass
class ScenarioConfig:
    seed: int = 42
    world: WorldConfig = field(default_factory=WorldConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    costs: CostConfig = field(default_factory=CostConfig)
    kb: KbConfig = field(default_factory=KbConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    agents: AgentsConfig = field(default_factory=AgentsConfig)

    def validate(self) -> "ScenarioConfig":
        _validate(self)
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=_json_default)
        return hashlib.sha256(blob.encode()).hexdigest()


ALLY_POLICIES = ("fixed", "random_hop", "kb", "maddpg")
OPPONENT_POLICIES = ("patrol", "pursuit", "planned", "maddpg")
PLANNER_MODES = ("llm", "heuristic", "pattern")


def _json_default(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    raise TypeError(type(v))


def _coerce(value, tp, path):
    origin = typing.get_origin(tp)
    if origin is typing.Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value is None:
            return None
        return _coerce(value, args[0], path)
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected a mapping, got {type(value).__name__}")
        return _build(tp, value, path)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if tp is list:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected a list, got {value!r}")
        return list(value)
    if tp is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected a mapping, got {value!r}")
        return dict(value)
    return value


def _build(cls, data: dict, path: str = ""):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigError(f"unknown config key '{where}{unknown[0]}'")
    kwargs = {}
    for name in names:
        if name in data:
            kwargs[name] = _coerce(data[name], hints[name], f"{path}.{name}" if path else name)
    return cls(**kwargs)


def from_dict(data: Optional[dict]) -> ScenarioConfig:
    return _build(ScenarioConfig, data or {}).validate()


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return from_dict(data)


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)


def set_path(data: dict, key: str, value) -> None:
    parts = key.strip().split(".")
    node = data
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {key}: '{p}' is not a section")
    node[parts[-1]] = value


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``a.b.c=value`` strings (values parsed as YAML scalars)."""
    data = copy.deepcopy(data)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        set_path(data, key, yaml.safe_load(raw))
    return data


def _validate(cfg: ScenarioConfig) -> None:
    from uavfpg import world
    from uavfpg.radio import JammingType, FrequencyGrid

    w = cfg.world
    if len(w.bounds) != 3 or min(w.bounds) <= 0:
        raise ConfigError("world.bounds: need three positive extents")
    if w.dt <= 0:
        raise ConfigError("world.dt: must be positive")
    if w.max_speed <= 0:
        raise ConfigError("world.max_speed: must be positive")
    if w.episode_steps < 1:
        raise ConfigError("world.episode_steps: must be >= 1")
    if w.total_steps < 0:
        raise ConfigError("world.total_steps: must be >= 0")
    bounds = world.WorldBounds(*w.bounds)
    for name in ("base_station", "opponent_start"):
        p = getattr(w, name)
        if len(p) != 3 or not bounds.contains(p):
            raise ConfigError(f"world.{name}: must be a point inside the world bounds")
    for name in ("ally_path", "opponent_pattern"):
        try:
            spec = world.trajectory_from_dict(getattr(w, name))
            world.validate_trajectory(spec, bounds)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"world.{name}: {exc}") from None
        if name == "ally_path" and spec.kind != "bezier":
            raise ConfigError("world.ally_path: ally must follow a bezier trajectory")
        if name == "opponent_pattern" and spec.kind not in ("triangle", "circle", "rectangle"):
            raise ConfigError("world.opponent_pattern: must be triangle, circle or rectangle")

    r = cfg.radio
    if r.link_mode not in ("conventional", "literal"):
        raise ConfigError(f"radio.link_mode: expected conventional|literal, got {r.link_mode!r}")
    if r.bw_narrow <= 0 or r.bw_spread <= 0:
        raise ConfigError("radio.bw_narrow/bw_spread: must be positive")
    if r.grid is not None:
        try:
            FrequencyGrid(tuple(r.grid))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"radio.grid: {exc}") from None
    valid = {t.value for t in JammingType}
    if not r.jam_types or any(t not in valid for t in r.jam_types):
        raise ConfigError(f"radio.jam_types: each entry must be one of {sorted(valid)}")

    c = cfg.costs
    if min(c.H, c.E, c.alpha) < 0:
        raise ConfigError("costs: H, E and alpha must be non-negative")
    if c.radius <= 0 or c.check_interval <= 0:
        raise ConfigError("costs.radius/check_interval: must be positive")

    p = cfg.planner
    if p.mode not in PLANNER_MODES:
        raise ConfigError(f"planner.mode: expected one of {PLANNER_MODES}, got {p.mode!r}")
    if p.max_retries < 0:
        raise ConfigError("planner.max_retries: must be >= 0")
    if p.n_waypoints < 1 or p.history_len < 0 or p.replan_interval < 0:
        raise ConfigError("planner: n_waypoints >= 1, history_len >= 0, replan_interval >= 0")
    if p.timeout <= 0:
        raise ConfigError("planner.timeout: must be positive")

    a = cfg.agents
    if a.ally not in ALLY_POLICIES:
        raise ConfigError(f"agents.ally: expected one of {ALLY_POLICIES}, got {a.ally!r}")
    if a.opponent not in OPPONENT_POLICIES:
        raise ConfigError(f"agents.opponent: expected one of {OPPONENT_POLICIES}, got {a.opponent!r}")
    if not 0.0 <= a.p_hop <= 1.0:
        raise ConfigError("agents.p_hop: must lie in [0, 1]")
    m = a.maddpg
    if not 0.0 < m.gamma < 1.0:
        raise ConfigError("agents.maddpg.gamma: must lie in (0, 1)")
    if not 0.0 < m.tau <= 1.0:
        raise ConfigError("agents.maddpg.tau: must lie in (0, 1]")
    if m.sigma_start < 0 or m.sigma_end < 0:
        raise ConfigError("agents.maddpg.sigma_*: must be >= 0")
    if m.batch_size < 1 or m.buffer_capacity < m.batch_size:
        raise ConfigError("agents.maddpg: need batch_size >= 1 and buffer_capacity >= batch_size")
    if m.lr < 0 or any(int(h) < 1 for h in m.hidden):
        raise ConfigError("agents.maddpg: lr >= 0 and hidden widths >= 1")


def default_config() -> ScenarioConfig:
    return ScenarioConfig().validate()


def replace(cfg: ScenarioConfig, **dotted: Any) -> ScenarioConfig:
    """Copy with dotted-path overrides, e.g. ``replace(cfg, **{"kb.enabled": False})``."""
    data = cfg.to_dict()
    for k, v in dotted.items():
        set_path(data, k, v)
    return from_dict(data)
