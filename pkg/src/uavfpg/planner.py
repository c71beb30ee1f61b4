"""Opponent path planning through a chat-completion model.

The prompt carries the opponent's recent positions with the rewards earned
there and its current position; the model answers with a list of next
waypoints. Anything that goes wrong on the way (transport error, timeout,
unparseable reply) falls back to a deterministic pure-pursuit planner.
"""
from __future__ import annotations

import collections
import logging
import os
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import requests

from uavfpg import PlannerParseError
from uavfpg.world import MotionLimits, Vec3, WorldBounds, as_vec3, step_motion

log = logging.getLogger(__name__)

API_KEY_ENV = "FPG_LLM_API_KEY"
MARKER = "Next directions:"
PREAMBLE = ("You are the path planner of an opponent UAV that must approach and jam an ally UAV. "
            "Use the positions and rewards below to choose the next waypoints.")

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_TRIPLE = re.compile(rf"\[\s*({_NUM})\s*,\s*({_NUM})\s*,\s*({_NUM})\s*\]")


class PositionRewardHistory:
    """FIFO of (position, opponent reward) pairs, oldest first."""

    def __init__(self, maxlen: int = 20, entries=()):
        self.maxlen = maxlen
        self.entries: collections.deque = collections.deque(maxlen=maxlen if maxlen > 0 else None)
        for p, r in entries:
            self.append(p, r)

    def append(self, position, reward: float) -> None:
        if self.maxlen == 0:
            return
        reward = float(reward)
        if not np.isfinite(reward):
            raise ValueError("history rewards must be finite")
        self.entries.append((as_vec3(position), reward))

    def best(self) -> Optional[tuple[Vec3, float]]:
        if not self.entries:
            return None
        return max(self.entries, key=lambda e: e[1])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class PlannedPath:
    directions: tuple
    source: str = "heuristic"

    def __len__(self):
        return len(self.directions)

    def __getitem__(self, i):
        return self.directions[i]


def _fmt(v: float) -> str:
    return f"{v + 0.0:.2f}"


def _fmt_point(p) -> str:
    return "[" + ", ".join(_fmt(c) for c in p) + "]"


def _format_template(n: int) -> str:
    if n == 1:
        return "[[x1, y1, z1]]"
    if n == 2:
        return "[[x1, y1, z1], [x2, y2, z2]]"
    return f"[[x1, y1, z1], ..., [x{n}, y{n}, z{n}]]"


def build_prompt(history: Sequence, current, n: int) -> str:
    if n < 1:
        raise ValueError("number of waypoints must be at least 1")
    lines = [PREAMBLE]
    for pos, r in history:
        lines.append(f"Positions and Rewards: {_fmt_point(pos)}: {_fmt(r)}")
    lines.append(f"Current Position: {_fmt_point(current)}")
    lines.append(f"Reply only with: {MARKER} {_format_template(n)}")
    return "\n".join(lines) + "\n"


def format_directions(points: Sequence) -> str:
    """Render waypoints as a reply line; floats use repr so parsing is exact."""
    body = ", ".join("[" + ", ".join(repr(float(c)) for c in p) + "]" for p in points)
    return f"{MARKER} [{body}]"


def extract_waypoints(text: str) -> list[Vec3]:
    """Raw waypoints after the last marker, before any validation."""
    pos = text.rfind(MARKER)
    if pos < 0:
        raise PlannerParseError("reply has no 'Next directions:' marker")
    rest = text[pos + len(MARKER):]
    start = rest.find("[")
    if start < 0:
        raise PlannerParseError("no waypoint list after marker")
    depth, end = 0, len(rest)
    for i in range(start, len(rest)):
        if rest[i] == "[":
            depth += 1
        elif rest[i] == "]":
            depth -= 1
            if depth == 0:
                end = i + 1
                break
    pts = []
    for m in _TRIPLE.finditer(rest[start:end]):
        try:
            pts.append(Vec3(*(float(g) for g in m.groups())))
        except ValueError:
            continue
    if not pts:
        raise PlannerParseError("no parseable [x, y, z] triples")
    return pts


def sanitize_path(points: Sequence, n_expected: int, bounds: WorldBounds, limits: MotionLimits,
                  current) -> list[Vec3]:
    """Truncate or pad to ``n_expected`` then enforce speed and bounds from ``current``."""
    pts = list(points)[:n_expected]
    while len(pts) < n_expected:
        pts.append(pts[-1])
    out, prev = [], bounds.clamp(as_vec3(current))
    for p in pts:
        prev = step_motion(prev, p, limits, bounds)
        out.append(prev)
    return out


def parse_path(text: str, n_expected: int, bounds: WorldBounds, limits: MotionLimits,
               current) -> PlannedPath:
    pts = extract_waypoints(text)
    return PlannedPath(tuple(sanitize_path(pts, n_expected, bounds, limits, current)), source="llm")


def plan_heuristic(history, current, ally_pos_estimate, n: int, limits: MotionLimits,
                   bounds: WorldBounds, rng: Optional[np.random.Generator] = None,
                   bias: bool = True) -> PlannedPath:
    """Pure pursuit toward the ally estimate.

    With ``bias`` and a positive best reward in ``history``, a seeded coin
    flip may aim the first waypoint at that best position instead.
    """
    if n < 1:
        raise ValueError("number of waypoints must be at least 1")
    target = bounds.clamp(as_vec3(ally_pos_estimate))
    first_target = target
    best = history.best() if (bias and history is not None and hasattr(history, "best")) else None
    if best is not None and best[1] > 0:
        rng = rng if rng is not None else np.random.default_rng(0)
        if rng.random() < 0.5:
            first_target = bounds.clamp(best[0])
    pts, prev = [], bounds.clamp(as_vec3(current))
    for i in range(n):
        prev = step_motion(prev, first_target if i == 0 else target, limits, bounds)
        pts.append(prev)
    return PlannedPath(tuple(pts), source="heuristic")


# -- LLM transport -----------------------------------------------------------

class LlmError(RuntimeError):
    pass


@dataclass
class LlmClientConfig:
    endpoint: str
    model: str = "chat-model"
    timeout: float = 30.0
    max_retries: int = 2
    temperature: float = 0.0
    api_key: Optional[str] = None

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def __repr__(self):
        # keeps the key out of logs and tracebacks
        return (f"LlmClientConfig(endpoint={self.endpoint!r}, model={self.model!r}, "
                f"timeout={self.timeout}, max_retries={self.max_retries})")


class LlmClient:
    def __init__(self, config: LlmClientConfig, session: Optional[requests.Session] = None):
        self.config = config
        self.session = session or requests.Session()
        self.attempts = 0

    @classmethod
    def from_env(cls, endpoint: str, **kw) -> "LlmClient":
        return cls(LlmClientConfig(endpoint, api_key=os.environ.get(API_KEY_ENV), **kw))

    def complete(self, prompt: str) -> str:
        cfg = self.config
        body = {"model": cfg.model, "messages": [{"role": "user", "content": prompt}],
                "temperature": cfg.temperature}
        headers = {"Content-Type": "application/json"}
        if cfg.api_key:
            headers["Authorization"] = f"Bearer {cfg.api_key}"
        self.attempts += 1
        try:
            resp = self.session.post(cfg.endpoint, json=body, headers=headers, timeout=cfg.timeout)
        except requests.RequestException as exc:
            raise LlmError(f"transport error: {type(exc).__name__}") from None
        if resp.status_code != 200:
            raise LlmError(f"HTTP {resp.status_code}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise LlmError("malformed completion body") from None


@dataclass
class FallbackEvent:
    reason: str
    attempts: int


@dataclass
class Planner:
    """Plans opponent paths with an optional LLM client and a heuristic fallback."""

    limits: MotionLimits
    bounds: WorldBounds
    n: int = 10
    client: Optional[LlmClient] = None
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    events: list = field(default_factory=list)

    def plan(self, history, current, ally_pos_estimate) -> PlannedPath:
        return plan(self.client, history, current, self.n, ally_pos_estimate=ally_pos_estimate,
                    limits=self.limits, bounds=self.bounds, rng=self.rng, events=self.events)


def plan(client: Optional[LlmClient], history, current, n: int, *, ally_pos_estimate,
         limits: MotionLimits, bounds: WorldBounds, rng: Optional[np.random.Generator] = None,
         events: Optional[list] = None) -> PlannedPath:
    """Ask the model for a path; never raises, falling back to the heuristic."""

    def fallback(reason: str, attempts: int) -> PlannedPath:
        if events is not None:
            events.append(FallbackEvent(reason, attempts))
        return plan_heuristic(history, current, ally_pos_estimate, n, limits, bounds, rng)

    if client is None:
        return fallback("offline", 0)
    prompt = build_prompt(history or (), current, n)
    reason = "unknown"
    tries = client.config.max_retries + 1
    for attempt in range(1, tries + 1):
        try:
            text = client.complete(prompt)
            return parse_path(text, n, bounds, limits, current)
        except (LlmError, PlannerParseError) as exc:
            reason = str(exc)
            log.info("planner attempt %d/%d failed: %s", attempt, tries, reason)
        except Exception as exc:  # noqa: BLE001 - the game loop must never see planner faults
            reason = f"unexpected {type(exc).__name__}"
            log.warning("planner attempt %d/%d crashed: %s", attempt, tries, reason)
    return fallback(reason, tries)
