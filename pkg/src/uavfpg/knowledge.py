"""Expert anti-jamming knowledge base.

Classifies the active jammer from per-channel interference measurements and
maps each jamming type to a counter-strategy: hop to a clean channel, spread,
or de-spread and hop.
"""
from __future__ import annotations

import collections
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from uavfpg import InsufficientObservationError
from uavfpg.radio import (
    NEG_INF, AllyChannel, FrequencyGrid, JammingSpec, JammingType,
    band_overlap_fraction, interference_power_dbm,
)

MIN_SAMPLES = 15
CLEAN_CHANNEL_BW_MHZ = 5.0


@dataclass(frozen=True)
class SpectrumObservation:
    samples: tuple  # ((freq_mhz, power_dbm), ...)

    def __post_init__(self):
        freqs = [f for f, _ in self.samples]
        if any(b < a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("observation frequencies must be sorted ascending")

    @property
    def freqs(self) -> list[float]:
        return [f for f, _ in self.samples]

    @property
    def powers(self) -> list[float]:
        return [p for _, p in self.samples]


def observe(jam: Optional[JammingSpec], freqs: Sequence[float], l_opponent_db: float,
            bw: float = CLEAN_CHANNEL_BW_MHZ) -> SpectrumObservation:
    """Noise-free per-channel interference measurement at each frequency."""
    out = []
    for f in freqs:
        if jam is None:
            out.append((f, NEG_INF))
            continue
        ov = band_overlap_fraction(jam, AllyChannel(f, narrow_bw=bw))
        out.append((f, interference_power_dbm(jam, l_opponent_db, ov)))
    return SpectrumObservation(tuple(out))


def _runs(idx: list[int]) -> list[list[int]]:
    runs: list[list[int]] = []
    for i in idx:
        if runs and i == runs[-1][-1] + 1:
            runs[-1].append(i)
        else:
            runs.append([i])
    return runs


def classify_jamming(obs: SpectrumObservation, threshold_dbm: float = -150.0) -> Optional[JammingType]:
    """Guess the jamming type from which samples exceed ``threshold_dbm``.

    Returns ``None`` for an unknown pattern (including no jamming at all).
    Rules, first match wins:

    * one hot sample: single tone
    * at least 80% hot: broadband
    * one contiguous run of 2-4 samples: narrowband; 5 or more: broadband
    * three or more hot samples that are equally spaced in frequency, or
      that split into several runs: comb
    """
    n = len(obs.samples)
    if n < MIN_SAMPLES:
        raise InsufficientObservationError(f"need at least {MIN_SAMPLES} samples, got {n}")
    hot = [i for i, (_, p) in enumerate(obs.samples) if p > threshold_dbm]
    if not hot:
        return None
    if len(hot) == 1:
        return JammingType.SINGLE_TONE
    if len(hot) >= 0.8 * n:
        return JammingType.BROADBAND
    runs = _runs(hot)
    if len(runs) == 1:
        return JammingType.NARROWBAND if len(hot) <= 4 else JammingType.BROADBAND
    if len(hot) >= 3:
        freqs = [obs.samples[i][0] for i in hot]
        gaps = np.diff(freqs)
        if np.var(gaps) < 1e-6 or len(runs) >= 2:
            return JammingType.COMB
    return None


@dataclass(frozen=True)
class CounterStrategy:
    action: str  # "hop" | "spread" | "despread" | "stay"
    target: Optional[float] = None
    despread: bool = False
    rationale_tag: str = "none"


@dataclass(frozen=True)
class KbRule:
    """Preferred response to one jamming type.

    ``hop_random`` draws uniformly among clean channels; ``hop_far`` picks
    the clean channel farthest from the jam band midpoint.
    """

    preferred: str = "hop_random"
    fallback: str = "spread"


DEFAULT_RULES = {
    JammingType.SINGLE_TONE: KbRule("hop_random"),
    JammingType.NARROWBAND: KbRule("hop_random"),
    JammingType.BROADBAND: KbRule("hop_far"),
    JammingType.COMB: KbRule("hop_random"),
}


@dataclass
class KnowledgeBase:
    entries: dict = field(default_factory=lambda: dict(DEFAULT_RULES))
    history: collections.deque = field(default_factory=lambda: collections.deque(maxlen=64))
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))

    def __post_init__(self):
        missing = set(JammingType) - set(self.entries)
        if missing:
            raise ValueError(f"knowledge base lacks rules for {sorted(t.value for t in missing)}")

    @classmethod
    def seeded(cls, seed) -> "KnowledgeBase":
        return cls(rng=np.random.default_rng(seed))

    def remember(self, f_opponent: Optional[float]) -> None:
        if f_opponent is not None:
            self.history.append(float(f_opponent))

    def recommend(self, jam: Optional[JammingSpec], grid: FrequencyGrid, ch: AllyChannel) -> CounterStrategy:
        return recommend(self, jam, grid, ch)


def clean_channels(jam: Optional[JammingSpec], grid: Sequence[float],
                   bw: float = CLEAN_CHANNEL_BW_MHZ) -> list[float]:
    return [f for f in grid if band_overlap_fraction(jam, AllyChannel(f, narrow_bw=bw)) == 0.0]


def recommend(kb: KnowledgeBase, jam: Optional[JammingSpec], grid: FrequencyGrid,
              ch: AllyChannel) -> CounterStrategy:
    """Counter-strategy for ``jam`` given the ally's current channel."""
    tag = jam.type.value if jam is not None else "none"
    clean = clean_channels(jam, grid.points)
    if not clean:
        return CounterStrategy("spread", rationale_tag=tag)
    rule = kb.entries[jam.type] if jam is not None else KbRule("hop_random")
    if rule.preferred == "hop_far":
        mid = jam.midpoint
        best = max(abs(f - mid) for f in clean)
        target = min(f for f in clean if abs(f - mid) >= best - 1e-9)
    else:
        target = clean[int(kb.rng.integers(len(clean)))]
    return CounterStrategy("hop", target=target, despread=ch.spread, rationale_tag=tag)
