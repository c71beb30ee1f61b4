"""Fixed-capacity transition store for off-policy training."""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from uavfpg import EncodingError
from uavfpg.game import ALLY_ACTION_DIM, OPPONENT_ACTION_DIM, STATE_DIM


class TransitionRecord(NamedTuple):
    s: np.ndarray
    a_ally: np.ndarray
    a_opponent: np.ndarray
    r_ally: float
    r_opponent: float
    s_next: np.ndarray


@dataclass
class Batch:
    s: np.ndarray
    a_ally: np.ndarray
    a_opponent: np.ndarray
    r_ally: np.ndarray
    r_opponent: np.ndarray
    s_next: np.ndarray

    def __len__(self):
        return len(self.s)

    def rewards(self, agent: str) -> np.ndarray:
        return self.r_ally if agent == "ally" else self.r_opponent

    def actions(self, agent: str) -> np.ndarray:
        return self.a_ally if agent == "ally" else self.a_opponent


class ReplayBuffer:
    """Ring buffer with uniform sampling without replacement.

    Appends and samples are serialized by a lock, so any record whose
    ``push`` has returned is visible to later ``sample`` calls from other
    threads.
    """

    def __init__(self, capacity: int = 1_000_000, seed=None):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._data: list = []
        self._next = 0
        self._lock = threading.Lock()
        self.rng = np.random.default_rng(seed)

    def __len__(self):
        return len(self._data)

    def push(self, s, a_ally, a_opponent, r_ally, r_opponent, s_next) -> None:
        rec = TransitionRecord(np.asarray(s, dtype=np.float64), np.asarray(a_ally, dtype=np.float64),
                               np.asarray(a_opponent, dtype=np.float64), float(r_ally),
                               float(r_opponent), np.asarray(s_next, dtype=np.float64))
        if rec.s.shape != (STATE_DIM,) or rec.s_next.shape != (STATE_DIM,):
            raise EncodingError("state encodings must have 15 components")
        if rec.a_ally.shape != (ALLY_ACTION_DIM,) or rec.a_opponent.shape != (OPPONENT_ACTION_DIM,):
            raise EncodingError("action arity mismatch")
        if not (np.isfinite(rec.r_ally) and np.isfinite(rec.r_opponent)):
            raise ValueError("rewards must be finite")
        with self._lock:
            if len(self._data) < self.capacity:
                self._data.append(rec)
            else:
                self._data[self._next] = rec
            self._next = (self._next + 1) % self.capacity

    def records(self) -> list:
        """Snapshot of stored records, oldest first."""
        with self._lock:
            if len(self._data) < self.capacity:
                return list(self._data)
            return self._data[self._next:] + self._data[:self._next]

    def sample_indices(self, batch_size: int) -> np.ndarray:
        with self._lock:
            n = len(self._data)
        if n < batch_size:
            raise ValueError(f"buffer holds {n} records, cannot sample {batch_size}")
        return self.rng.choice(n, size=batch_size, replace=False)

    def sample(self, batch_size: int = 32) -> Batch:
        with self._lock:
            n = len(self._data)
            if n < batch_size:
                raise ValueError(f"buffer holds {n} records, cannot sample {batch_size}")
            idx = self.rng.choice(n, size=batch_size, replace=False)
            recs = [self._data[i] for i in idx]
        return Batch(
            s=np.stack([r.s for r in recs]),
            a_ally=np.stack([r.a_ally for r in recs]),
            a_opponent=np.stack([r.a_opponent for r in recs]),
            r_ally=np.array([r.r_ally for r in recs]),
            r_opponent=np.array([r.r_opponent for r in recs]),
            s_next=np.stack([r.s_next for r in recs]),
        )
