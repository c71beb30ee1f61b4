import math
import threading

import numpy as np
import pytest

from uavfpg import EncodingError
from uavfpg.buffer import ReplayBuffer


def push_n(buf, n, start=0):
    for i in range(start, start + n):
        buf.push(np.full(15, i, float), np.zeros(3), np.zeros(6), float(i), -float(i), np.full(15, i + 1, float))


def chi2_sf(x, k):
    # Wilson-Hilferty normal approximation to the chi-squared tail
    z = ((x / k) ** (1 / 3) - (1 - 2 / (9 * k))) / math.sqrt(2 / (9 * k))
    return 0.5 * math.erfc(z / math.sqrt(2))


def test_ring_eviction():
    buf = ReplayBuffer(10, seed=0)
    push_n(buf, 13)
    assert len(buf) == 10
    assert [r.r_ally for r in buf.records()] == [float(i) for i in range(3, 13)]


def test_sampling_uniform_chi_squared():
    buf = ReplayBuffer(100, seed=1)
    push_n(buf, 100)
    counts = np.zeros(100)
    for _ in range(100_000):
        counts[buf.sample_indices(1)[0]] += 1
    expected = 1000.0
    stat = float(((counts - expected) ** 2 / expected).sum())
    assert chi2_sf(stat, 99) > 0.01


def test_sample_without_replacement_and_shapes():
    buf = ReplayBuffer(64, seed=2)
    push_n(buf, 40)
    b = buf.sample(32)
    assert len(set(b.r_ally.tolist())) == 32
    assert b.s.shape == (32, 15) and b.a_ally.shape == (32, 3) and b.a_opponent.shape == (32, 6)
    assert np.array_equal(b.rewards("opponent"), -b.r_ally)
    with pytest.raises(ValueError):
        buf.sample(41)


def test_seeded_sampling_reproducible():
    a, b = ReplayBuffer(50, seed=3), ReplayBuffer(50, seed=3)
    push_n(a, 50)
    push_n(b, 50)
    assert np.array_equal(a.sample(8).s, b.sample(8).s)


def test_push_validation():
    buf = ReplayBuffer(4)
    with pytest.raises(EncodingError):
        buf.push(np.zeros(14), np.zeros(3), np.zeros(6), 0, 0, np.zeros(15))
    with pytest.raises(EncodingError):
        buf.push(np.zeros(15), np.zeros(2), np.zeros(6), 0, 0, np.zeros(15))
    with pytest.raises(ValueError):
        buf.push(np.zeros(15), np.zeros(3), np.zeros(6), float("nan"), 0, np.zeros(15))
    with pytest.raises(ValueError):
        ReplayBuffer(0)


def test_concurrent_push_and_sample():
    buf = ReplayBuffer(500, seed=4)
    push_n(buf, 32)
    errors = []

    def writer(k):
        try:
            push_n(buf, 200, start=1000 * k)
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    def reader():
        try:
            for _ in range(200):
                assert len(buf.sample(32)) == 32
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=writer, args=(k,)) for k in range(1, 4)] + [threading.Thread(target=reader)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors and len(buf) == 500
