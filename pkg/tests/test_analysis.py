import json

import numpy as np
import pytest

from uavfpg.analysis import (
    LogVersionError, MetricSeries, jamming_success_rate, load_log, moving_average, moving_std,
    overlap_ratio, series_table, smooth_series, stage_bounds, stage_summary, stages_table, std_band,
    write_metrics,
)


def rec(overlap=0.0, snr=20.0, f=200.0, i=0):
    return {"v": 1, "episode": 0, "tick": i + 1, "overlap": overlap, "snr": snr, "f_ally": f,
            "r_ally": snr - 8, "r_opponent": 0.0}


def test_overlap_ratio_examples():
    assert overlap_ratio([rec(1.0)] * 10) == 100
    assert overlap_ratio([rec(0.0)] * 10) == 0
    assert overlap_ratio([rec(0.3 * (i % 2)) for i in range(10)]) == 50
    with pytest.raises(ValueError):
        overlap_ratio([])


def test_success_rate_examples():
    assert jamming_success_rate([rec(1.0, 9.0)] * 5, 8) == 0
    assert jamming_success_rate([rec(1.0, 2.0)] * 5, 8) == 100
    window = [rec(1.0, 3.0)] * 3 + [rec(1.0, 12.0)] * 4 + [rec(0.0, 3.0)] * 3
    assert jamming_success_rate(window, 8) == pytest.approx(30)


def test_rates_bounded_and_ordered():
    rng = np.random.default_rng(0)
    for _ in range(200):
        w = [rec(float(rng.random() < 0.4) * rng.random(), rng.uniform(-20, 40)) for _ in range(25)]
        o, s = overlap_ratio(w), jamming_success_rate(w)
        assert 0 <= s <= o <= 100


def test_moving_average_examples():
    v = [1.0, 2.0, 3.0]
    assert np.array_equal(moving_average(v, 1), v)
    assert moving_average(v, 3)[1] == 2.0
    assert moving_std(v, 3)[1] == pytest.approx(1.0)
    lo, hi = std_band(v, 3)
    assert (lo[1], hi[1]) == (pytest.approx(0.0), pytest.approx(4.0))
    lo, hi = std_band([5.0] * 9, 4)
    assert np.allclose(lo, 5.0) and np.allclose(hi, 5.0)
    with pytest.raises(ValueError):
        moving_average(v, 0)


def test_moving_average_full_coverage_preserves_mean():
    rng = np.random.default_rng(1)
    v = rng.normal(size=50)
    # once every window spans the whole series each smoothed value is the mean
    assert np.allclose(moving_average(v, 2 * len(v) - 1), v.mean(), atol=1e-9)
    # interior windows: mean of each window equals the smoothed value
    w = 7
    m = moving_average(v, w)
    for i in range(3, 47):
        assert m[i] == pytest.approx(v[i - 3:i + 4].mean(), abs=1e-12)


def test_smooth_series_and_metric_series():
    s = MetricSeries("x", [1, 2, 3], [1.0, 2.0, 3.0])
    out = smooth_series(s, 3)
    assert out["mean"].values[1] == 2.0 and out["hi"].values[1] == pytest.approx(4.0)
    with pytest.raises(ValueError):
        MetricSeries("x", [2, 1], [0, 0])


def test_stage_summary_quantiles():
    freqs = [150.0, 160.0, 170.0, 180.0, 190.0]
    log = [rec(f=f, i=i) for i, f in enumerate(freqs)]
    (s,) = stage_summary(log, [("all", 0, 5)])
    # type-7: position (n-1)p -> 1.0 and 3.0
    assert (s.q1, s.q3, s.iqr) == (160.0, 180.0, 20.0)
    assert s.std == pytest.approx(np.std(freqs, ddof=1))


def test_stage_summary_degenerate_and_invariant():
    log = [rec(f=200.0, i=i) for i in range(10)]
    a, b = stage_summary(log, [("a", 0, 5), ("b", 5, 10)])
    assert a.iqr == 0 and a.std == 0
    assert (a.overlap_pct, a.q1, a.q3) == (b.overlap_pct, b.q1, b.q3)
    rng = np.random.default_rng(2)
    log = [rec(float(rng.random() < 0.5), rng.uniform(0, 20), rng.choice([150.0, 200.0, 250.0]), i)
           for i in range(40)]
    perm = [log[i] for i in rng.permutation(40)]
    x, y = stage_summary(log, [("s", 0, 40)])[0], stage_summary(perm, [("s", 0, 40)])[0]
    assert (x.overlap_pct, x.success_pct, x.q1, x.q3, x.max_overlap) == (y.overlap_pct, y.success_pct, y.q1, y.q3, y.max_overlap)
    assert x.std == pytest.approx(y.std, abs=1e-12)
    with pytest.raises(ValueError):
        stage_summary(log, [("bad", 30, 50)])


def test_stage_bounds_nonempty():
    for n in (1, 2, 7, 100, 1000):
        for _, a, b in stage_bounds(n):
            assert 0 <= a < b <= n
    assert stage_bounds(1000)[2] == ("late", 950, 1000)


def test_tables_and_replay_deterministic(tmp_path):
    log = [rec(float(i % 3 == 0), 5.0 + i, 150.0 + i, i) for i in range(30)]
    p = tmp_path / "log.jsonl"
    p.write_text("".join(json.dumps(r) + "\n" for r in log))
    a = write_metrics(load_log(p), tmp_path / "a")
    b = write_metrics(load_log(p), tmp_path / "b")
    for k in a:
        assert a[k].read_bytes() == b[k].read_bytes()
    header = a["stages"].read_text().splitlines()[0]
    assert header.startswith("stage,start,end,overlap_pct")
    assert len(series_table(log, 5).splitlines()) == 31
    assert stages_table([]) == "\n"


def test_load_log_version_mismatch(tmp_path):
    p = tmp_path / "old.jsonl"
    p.write_text(json.dumps({**rec(), "v": 0}) + "\n")
    with pytest.raises(LogVersionError):
        load_log(p)
