"""Post-processing of per-tick game logs into metric tables."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from uavfpg import FpgError
from uavfpg.game import LOG_SCHEMA_VERSION

# (name, start fraction, end fraction) of the log, mirroring the paper-style
# early / around-midpoint / final windows.
DEFAULT_STAGES = (("early", 0.0, 0.5), ("middle", 0.475, 0.525), ("late", 0.95, 1.0))


class LogVersionError(FpgError):
    pass


def load_log(path) -> list[dict]:
    records = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("v") != LOG_SCHEMA_VERSION:
                raise LogVersionError(f"{path}:{n}: log schema {rec.get('v')!r}, expected {LOG_SCHEMA_VERSION}")
            records.append(rec)
    return records


def _need(window):
    if len(window) == 0:
        raise ValueError("empty log window")


def overlap_ratio(window: Sequence[dict]) -> float:
    """Percent of ticks where the jammer overlaps the ally channel at all."""
    _need(window)
    return 100.0 * sum(1 for r in window if r["overlap"] > 0) / len(window)


def jamming_success_rate(window: Sequence[dict], m: float = 8.0) -> float:
    """Percent of ticks with overlap and ally SNR below ``m``."""
    _need(window)
    return 100.0 * sum(1 for r in window if r["overlap"] > 0 and r["snr"] < m) / len(window)


@dataclass
class MetricSeries:
    name: str
    ticks: list
    values: list
    window: int = 1

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.ticks, self.ticks[1:])):
            raise ValueError("ticks must be strictly increasing")


def _windows(n: int, w: int):
    if w < 1:
        raise ValueError("window must be >= 1")
    left = (w - 1) // 2
    right = w - 1 - left
    for i in range(n):
        yield max(0, i - left), min(n, i + right + 1)


def moving_average(values: Sequence[float], w: int) -> np.ndarray:
    """Centered moving mean; windows are truncated at the series ends."""
    v = np.asarray(values, dtype=np.float64)
    c = np.concatenate([[0.0], np.cumsum(v)])
    return np.array([(c[b] - c[a]) / (b - a) for a, b in _windows(len(v), w)])


def moving_std(values: Sequence[float], w: int) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    return np.array([v[a:b].std(ddof=1) if b - a > 1 else 0.0 for a, b in _windows(len(v), w)])


def std_band(values: Sequence[float], w: int) -> tuple[np.ndarray, np.ndarray]:
    """Moving mean +- 2 window sample standard deviations."""
    m = moving_average(values, w)
    s = moving_std(values, w)
    return m - 2 * s, m + 2 * s


def smooth_series(series: MetricSeries, w: int) -> dict:
    lo, hi = std_band(series.values, w)
    return {"mean": MetricSeries(series.name + "_ma", series.ticks, moving_average(series.values, w).tolist(), w),
            "lo": MetricSeries(series.name + "_lo", series.ticks, lo.tolist(), w),
            "hi": MetricSeries(series.name + "_hi", series.ticks, hi.tolist(), w)}


@dataclass
class StageSummary:
    stage: str
    start: int
    end: int
    overlap_pct: float
    success_pct: float
    max_overlap: float
    q1: float
    q3: float
    iqr: float
    std: float


def stage_bounds(n: int, stages=DEFAULT_STAGES) -> list[tuple[str, int, int]]:
    out = []
    for name, a, b in stages:
        lo = min(int(round(a * n)), n - 1)
        out.append((name, lo, max(lo + 1, min(n, int(round(b * n))))))
    return out


def stage_summary(log: Sequence[dict], bounds: Sequence[tuple], m: float = 8.0) -> list[StageSummary]:
    """Per-stage overlap/success rates and ally center-frequency spread.

    ``bounds`` holds ``(name, start, end)`` record index ranges (end
    exclusive). Quantiles use linear interpolation.
    """
    out = []
    for name, a, b in bounds:
        if not 0 <= a < b <= len(log):
            raise ValueError(f"stage {name!r} range [{a}, {b}) outside log of {len(log)} records")
        win = log[a:b]
        f = np.array([r["f_ally"] for r in win], dtype=np.float64)
        q1, q3 = np.percentile(f, [25, 75], method="linear")
        out.append(StageSummary(name, a, b, overlap_ratio(win), jamming_success_rate(win, m),
                                max(r["overlap"] for r in win), float(q1), float(q3),
                                float(q3 - q1), float(f.std(ddof=1)) if len(f) > 1 else 0.0))
    return out


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def stages_table(summaries: Sequence[StageSummary]) -> str:
    fields = list(asdict(summaries[0]).keys()) if summaries else []
    return _csv(fields, [list(asdict(s).values()) for s in summaries])


def series_table(log: Sequence[dict], w: int = 101, m: float = 8.0) -> str:
    """Per-tick rewards, overlap and success indicators with smoothed bands."""
    ra = [r["r_ally"] for r in log]
    ro = [r["r_opponent"] for r in log]
    ov = [100.0 if r["overlap"] > 0 else 0.0 for r in log]
    sc = [100.0 if (r["overlap"] > 0 and r["snr"] < m) else 0.0 for r in log]
    cols = {"r_ally": ra, "r_opponent": ro, "overlap_pct": ov, "success_pct": sc}
    header = ["index", "episode", "tick"]
    data = []
    for name, v in cols.items():
        lo, hi = std_band(v, w)
        data += [v, moving_average(v, w), lo, hi]
        header += [name, f"{name}_ma", f"{name}_lo", f"{name}_hi"]
    rows = []
    for i, r in enumerate(log):
        rows.append([i, r["episode"], r["tick"]] + [float(col[i]) for col in data])
    return _csv(header, rows)


def write_metrics(log: Sequence[dict], out_dir, m: float = 8.0, w: int = 101) -> dict:
    """Write ``stages.csv`` and ``series.csv``; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"stages": out / "stages.csv", "series": out / "series.csv"}
    paths["stages"].write_text(stages_table(stage_summary(log, stage_bounds(len(log)), m)))
    paths["series"].write_text(series_table(log, w, m))
    return paths
