"""Ablation matrix: single jamming type, no knowledge base, no LLM planner."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from uavfpg.analysis import jamming_success_rate, overlap_ratio
from uavfpg.config import ScenarioConfig, replace
from uavfpg.radio import JammingType
from uavfpg.runner import simulate

log = logging.getLogger(__name__)


def ablation_cells(base: ScenarioConfig) -> list[tuple[str, ScenarioConfig]]:
    cells = [("baseline", base)]
    for t in JammingType:
        cells.append((f"jam:{t.value}", replace(base, **{"radio.jam_types": [t.value]})))
    cells.append(("no_kb", replace(base, **{"kb.enabled": False})))
    cells.append(("no_llm", replace(base, **{"planner.mode": "heuristic"})))
    return cells


@dataclass
class CellReport:
    cell: str
    seeds: int
    mean_r_ally: float
    mean_r_opponent: float
    overlap_pct: float
    success_pct: float
    error: Optional[str] = None


def run_cell(name: str, cfg: ScenarioConfig, seeds: Sequence[int], steps: int, **kw) -> CellReport:
    ra = ro = ov = sc = 0.0
    for seed in seeds:
        res = simulate(cfg, seed=seed, steps=steps, **kw)
        ra += res.mean_r_ally
        ro += res.mean_r_opponent
        ov += overlap_ratio(res.records)
        sc += jamming_success_rate(res.records, cfg.costs.M)
    n = len(seeds)
    return CellReport(name, n, ra / n, ro / n, ov / n, sc / n)


def run_ablation(base: ScenarioConfig, seeds: Sequence[int], steps: int,
                 cells: Optional[Sequence[str]] = None, **kw) -> list[CellReport]:
    """Run every cell with identical seeds; a failing cell is reported, not fatal."""
    reports = []
    for name, cfg in ablation_cells(base):
        if cells is not None and name not in cells:
            continue
        try:
            reports.append(run_cell(name, cfg, seeds, steps, **kw))
        except Exception as exc:  # noqa: BLE001 - other cells must still run
            log.error("ablation cell %s failed: %s", name, exc)
            nan = float("nan")
            reports.append(CellReport(name, len(seeds), nan, nan, nan, nan, error=str(exc)))
    return reports
