"""Command line entry point: ``uavfpg {run,train,ablate,replay}``."""
from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import uavfpg
from uavfpg import FpgError
from uavfpg.config import apply_overrides, default_config, dump_config, from_dict, load_config
from uavfpg.planner import API_KEY_ENV

log = logging.getLogger("uavfpg")


def _scenario(args):
    base = load_config(args.config).to_dict() if args.config else default_config().to_dict()
    overrides = list(args.set or [])
    if getattr(args, "seed", None) is not None:
        overrides.append(f"seed={args.seed}")
    if getattr(args, "steps", None) is not None:
        key = "agents.maddpg.total_steps" if args.command == "train" else "world.total_steps"
        overrides.append(f"{key}={args.steps}")
    if getattr(args, "planner", None):
        overrides.append(f"planner.mode={args.planner}")
    if getattr(args, "mock_llm", None):
        overrides.append(f"planner.mock_fixture={json.dumps(str(args.mock_llm))}")
    return from_dict(apply_overrides(base, overrides))


def _out_dir(root, tag: str) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    base = Path(root) / f"{stamp}-{tag}"
    out, i = base, 0
    while out.exists():
        i += 1
        out = Path(f"{base}-{i}")
    out.mkdir(parents=True)
    return out


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(out: Path, cfg, command: str, **extra) -> None:
    data = {
        "command": command,
        "code_version": uavfpg.__version__,
        "config_sha256": cfg.digest(),
        "seed": cfg.seed,
        "config_file": "config.yaml",
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        **extra,
    }
    (out / "config.yaml").write_text(dump_config(cfg))
    (out / "manifest.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


@contextlib.contextmanager
def _llm_endpoint(cfg):
    """Yield (endpoint, api_key) for the configured planner, starting the mock if requested."""
    if cfg.planner.mode != "llm":
        yield None, None
        return
    if cfg.planner.mock_fixture:
        from uavfpg.mockllm import MockLlmServer

        with MockLlmServer.from_fixture(cfg.planner.mock_fixture) as server:
            yield server.url, None
        return
    key = os.environ.get(API_KEY_ENV)
    if not key:
        raise FpgError(f"planner mode 'llm' needs {API_KEY_ENV} set or --mock-llm <fixture>")
    yield cfg.planner.endpoint, key


def cmd_run(args) -> int:
    from uavfpg.analysis import write_metrics
    from uavfpg.runner import simulate

    cfg = _scenario(args)
    nets = None
    if cfg.agents.checkpoint:
        from uavfpg.agents.nets import load_checkpoint
        nets = load_checkpoint(cfg.agents.checkpoint)
    with _llm_endpoint(cfg) as (endpoint, key):
        out = _out_dir(args.out, cfg.digest()[:8])
        log_path = out / "log.jsonl"
        with open(log_path, "w") as fh:
            res = simulate(cfg, log=fh, nets=nets, endpoint=endpoint, api_key=key)
    metrics = write_metrics(res.records, out, cfg.costs.M) if res.records else {}
    _manifest(out, cfg, "run", steps=res.steps, episodes=res.episodes,
              planner_mode=cfg.planner.mode, planner_fallbacks=len(res.fallback_events),
              log_sha256=_sha256(log_path),
              metrics={k: v.name for k, v in metrics.items()},
              mean_r_ally=res.mean_r_ally, mean_r_opponent=res.mean_r_opponent)
    print(out)
    return 0


def cmd_train(args) -> int:
    from uavfpg.agents.maddpg import learning_agents, train
    from uavfpg.agents.nets import save_checkpoint

    cfg = _scenario(args)
    if not learning_agents(cfg):
        raise FpgError("train needs agents.ally and/or agents.opponent set to 'maddpg'")
    res = train(cfg)
    out = _out_dir(args.out, cfg.digest()[:8])
    save_checkpoint(out / "checkpoint.bin", res.nets())
    with open(out / "curves.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["episode", "mean_r_ally", "mean_r_opponent"])
        for i, (a, o) in enumerate(zip(res.curves["ally"], res.curves["opponent"])):
            w.writerow([i, repr(a), repr(o)])
    _manifest(out, cfg, "train", steps=res.steps, episodes=len(res.curves["ally"]),
              checkpoint="checkpoint.bin", checkpoint_sha256=_sha256(out / "checkpoint.bin"))
    print(out)
    return 0


def cmd_ablate(args) -> int:
    from uavfpg.ablation import ablation_cells, run_cell

    cfg = _scenario(args)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [cfg.seed]
    steps = cfg.world.total_steps
    out = _out_dir(args.out, "ablate-" + cfg.digest()[:8])
    reports = []
    for name, cell_cfg in ablation_cells(cfg):
        try:
            with _llm_endpoint(cell_cfg) as (endpoint, key):
                reports.append(run_cell(name, cell_cfg, seeds, steps, endpoint=endpoint, api_key=key))
        except Exception as exc:  # noqa: BLE001 - other cells must still run
            log.error("cell %s failed: %s", name, exc)
            from uavfpg.ablation import CellReport
            nan = float("nan")
            reports.append(CellReport(name, len(seeds), nan, nan, nan, nan, str(exc)))
        cell_dir = out / name.replace(":", "_")
        cell_dir.mkdir()
        _manifest(cell_dir, cell_cfg, "ablate-cell", cell=name, seeds=seeds, steps=steps)
    with open(out / "ablation.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        fields = list(asdict(reports[0]).keys())
        w.writerow(fields)
        for r in reports:
            w.writerow([asdict(r)[f] for f in fields])
    for r in reports:
        print(f"{r.cell:20s} r_ally={r.mean_r_ally:10.4f} r_opp={r.mean_r_opponent:8.4f} "
              f"overlap={r.overlap_pct:6.2f}%" + (f"  ERROR {r.error}" if r.error else ""))
    print(out)
    return 1 if any(r.error for r in reports) else 0


def cmd_replay(args) -> int:
    from uavfpg.analysis import load_log, write_metrics

    records = load_log(args.log)
    if not records:
        raise FpgError(f"{args.log}: empty log")
    out = Path(args.out) if args.out else Path(args.log).parent / "replay"
    paths = write_metrics(records, out, args.threshold)
    for p in paths.values():
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uavfpg", description="UAV frequency-point game simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, steps=True):
        p.add_argument("--config", help="scenario YAML file (defaults when omitted)")
        p.add_argument("--seed", type=int)
        if steps:
            p.add_argument("--steps", type=int)
        p.add_argument("--planner", choices=["llm", "heuristic", "pattern"])
        p.add_argument("--mock-llm", metavar="FIXTURE", help="serve planner replies from a fixture")
        p.add_argument("--out", default="runs", help="root directory for outputs")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="dotted config override")

    common(sub.add_parser("run", help="play a scenario and log every tick"))
    common(sub.add_parser("train", help="train MADDPG agents"))
    p = sub.add_parser("ablate", help="run the ablation matrix")
    common(p)
    p.add_argument("--seeds", help="comma separated seeds (default: config seed)")
    p = sub.add_parser("replay", help="recompute metric tables from a stored log")
    p.add_argument("log")
    p.add_argument("--out")
    p.add_argument("--threshold", type=float, default=8.0, help="SNR threshold M in dB")
    return ap


COMMANDS = {"run": cmd_run, "train": cmd_train, "ablate": cmd_ablate, "replay": cmd_replay}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FpgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
