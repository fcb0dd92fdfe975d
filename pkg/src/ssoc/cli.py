"""Command line front end: run experiments, sample maps, compare runs."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import maps, snapshot
from .harness import ExperimentConfig, read_curve_csv, run_replicates, write_outputs
from .maze import resolve_maze


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssoc",
        description="Self-organizing classifier experiments on continuous mazes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a replicated experiment from a config file")
    run.add_argument("config", help="path to a flat JSON config file")
    run.add_argument("--seed", type=int, help="override the base rng seed")
    run.add_argument("--out", help="override the output directory")
    run.add_argument("--replicates", type=int, help="override the replicate count")
    run.add_argument("--algorithm", choices=("ssoc2", "ssoc"), help="override the algorithm")
    run.add_argument("--operator", choices=("global", "mixed"), help="override the DE operator")
    run.add_argument("--trials", type=int, help="override the number of trials")
    run.add_argument("--grid", help="override the SOM grid size, e.g. 10x10")
    run.add_argument("--gamma", type=float, help="override the discount factor")
    run.add_argument("--noise", type=float, help="override the observation noise fraction")
    run.add_argument("--jobs", type=int, default=1, help="worker processes for replicates")

    map_cmd = sub.add_parser("map", help="sample a behavior or fitness map from a snapshot")
    map_cmd.add_argument("snapshot", help="path to a system snapshot JSON")
    map_cmd.add_argument("maze", help="maze file path or builtin layout name")
    map_cmd.add_argument("--kind", choices=("behavior", "fitness"), default="behavior")
    map_cmd.add_argument("--out", help="output prefix (default: <kind>_map next to the snapshot)")
    map_cmd.add_argument("--samples", type=int, default=100, help="samples per 1x1 block")
    map_cmd.add_argument("--seed", type=int, default=0, help="sampling rng seed")

    compare = sub.add_parser("compare", help="summarize the difference between two runs")
    compare.add_argument("run_a", help="first run directory")
    compare.add_argument("run_b", help="second run directory")
    return parser


def _load_config(path: str, args: argparse.Namespace) -> ExperimentConfig:
    config_path = Path(path)
    data = json.loads(config_path.read_text())
    config = ExperimentConfig.from_dict(data)
    # Maze paths in a config file are relative to the file itself.
    base = config_path.parent
    config.mazes = [
        str(base / m) if (base / m).is_file() else m for m in config.mazes
    ]
    for name in ("seed", "out", "replicates", "algorithm", "operator", "trials", "gamma", "noise"):
        value = getattr(args, name)
        if value is not None:
            setattr(config, name, value)
    if args.grid is not None:
        config.grid = args.grid
    config.__post_init__()
    return config


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config, args)
    if config.out is None:
        raise ValueError("no output directory: set 'out' in the config or pass --out")
    results = run_replicates(config, workers=max(1, args.jobs))
    out = write_outputs(results, config.out)
    print(f"run complete: {config.replicates} replicates, outputs in {out}")
    print(f"mean final performance: {results.mean_final_performance():.2f} steps")
    return 0


def _cmd_map(args: argparse.Namespace) -> int:
    system = snapshot.load(args.snapshot)
    maze = resolve_maze(args.maze)
    rng = np.random.default_rng(args.seed)
    if args.kind == "behavior":
        block_map = maps.sample_behavior_map(system, maze, rng, args.samples)
    else:
        block_map = maps.sample_fitness_map(system, maze, rng, args.samples)
    prefix = Path(args.out) if args.out else Path(args.snapshot).parent / f"{args.kind}_map"
    maps.write_map_csv(block_map, prefix.with_suffix(".csv"))
    maps.plot_map(block_map, prefix.with_suffix(".svg"))
    print(f"{args.kind} map written to {prefix.with_suffix('.csv')} and .svg")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    summaries = {}
    for label, run_dir in (("a", args.run_a), ("b", args.run_b)):
        curve_path = Path(run_dir) / "curve.csv"
        if not curve_path.is_file():
            raise FileNotFoundError(f"no curve.csv in run directory {run_dir}")
        _, mean, _ = read_curve_csv(curve_path)
        summaries[label] = mean
    final_a = float(summaries["a"][-1])
    final_b = float(summaries["b"][-1])
    n = min(len(summaries["a"]), len(summaries["b"]))
    with np.errstate(invalid="ignore"):
        gap = np.nanmean(summaries["a"][:n] - summaries["b"][:n])
    print(f"final_mean_a={final_a:.4f}")
    print(f"final_mean_b={final_b:.4f}")
    print(f"final_diff_a_minus_b={final_a - final_b:.4f}")
    print(f"mean_curve_gap_a_minus_b={gap:.4f}")
    print(f"better={'a' if final_a < final_b else 'b'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "map": _cmd_map, "compare": _cmd_compare}
    try:
        return handlers[args.command](args)
    except Exception as exc:  # surface a single machine-parseable line
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
