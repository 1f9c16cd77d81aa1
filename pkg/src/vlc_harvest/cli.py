"""Command-line front end: ``harvest <preset> [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import MODES, PRESETS, ExperimentRun, format_cell, run
from .scenario import Scenario, ScenarioError, parse_scenario, with_overrides

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="harvest",
        description="Hybrid optical/RF relay: rates, harvested energy and allocation optimization.",
    )
    ap.add_argument("preset", choices=PRESETS, help="experiment to run")
    ap.add_argument("--scenario", type=Path, help="scenario file (defaults when omitted)")
    ap.add_argument("--out", type=Path, default=Path("harvest_out"), help="output directory")
    ap.add_argument("--seed", type=int, help="random seed (overrides the scenario)")
    ap.add_argument("--mc-samples", type=int, help="Monte Carlo sample count")
    ap.add_argument("--grid-ib", type=float, help="bias step of grid searches (A)")
    ap.add_argument("--grid-t", type=float, help="time-fraction step of grid searches")
    ap.add_argument("--mode", choices=MODES, default="sweep",
                    help="sweep user distances or average over their distribution")
    return ap


def _print_table(table, limit=12):
    cols = table.columns
    print(f"== {table.name} ({len(table.rows)} rows)")
    print("  ".join(cols))
    for row in table.rows[:limit]:
        print("  ".join(f"{v:.4g}" if isinstance(v, float) else format_cell(v) for v in row))
    if len(table.rows) > limit:
        print(f"... {len(table.rows) - limit} more rows")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.scenario is not None:
            scn = parse_scenario(args.scenario.read_text(encoding="utf-8"))
        else:
            scn = Scenario()
        overrides = {}
        if args.mc_samples is not None:
            overrides["mc_samples"] = args.mc_samples
        if args.grid_ib is not None:
            overrides["grid_step_ib"] = args.grid_ib
        if args.grid_t is not None:
            overrides["grid_step_t"] = args.grid_t
        if overrides:
            scn = with_overrides(scn, **overrides)
        cfg = ExperimentRun(args.preset, scn, args.out, args.seed, args.mode)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"harvest: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        status, paths, tables = run(cfg)
    except (ValueError, OSError) as exc:
        print(f"harvest: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for table in tables:
        _print_table(table)
    for path in paths:
        print(f"wrote {path}")
    if status != EXIT_OK:
        print("harvest: validation failed or infeasible result", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
