"""Travel time and vehicle jam over the full demand grid, with plots.

    python scripts/demand_sweep.py --out runs/grid --duration 3600 --jobs 4

Writes runs/grid/sweep.csv, per-cell CSVs under runs/grid/cells/ and PNGs
under runs/grid/plots/. Pass --veh / --ped to shrink the grid, and any
``key=value`` scenario override as a positional argument.
"""
from __future__ import annotations

import argparse
import logging
import os
from pathlib import Path

from pedcross.cli import SweepSpec, series_cells, emit_plots, read_csv, run_sweep
from pedcross.scenario import ScenarioConfig

PEDS = (300, 600, 900, 1500, 2250, 3000, 4500, 6000, 9000, 12000, 15000)
VEHS = (0, 300, 600, 900, 1200, 1500, 1800)


def demand_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("overrides", nargs="*", help="scenario overrides, e.g. lane_stretch=50")
    p.add_argument("--ped", type=demand_list, default=PEDS)
    p.add_argument("--veh", type=demand_list, default=VEHS)
    p.add_argument("--duration", type=float, default=3600.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", type=Path, default=Path("runs/grid"))
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    overrides = dict(kv.split("=", 1) for kv in args.overrides)
    base = ScenarioConfig(duration=args.duration, seed=args.seed).with_overrides(**overrides)
    spec = SweepSpec(args.ped, args.veh, args.reps, base)
    path = run_sweep(spec, args.out, jobs=args.jobs)
    emit_plots(path, args.out / "plots", series_cells(spec, args.out))

    rows = read_csv(path)
    print(f"{'veh':>6} " + " ".join(f"{p:>8g}" for p in sorted(set(args.ped))))
    for veh in sorted(set(args.veh)):
        tts = [r["mean_tt_s"] for r in rows if r["veh_demand"] == veh and r["rep"] == 0]
        print(f"{veh:>6g} " + " ".join(f"{t:>8.1f}" for t in tts))


if __name__ == "__main__":
    main()
