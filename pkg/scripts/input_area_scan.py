"""Skipped pedestrians against input-area size, no vehicles.

    python scripts/input_area_scan.py --depths 0.3,0.4,0.5,0.55,2.0 --seeds 0,1,2,3

Shows where insertion starts to skip for each input-area depth. The density
cap is 5 ped/m^2, so a depth d across the 3.5 m corridor holds 17.5 d
pedestrians.
"""
from __future__ import annotations

import argparse
import os
from concurrent.futures import ProcessPoolExecutor

from pedcross.engine import run
from pedcross.scenario import ScenarioConfig


def cell(args):
    depth, ped, seed, duration = args
    cfg = ScenarioConfig(ped_demand=ped, duration=duration, seed=seed).with_overrides(input_area_depth=depth)
    s = run(cfg).summary
    return s.skipped, s.mean_tt


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--depths", default="0.4,0.5,0.55")
    p.add_argument("--peds", default="9000,12000,15000")
    p.add_argument("--seeds", default="0,1,2,3")
    p.add_argument("--duration", type=float, default=3600.0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    args = p.parse_args()
    depths = [float(d) for d in args.depths.split(",")]
    peds = [float(x) for x in args.peds.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    tasks = [(d, ped, s, args.duration) for d in depths for ped in peds for s in seeds]
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        results = dict(zip(tasks, pool.map(cell, tasks)))
    hours = args.duration / 3600.0
    print(f"skipped per hour (mean over seeds {seeds}) and mean travel time [s]")
    print(f"{'depth':>6} {'cap':>4} " + " ".join(f"{format(p, 'g'):>16}" for p in peds))
    for d in depths:
        cols = []
        for ped in peds:
            skip = sum(results[(d, ped, s, args.duration)][0] for s in seeds) / len(seeds) / hours
            tt = sum(results[(d, ped, s, args.duration)][1] for s in seeds) / len(seeds)
            cols.append(f"{skip:>8.1f} {tt:>7.2f}")
        print(f"{d:>6g} {int(17.5 * d):>4} " + " ".join(cols))


if __name__ == "__main__":
    main()
