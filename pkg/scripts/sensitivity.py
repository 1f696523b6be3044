"""Travel-time curve at one vehicle demand, default model against overrides.

    python scripts/sensitivity.py --veh 1200 lane_stretch=50
    python scripts/sensitivity.py --veh 1200 safety_mode=both
    python scripts/sensitivity.py --veh 1200 --seeds 0,1,2 lookahead=true

Each pedestrian demand is run once per seed with and without the overrides,
using the same seed for both, and the two mean curves are printed side by
side together with the peak found in each.
"""
from __future__ import annotations

import argparse
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from pedcross import curves
from pedcross.engine import run
from pedcross.scenario import ScenarioConfig

PEDS = (300, 600, 900, 1500, 2250, 3000, 4500, 6000)


def cell(args):
    ped, veh, duration, seed, overrides = args
    cfg = ScenarioConfig(ped_demand=ped, veh_demand=veh, duration=duration, seed=seed).with_overrides(**overrides)
    s = run(cfg).summary
    return s.mean_tt, s.avg_veh_jam


def curve(veh, duration, seeds, overrides, jobs):
    tasks = [(p, veh, duration, s, overrides) for p in PEDS for s in seeds]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        out = np.array(list(pool.map(cell, tasks))).reshape(len(PEDS), len(seeds), 2)
    return out.mean(axis=1)


def describe(y) -> str:
    j = curves.peak_then_drop(list(y), 0.05)
    if j is None:
        return "no peak with a 5% drop"
    return f"peak at {PEDS[j]} ped/h, drop {100 * curves.descent_after(list(y), j):.1f}%"


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("overrides", nargs="+", help="scenario overrides, e.g. lane_stretch=50")
    p.add_argument("--veh", type=float, default=1200.0)
    p.add_argument("--duration", type=float, default=3600.0)
    p.add_argument("--seeds", default="1")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    args = p.parse_args()
    seeds = [int(s) for s in args.seeds.split(",")]
    overrides = dict(kv.split("=", 1) for kv in args.overrides)

    base = curve(args.veh, args.duration, seeds, {}, args.jobs)
    alt = curve(args.veh, args.duration, seeds, overrides, args.jobs)
    label = " ".join(args.overrides)
    print(f"veh {args.veh:g}/h, {args.duration:g} s, seeds {seeds}")
    print(f"{'ped':>6} {'tt base':>9} {'tt alt':>9} {'jam base':>9} {'jam alt':>9}")
    for ped, (tb, jb), (ta, ja) in zip(PEDS, base, alt):
        print(f"{ped:>6} {tb:>9.1f} {ta:>9.1f} {jb:>9.2f} {ja:>9.2f}")
    print(f"base: {describe(base[:, 0])}")
    print(f"{label}: {describe(alt[:, 0])}")


if __name__ == "__main__":
    main()
