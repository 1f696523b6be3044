"""How much car following smooths vehicle headways before the crossing.

    python scripts/headway_regularization.py --veh 1200 --duration 3600
    python scripts/headway_regularization.py --veh 1200 lane_stretch=50

Runs without pedestrians and records, per lane, the times vehicles enter the
lane and the times their front bumper reaches the conflict area. Prints the
coefficient of variation of the headways and the share of headways long
enough for a standing pedestrian to accept (about 5.6 s for an average
walker: 1.5 x (3.9 / 1.34 + 0.5) + 0.5).
"""
from __future__ import annotations

import argparse

import numpy as np

from pedcross.engine import initial_state, step
from pedcross.scenario import ScenarioConfig


def window(cfg: ScenarioConfig) -> float:
    pp, cp = cfg.ped_params, cfg.conflict_params
    depth = cfg.geometry.conflict_area_side + 2 * pp.radius
    return cp.safety_factor * (depth / pp.desired_speed_mean + pp.relaxation_time) + cp.rear_gap


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("overrides", nargs="*")
    p.add_argument("--veh", type=float, default=1200.0)
    p.add_argument("--duration", type=float, default=3600.0)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args()
    overrides = dict(kv.split("=", 1) for kv in args.overrides)
    cfg = ScenarioConfig(veh_demand=args.veh, duration=args.duration, seed=args.seed).with_overrides(**overrides)
    state = initial_state(cfg)
    edge = [a.edge_s for a in state.areas]
    seen = [set(), set()]
    entered, reached = [[], []], [[], []]
    for _ in range(cfg.n_steps):
        before = [dict(zip(l.ids.tolist(), l.s.tolist())) for l in state.lanes]
        step(state)
        for k, lane in enumerate(state.lanes):
            for vid, s in zip(lane.ids.tolist(), lane.s.tolist()):
                if vid not in seen[k]:
                    seen[k].add(vid)
                    entered[k].append(state.t)
                if vid in before[k] and before[k][vid] < edge[k] <= s:
                    reached[k].append(state.t)
    need = window(cfg)
    print(f"veh {args.veh:g}/h per lane, {args.duration:g} s, acceptance window {need:.2f} s")
    print(f"{'lane':>4} {'where':>8} {'n':>5} {'mean h':>7} {'cv':>5} {'P(h>win)':>9}")
    for k in range(2):
        for name, times in (("entry", entered[k]), ("crossing", reached[k])):
            h = np.diff(times)
            h = h[len(h) // 10:]  # drop the filling of the lane
            print(f"{k:>4} {name:>8} {len(h):>5} {h.mean():>7.2f} {h.std() / h.mean():>5.2f} {(h > need).mean():>9.3f}")


if __name__ == "__main__":
    main()
