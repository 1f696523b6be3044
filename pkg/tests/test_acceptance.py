"""Acceptance criteria A1 to A10.

Every simulated cell is run once per session (``runs`` fixture) and shared by
the criteria; the summaries are also written to runs/acceptance/cells.csv. Each test prints one ``A<n> PASS|FAIL`` line with the measured
values, straight to the terminal so that it survives output capture.

Cell seeds come from ``cell_seed(MASTER_SEED, veh, ped, rep)``, the same
derivation the sweep CLI uses, so any cell can be reproduced with::

    python -m pedcross --sweep <spec with seed = 0> ...
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import pytest

from pedcross import conflict, curves
from pedcross.cli import cell_seed
from pedcross.conflict import ConflictAreaState, ConflictParams
from pedcross.engine import run
from pedcross.metrics import SWEEP_HEADER
from pedcross.scenario import Rect, ScenarioConfig

MASTER_SEED = 0
HOUR = 3600.0
RECORD = Path(__file__).resolve().parents[1] / "runs" / "acceptance" / "cells.csv"

SWEEP_PEDS = (300, 600, 900, 1500, 2250, 3000, 4500, 6000)
SWEEP_VEHS = (0, 300, 600, 900, 1200, 1500, 1800)
A5_PEDS = (9000, 12000, 15000)
A6_PEDS = (900, 3000, 6000, 12000)

pytestmark = pytest.mark.acceptance


def cell_config(veh: float, ped: float, duration: float = HOUR, rep: int = 0) -> ScenarioConfig:
    return ScenarioConfig(ped_demand=ped, veh_demand=veh, duration=duration,
                          seed=cell_seed(MASTER_SEED, veh, ped, rep))


def plan() -> dict[tuple, ScenarioConfig]:
    cells = {}
    for veh in SWEEP_VEHS:
        for ped in SWEEP_PEDS:
            cells[(veh, ped, HOUR)] = cell_config(veh, ped)
    for ped in A5_PEDS:
        cells[(0, ped, HOUR)] = cell_config(0, ped)
    for ped in A6_PEDS:
        cells[(1800, ped, HOUR)] = cell_config(1800, ped)
    for veh in (0, 1800):
        cells[(veh, 12000, 2 * HOUR)] = cell_config(veh, 12000, 2 * HOUR)
    return cells


def _csvs(out) -> tuple[str, str, str]:
    return out.travel_times_csv(), out.timeseries_csv(), out.summary_csv()


def _run(cfg: ScenarioConfig):
    out = run(cfg)
    return out.summary, _csvs(out)


@pytest.fixture(scope="session")
def runs():
    cells = plan()
    jobs = min(len(cells), os.cpu_count() or 1)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run, cells.values()))
    else:
        results = [_run(cfg) for cfg in cells.values()]
    RECORD.parent.mkdir(parents=True, exist_ok=True)
    rows = [f"{key[2]:g},{summary.sweep_row(0)}\n" for key, (summary, _) in zip(cells, results)]
    RECORD.write_text("duration_s," + SWEEP_HEADER + "\n" + "".join(rows), encoding="utf-8")
    return dict(zip(cells, results))


@pytest.fixture
def report(capsys):
    def emit(name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{name} {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


def _mean_tt(runs, veh, ped, duration=HOUR) -> float:
    return runs[(veh, ped, duration)][0].mean_tt


def _curve(runs, veh) -> list[float]:
    return [_mean_tt(runs, veh, p) for p in SWEEP_PEDS]


def _fmt_curve(y) -> str:
    return " ".join(f"{v:.1f}" for v in y)


def test_a1_travel_time_peak(runs, report):
    y = _curve(runs, 1200)
    peak = curves.peak_then_drop(y, 0.05)
    if peak is None:
        detail = "no interior maximum with a 5% descent"
    else:
        detail = f"peak at {SWEEP_PEDS[peak]} ped/h, drop {100 * curves.descent_after(y, peak):.1f}%"
    report("A1", peak is not None, f"veh 1200: tt = [{_fmt_curve(y)}] s; {detail}")
    assert peak is not None


def test_a2_threshold(runs, report):
    table = {veh: _curve(runs, veh) for veh in SWEEP_VEHS}
    low_clean = not any(curves.has_peak(table[v], 0.02) for v in SWEEP_VEHS if v <= 400)
    high_peak = all(curves.has_peak(table[v], 0.02) for v in SWEEP_VEHS if v >= 1200)
    threshold = curves.peak_threshold(table, 0.02)
    ok = low_clean and high_peak and threshold is not None and 400 <= threshold <= 1200
    flags = ", ".join(f"{v}:{'peak' if curves.has_peak(table[v], 0.02) else 'none'}" for v in SWEEP_VEHS)
    report("A2", ok, f"detected threshold = {threshold} veh/h (target band 700-800); {flags}")
    assert ok


def test_a3_free_flow(runs, report):
    expected = 26.0 / 1.34
    tt = _mean_tt(runs, 0, 300)
    err = abs(tt - expected) / expected
    report("A3", err <= 0.10, f"mean tt = {tt:.2f} s vs {expected:.2f} s, error {100 * err:.1f}% (tol 10%)")
    assert err <= 0.10


def test_a4_capacity_convergence(runs, report):
    free = _mean_tt(runs, 0, 12000, 2 * HOUR)
    busy = _mean_tt(runs, 1800, 12000, 2 * HOUR)
    gap = abs(busy - free) / free
    report("A4", gap <= 0.10, f"ped 12000, 2 h: tt(veh 0) = {free:.2f} s, tt(veh 1800) = {busy:.2f} s, "
                              f"difference {100 * gap:.1f}% (tol 10%)")
    assert gap <= 0.10


def test_a5_input_saturation(runs, report):
    low = {p: runs[(0, p, HOUR)][0].skipped for p in SWEEP_PEDS + (9000,)}
    skipped_12k = runs[(0, 12000, HOUR)][0].skipped
    tt12, tt15 = _mean_tt(runs, 0, 12000), _mean_tt(runs, 0, 15000)
    tt_gap = abs(tt15 - tt12) / tt12
    ok = not any(low.values()) and skipped_12k > 0 and tt_gap <= 0.03
    report("A5", ok, f"skipped at <=9000: {sum(low.values())} (9000: {low[9000]}), at 12000: {skipped_12k}; "
                     f"tt 12000 = {tt12:.2f} s, 15000 = {tt15:.2f} s, difference {100 * tt_gap:.2f}% (tol 3%)")
    assert ok


def test_a6_jam_growth(runs, report):
    jams = [runs[(1800, p, HOUR)][0].avg_veh_jam for p in A6_PEDS]
    monotone = curves.nearly_monotone(jams, 1.0)
    ratio = jams[-1] / jams[0] if jams[0] > 0 else float("inf")
    ok = monotone and ratio >= 5.0
    report("A6", ok, f"veh 1800 jam at ped {A6_PEDS} = [{_fmt_curve(jams)}] veh, "
                     f"12000/900 ratio {ratio:.1f} (need >= 5)")
    assert ok


def test_a7_no_collisions(runs, report):
    collisions = sum(s.collisions for s, _ in runs.values())
    unsafe = sum(s.unsafe_passes for s, _ in runs.values())
    report("A7", collisions == 0, f"{collisions} collisions over {len(runs)} runs "
                                  f"({unsafe} exempt passes of vehicles unable to stop)")
    assert collisions == 0


def test_a8_determinism(runs, report):
    key = (1800, 900, HOUR)
    first = runs[key][1]
    again = _csvs(run(plan()[key]))
    same = [a == b for a, b in zip(first, again)]
    report("A8", all(same), f"rerun of veh 1800 / ped 900: travel_times, timeseries, summary identical = {same}")
    assert all(same)


# ----------------------------------------------------------------- A9 oracle

def _oracle_accept(dist, v_veh, v_ped, v_des, cp: ConflictParams, depth, tau, visibility) -> bool:
    """Exact rational evaluation of the acceptance inequality, written from
    the rule rather than from the implementation. Inputs are read as the
    decimals they are written as, so grid points on an exact tie compare
    equal (and are accepted)."""
    def F(x):
        return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)
    if dist > visibility:
        return True
    arrival = F(dist) / max(F(v_veh), Fraction(1, 10))
    standing = F(v_ped) < F(v_des) / 2
    t_clear = F(depth) / F(v_des) + (F(tau) if standing else Fraction(0))
    sf, rear = F(cp.safety_factor), F(cp.rear_gap)
    need = {"clear_time": sf * t_clear + rear,
            "rear_gap": t_clear + sf * rear,
            "both": sf * (t_clear + rear)}[cp.safety_mode]
    return arrival >= need


def test_a9_gap_oracle(report):
    distances = (0.0, 1.0, 2.5, 4.0, 6.0, 8.5, 11.0, 15.0, 20.0, 27.5, 35.0, 50.0, 70.0, 99.5, 100.0, 140.0)
    veh_speeds = (0.0, 0.05, 1.0, 2.5, 5.0, 8.0, 10.0, 12.5, 13.89, 17.0)
    ped_speeds = (0.6, 0.8, 1.0, 1.15, 1.34, 1.5, 1.7, 1.9, 2.05, 2.2)
    modes = ("clear_time", "rear_gap", "both")
    radius, tau = 0.2, 0.5
    area = ConflictAreaState(0, Rect(0.0, 3.5, 10.0, 13.5), 0, 500.0, 503.5)
    depth = area.depth + 2 * radius
    exact_depth = Fraction("3.5") + 2 * Fraction("0.2")
    points = mismatches = 0
    for mode in modes:
        cp = ConflictParams(safety_mode=mode)
        for d in distances:
            for vv in veh_speeds:
                arrival = conflict.next_vehicle_arrival(area, [area.edge_s - d], [vv], cp.visibility, 4.5)
                for vd in ped_speeds:
                    for waiting in (True, False):
                        v_now = 0.0 if waiting else vd
                        t_clear = conflict.crossing_clear_time(v_now, vd, depth, tau)
                        got = bool(conflict.gap_accept(arrival, t_clear, cp))
                        want = _oracle_accept(d, vv, v_now, vd, cp, exact_depth, tau, cp.visibility)
                        points += 1
                        mismatches += got != want
    ok = mismatches == 0 and points <= 10_000
    report("A9", ok, f"{mismatches} mismatches on {points} grid points")
    assert ok


def test_a10_conservation(runs, report):
    bad = {k: s.conservation_violations for k, (s, _) in runs.items() if s.conservation_violations}
    unbalanced = [k for k, (s, _) in runs.items() if s.demanded != s.inserted + s.skipped]
    ok = not bad and not unbalanced
    report("A10", ok, f"{len(runs)} runs, sampled violations {sum(bad.values())}, "
                      f"end-of-run demand imbalance in {len(unbalanced)} runs")
    assert ok
