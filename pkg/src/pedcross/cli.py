"""Command line front end: single runs, demand sweeps and plots.

Single run::

    python -m pedcross --ped-demand 900 --veh-demand 1800 --duration 3600 --seed 42 --out runs/a

Sweep, driven by a ``key = value`` spec file (see :func:`parse_sweep_spec`)::

    python -m pedcross --sweep sweeps/fig3.txt --jobs 4 --out runs/fig3 --plots
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

from pedcross.engine import SimulationAbort, run
from pedcross.metrics import SWEEP_HEADER, MetricsOutput
from pedcross.scenario import ScenarioConfig, ScenarioError, load_scenario, validate_scenario

log = logging.getLogger("pedcross")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ABORT = 3


def cell_seed(master_seed: int, veh_demand: float, ped_demand: float, rep: int) -> int:
    """Seed of one sweep cell: first 8 bytes (big endian) of BLAKE2b over
    ``"{master}|{veh:g}|{ped:g}|{rep}"``.

    Each cell depends only on its own coordinates, so editing the grid never
    reseeds the cells that remain.
    """
    key = f"{master_seed}|{veh_demand:g}|{ped_demand:g}|{rep}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


@dataclass(frozen=True)
class SweepSpec:
    ped_demands: tuple[float, ...]
    veh_demands: tuple[float, ...]
    replications: int = 1
    base: ScenarioConfig = field(default_factory=ScenarioConfig)

    def violations(self) -> list[str]:
        out = []
        if not self.ped_demands or not self.veh_demands:
            out.append("ped_demands and veh_demands must be non-empty")
        if any(d < 0 for d in self.ped_demands + self.veh_demands):
            out.append("demands must be >= 0")
        if self.replications < 1:
            out.append("replications must be >= 1")
        return out

    def cells(self) -> list[tuple[float, float, int]]:
        """(veh, ped, rep) in the order rows appear in sweep.csv."""
        return [(v, p, r) for v in sorted(set(self.veh_demands)) for p in sorted(set(self.ped_demands))
                for r in range(self.replications)]

    def cell_config(self, veh: float, ped: float, rep: int) -> ScenarioConfig:
        return self.base.with_overrides(ped_demand=ped, veh_demand=veh,
                                        seed=cell_seed(self.base.seed, veh, ped, rep))


_SWEEP_KEYS = {"ped_demands", "veh_demands", "replications", "scenario"}


def _demand_list(text: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ScenarioError(f"{key}: expected comma-separated numbers, got {text!r}") from None


def parse_sweep_spec(text: str, source: str = "<string>", base_dir: Path | None = None) -> SweepSpec:
    """Sweep spec: ``ped_demands``/``veh_demands`` (comma-separated), optional
    ``replications``, optional ``scenario`` path, plus any scenario key as a
    base-config override (e.g. ``duration = 3600``)."""
    values, overrides = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        key, sep, raw = (part.strip() for part in content.partition("="))
        if not sep or not key or not raw:
            raise ScenarioError(f"{source}:{lineno}: expected 'key = value', got {content!r}")
        target = values if key in _SWEEP_KEYS else overrides
        if key in target:
            raise ScenarioError(f"{source}:{lineno}: duplicate key {key!r}")
        target[key] = raw
    missing = {"ped_demands", "veh_demands"} - set(values)
    if missing:
        raise ScenarioError(f"{source}: missing {', '.join(sorted(missing))}")
    base = ScenarioConfig()
    if "scenario" in values:
        path = Path(values["scenario"])
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        base = load_scenario(path)
    base = base.with_overrides(**overrides)
    try:
        reps = int(values.get("replications", "1"))
    except ValueError:
        raise ScenarioError(f"{source}: replications must be an integer") from None
    spec = SweepSpec(_demand_list(values["ped_demands"], "ped_demands"),
                     _demand_list(values["veh_demands"], "veh_demands"), reps, base)
    report = spec.violations()
    if report:
        raise ScenarioError(f"{source}: " + "; ".join(report))
    return spec


def load_sweep_spec(path) -> SweepSpec:
    path = Path(path)
    return parse_sweep_spec(path.read_text(encoding="utf-8"), str(path), path.parent)


def cell_dir(out_dir: Path, veh: float, ped: float, rep: int) -> Path:
    return Path(out_dir) / "cells" / f"veh{veh:g}_ped{ped:g}_rep{rep}"


def _write_abort(out_dir: Path, exc: SimulationAbort) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "abort_dump.json"
    path.write_text(json.dumps({"error": str(exc), "state": exc.dump}, indent=1), encoding="utf-8")
    return path


def run_single(cfg: ScenarioConfig, out_dir, dump_trajectories: bool = False) -> MetricsOutput:
    out = run(cfg, dump_trajectories=dump_trajectories)
    out.write(out_dir)
    return out


def _run_cell(args) -> tuple[tuple[float, float, int], MetricsOutput]:
    key, cfg, dump = args
    return key, run(cfg, dump_trajectories=dump)


def run_sweep(spec: SweepSpec, out_dir, jobs: int = 1, dump_trajectories: bool = False) -> Path:
    """Run every cell, writing per-cell files as cells finish and sweep.csv
    (rows ordered by veh, ped, rep) at the end."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [((v, p, r), spec.cell_config(v, p, r), dump_trajectories) for v, p, r in spec.cells()]
    rows = {}

    def done(key, out):
        v, p, r = key
        out.write(cell_dir(out_dir, v, p, r), rep=r)
        rows[key] = out.summary.sweep_row(r)
        log.info("cell veh=%g ped=%g rep=%d: mean travel time %.2f s", v, p, r, out.summary.mean_tt)

    if jobs <= 1:
        for task in tasks:
            done(*_run_cell(task))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for fut in as_completed([pool.submit(_run_cell, t) for t in tasks]):
                done(*fut.result())
    path = out_dir / "sweep.csv"
    body = "".join(rows[key] + "\n" for key in spec.cells())
    path.write_text(SWEEP_HEADER + "\n" + body, encoding="utf-8", newline="\n")
    return path


def read_csv(path) -> list[dict[str, float]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _cell_means(rows: list[dict], column: str) -> dict[float, list[tuple[float, float]]]:
    """veh -> [(ped, replication mean of column)] sorted by ped."""
    groups: dict[tuple[float, float], list[float]] = {}
    for row in rows:
        groups.setdefault((row["veh_demand"], row["ped_demand"]), []).append(row[column])
    curves: dict[float, list[tuple[float, float]]] = {}
    for (veh, ped), vals in sorted(groups.items()):
        curves.setdefault(veh, []).append((ped, sum(vals) / len(vals)))
    return curves


def emit_plots(sweep_csv, out_dir, series: list[Path] | None = None) -> list[Path]:
    """Travel time and mean vehicle jam against pedestrian demand (one curve
    per vehicle demand) plus jam-size time series for the given cells."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_csv(sweep_csv)
    if not rows:
        raise ValueError(f"{sweep_csv}: no rows to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for column, ylabel, name in (("mean_tt_s", "mean travel time [s]", "travel_time_vs_ped_demand.png"),
                                 ("avg_veh_jam", "mean vehicle jam [veh]", "veh_jam_vs_ped_demand.png")):
        fig, ax = plt.subplots(figsize=(6, 4))
        for veh, points in _cell_means(rows, column).items():
            ped, val = zip(*points)
            ax.plot(ped, val, marker="o", label=f"{veh:g} veh/h")
        ax.set_xlabel("pedestrian demand [ped/h]")
        ax.set_ylabel(ylabel)
        ax.legend(title="per lane", fontsize="small")
        fig.tight_layout()
        fig.savefig(out_dir / name, dpi=120)
        plt.close(fig)
        written.append(out_dir / name)
    for path in series or []:
        samples = read_csv(path)
        if not samples:
            continue
        fig, ax = plt.subplots(figsize=(7, 3.5))
        t = [s["t_s"] / 60.0 for s in samples]
        ax.plot(t, [s["veh_jam_total"] for s in samples], lw=0.8, label="vehicles")
        ax.plot(t, [s["ped_jam"] for s in samples], lw=0.8, label="pedestrians")
        ax.set_xlabel("time [min]")
        ax.set_ylabel("jam size")
        ax.set_title(path.parent.name)
        ax.legend(fontsize="small")
        fig.tight_layout()
        name = out_dir / f"jam_series_{path.parent.name}.png"
        fig.savefig(name, dpi=120)
        plt.close(fig)
        written.append(name)
    return written


def series_cells(spec: SweepSpec, out_dir: Path) -> list[Path]:
    """Time series worth plotting: every pedestrian demand at the highest
    vehicle demand, first replication."""
    veh = max(spec.veh_demands)
    return [cell_dir(out_dir, veh, p, 0) / "timeseries.csv" for p in sorted(set(spec.ped_demands))]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pedcross", description=__doc__.split("\n")[0])
    p.add_argument("--scenario", type=Path, help="key = value scenario file (base configuration)")
    p.add_argument("--ped-demand", type=float, help="pedestrians per hour")
    p.add_argument("--veh-demand", type=float, help="vehicles per hour and lane")
    p.add_argument("--duration", type=float, help="simulated seconds")
    p.add_argument("--dt", type=float, help="time step in seconds")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--sweep", type=Path, help="sweep spec file; runs a demand grid instead of one run")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="concurrent sweep cells")
    p.add_argument("--plots", action="store_true", help="write PNG plots next to the CSVs")
    p.add_argument("--dump-trajectories", action="store_true", help="also write trajectories.csv")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _overrides(args) -> dict:
    names = {"ped_demand": args.ped_demand, "veh_demand": args.veh_demand, "duration": args.duration,
             "dt": args.dt, "seed": args.seed}
    return {k: v for k, v in names.items() if v is not None}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.sweep:
            spec = load_sweep_spec(args.sweep)
            base = spec.base.with_overrides(**{k: v for k, v in _overrides(args).items()
                                               if k not in ("ped_demand", "veh_demand")})
            spec = SweepSpec(spec.ped_demands, spec.veh_demands, spec.replications, base)
            report = validate_scenario(base)
        else:
            cfg = load_scenario(args.scenario) if args.scenario else ScenarioConfig()
            cfg = cfg.with_overrides(**_overrides(args))
            report = validate_scenario(cfg)
        if report:
            raise ScenarioError("invalid scenario: " + "; ".join(report))
    except (ScenarioError, OSError) as exc:
        print(f"pedcross: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        if args.sweep:
            path = run_sweep(spec, args.out, jobs=args.jobs, dump_trajectories=args.dump_trajectories)
            if args.plots:
                emit_plots(path, args.out / "plots", series_cells(spec, args.out))
        else:
            run_single(cfg, args.out, dump_trajectories=args.dump_trajectories)
            if args.plots:
                emit_plots(args.out / "summary.csv", args.out / "plots", [args.out / "timeseries.csv"])
    except SimulationAbort as exc:
        dump = _write_abort(args.out, exc)
        print(f"pedcross: simulation aborted: {exc} (state written to {dump})", file=sys.stderr)
        return EXIT_ABORT
    except ValueError as exc:
        print(f"pedcross: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK
