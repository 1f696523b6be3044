"""Travel times, jam sizes and run summaries, plus their CSV forms."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TRAVEL_TIMES_HEADER = "ped_id,start_s,end_s,travel_s"
TIMESERIES_HEADER = "t_s,ped_jam,veh_jam_lane0,veh_jam_lane1,veh_jam_total"
SWEEP_HEADER = ("veh_demand,ped_demand,rep,seed,mean_tt_s,median_tt_s,p95_tt_s,"
                "avg_ped_jam,avg_veh_jam,inserted,skipped,arrived,collisions")
TRAJECTORY_HEADER = "t_s,agent_kind,id,x,y,speed"


class MetricsError(RuntimeError):
    pass


def fmt(value) -> str:
    """Six significant digits for floats, plain ints otherwise."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.6g}"


@dataclass(frozen=True)
class TravelTimeRecord:
    ped_id: int
    start_time: float
    end_time: float

    @property
    def travel_time(self) -> float:
        return self.end_time - self.start_time


@dataclass(frozen=True)
class JamSample:
    time: float
    ped_jam: int
    veh_jam: tuple[int, int]

    @property
    def veh_jam_total(self) -> int:
        return sum(self.veh_jam)


@dataclass(frozen=True)
class RunSummary:
    mean_tt: float
    median_tt: float
    p95_tt: float
    avg_ped_jam: float
    avg_veh_jam: float
    demanded: int
    inserted: int
    skipped: int
    arrived: int
    collisions: int
    seed: int
    ped_demand: float
    veh_demand: float
    duration: float
    conservation_violations: int = 0
    unsafe_passes: int = 0  # vehicles that could not stop passing an occupied area
    vehicles_spawned: int = 0
    vehicle_arrivals_drawn: int = 0

    def sweep_row(self, rep: int) -> str:
        values = [self.veh_demand, self.ped_demand, rep, self.seed, self.mean_tt, self.median_tt, self.p95_tt,
                  self.avg_ped_jam, self.avg_veh_jam, self.inserted, self.skipped, self.arrived, self.collisions]
        return ",".join(fmt(v) for v in values)


def on_zone_transition(start_time: np.ndarray, y: np.ndarray, t: float, measured_y: float, sink_y: float):
    """Update first-entry start times; return (start_time', arrived mask).

    Raises MetricsError if anyone reaches the sink without a start time.
    """
    start_time = start_time.copy()
    entering = np.isnan(start_time) & (y >= measured_y)
    start_time[entering] = t
    arrived = y >= sink_y
    if np.any(arrived & np.isnan(start_time)):
        raise MetricsError("pedestrian reached the sink without entering the measured zone")
    return start_time, arrived


def ped_jam_size(pos: np.ndarray, approach, measured) -> int:
    """Pedestrians whose centre lies on the approach or measured zone."""
    pos = np.asarray(pos, dtype=float).reshape(-1, 2)
    x, y = pos[:, 0], pos[:, 1]
    return int(np.count_nonzero(approach.contains(x, y) | measured.contains(x, y)))


def veh_jam_size(s: np.ndarray, v: np.ndarray, conflict_end_s: float, threshold: float) -> int:
    """Slow vehicles (speed < threshold) upstream of or on the conflict area."""
    s = np.asarray(s, dtype=float)
    return int(np.count_nonzero((np.asarray(v) < threshold) & (s <= conflict_end_s)))


@dataclass
class MetricsRecorder:
    records: list[TravelTimeRecord] = field(default_factory=list)
    samples: list[JamSample] = field(default_factory=list)
    collisions: int = 0
    unsafe_passes: int = 0
    conservation_violations: int = 0
    trajectory_rows: list[str] | None = None

    def record_arrivals(self, ids, start, end: float) -> None:
        for pid, st in zip(ids, start):
            self.records.append(TravelTimeRecord(int(pid), float(st), float(end)))

    def sample(self, t: float, ped_jam: int, veh_jam: tuple[int, int]) -> None:
        self.samples.append(JamSample(t, ped_jam, tuple(int(v) for v in veh_jam)))

    def travel_times(self) -> np.ndarray:
        return np.array([r.travel_time for r in self.records])

    def summarize(self, cfg, accounting, vehicles_spawned: int = 0, arrivals_drawn: int = 0) -> RunSummary:
        tt = self.travel_times()
        if len(tt):
            mean, median, p95 = float(tt.mean()), float(np.median(tt)), float(np.percentile(tt, 95))
        else:
            mean = median = p95 = math.nan
        if self.samples:
            ped = float(np.mean([s.ped_jam for s in self.samples]))
            veh = float(np.mean([s.veh_jam_total for s in self.samples]))
        else:
            ped = veh = 0.0
        return RunSummary(
            mean_tt=mean, median_tt=median, p95_tt=p95, avg_ped_jam=ped, avg_veh_jam=veh,
            demanded=accounting.demanded, inserted=accounting.inserted, skipped=accounting.skipped,
            arrived=len(self.records), collisions=self.collisions, seed=cfg.seed,
            ped_demand=cfg.ped_demand, veh_demand=cfg.veh_demand, duration=cfg.duration,
            conservation_violations=self.conservation_violations, unsafe_passes=self.unsafe_passes,
            vehicles_spawned=vehicles_spawned, vehicle_arrivals_drawn=arrivals_drawn,
        )


def travel_times_csv(records: list[TravelTimeRecord]) -> str:
    out = io.StringIO()
    out.write(TRAVEL_TIMES_HEADER + "\n")
    for r in records:
        out.write(f"{r.ped_id},{fmt(r.start_time)},{fmt(r.end_time)},{fmt(r.travel_time)}\n")
    return out.getvalue()


def timeseries_csv(samples: list[JamSample]) -> str:
    out = io.StringIO()
    out.write(TIMESERIES_HEADER + "\n")
    for s in samples:
        out.write(f"{fmt(s.time)},{s.ped_jam},{s.veh_jam[0]},{s.veh_jam[1]},{s.veh_jam_total}\n")
    return out.getvalue()


@dataclass
class MetricsOutput:
    summary: RunSummary
    records: list[TravelTimeRecord]
    samples: list[JamSample]
    trajectory_rows: list[str] | None = None

    def travel_times_csv(self) -> str:
        return travel_times_csv(self.records)

    def timeseries_csv(self) -> str:
        return timeseries_csv(self.samples)

    def summary_csv(self, rep: int = 0) -> str:
        return SWEEP_HEADER + "\n" + self.summary.sweep_row(rep) + "\n"

    def trajectories_csv(self) -> str | None:
        if self.trajectory_rows is None:
            return None
        return TRAJECTORY_HEADER + "\n" + "".join(self.trajectory_rows)

    def write(self, out_dir, rep: int = 0) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        files = {
            "travel_times.csv": self.travel_times_csv(),
            "timeseries.csv": self.timeseries_csv(),
            "summary.csv": self.summary_csv(rep),
        }
        traj = self.trajectories_csv()
        if traj is not None:
            files["trajectories.csv"] = traj
        paths = []
        for name, text in files.items():
            path = out_dir / name
            path.write_text(text, encoding="utf-8", newline="\n")
            paths.append(path)
        return paths
