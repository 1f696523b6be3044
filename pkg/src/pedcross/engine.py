"""Fixed-timestep orchestration of pedestrians, vehicles and conflict areas.

Every step reads one frozen snapshot of all agents: insertion, occupancy,
yield flags, pedestrian decisions and accelerations are computed from it,
then positions are committed together. Pedestrians are kept sorted by id,
so results do not depend on the order agents happen to be stored in.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from pedcross import conflict
from pedcross.conflict import ConflictAreaState
from pedcross.demand import InputAccounting, pedestrian_arrivals, try_insert
from pedcross.metrics import MetricsOutput, MetricsRecorder, on_zone_transition, ped_jam_size, veh_jam_size
from pedcross.peds import Crowd, Phase, advance_crowd, queue_blocked
from pedcross.scenario import Geometry, ScenarioConfig, ScenarioError, ZoneKind, build_geometry, validate_scenario
from pedcross.vehicles import Lane, car_following_accel, integrate_vehicle, spawn_vehicle, virtual_leader_gaps

STREAMS = ("ped_demand", "veh_demand", "placement", "desired_speed")


class SimulationAbort(RuntimeError):
    """Internal consistency violation; ``dump`` holds a state snapshot."""

    def __init__(self, message: str, dump: dict):
        super().__init__(message)
        self.dump = dump


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent generators derived from the master seed by fixed offsets."""
    return {name: np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
            for k, name in enumerate(STREAMS)}


@dataclass
class SimState:
    cfg: ScenarioConfig
    geometry: Geometry
    t: float = 0.0
    step_index: int = 0
    crowd: Crowd = field(default_factory=Crowd)
    lanes: list[Lane] = field(default_factory=list)
    areas: list[ConflictAreaState] = field(default_factory=list)
    rngs: dict = field(default_factory=dict)
    accounting: InputAccounting = field(default_factory=InputAccounting)
    metrics: MetricsRecorder = field(default_factory=MetricsRecorder)
    next_ped_id: int = 0
    next_veh_id: int = 0
    exempt: list[set] = field(default_factory=lambda: [set(), set()])
    arrivals: list = field(default_factory=lambda: [None, None])

    @property
    def active(self) -> int:
        return len(self.crowd)


def initial_state(cfg: ScenarioConfig, dump_trajectories: bool = False) -> SimState:
    report = validate_scenario(cfg)
    if report:
        raise ScenarioError("invalid scenario: " + "; ".join(report))
    geo = build_geometry(cfg)
    lanes = [Lane(lg.lane_id, lg.length, cfg.veh_params) for lg in geo.lanes]
    areas = [ConflictAreaState(k, rect, lg.lane_id, lg.conflict_start_s, lg.conflict_end_s)
             for k, (rect, lg) in enumerate(zip(geo.conflict_rects, geo.lanes))]
    state = SimState(cfg=cfg, geometry=geo, lanes=lanes, areas=areas, rngs=make_streams(cfg.seed))
    if dump_trajectories:
        state.metrics.trajectory_rows = []
    return state


def _insert(state: SimState) -> None:
    cfg = state.cfg
    count = pedestrian_arrivals(cfg.ped_demand, cfg.dt, state.rngs["ped_demand"])
    if count:
        new, _ = try_insert(count, state.geometry.zone(ZoneKind.INPUT), state.crowd.pos,
                            state.rngs["placement"], state.rngs["desired_speed"], cfg.ped_params,
                            state.next_ped_id, state.accounting)
        state.crowd.append(new)
        state.next_ped_id += len(new)
    for lane in state.lanes:
        if spawn_vehicle(lane, cfg.veh_demand, cfg.dt, state.rngs["veh_demand"], state.next_veh_id) is not None:
            state.next_veh_id += 1


def _conflict_flags(state: SimState) -> list[np.ndarray]:
    """Occupancy, arrival projection and must-yield flag per area."""
    cfg = state.cfg
    crowd, pp, cp = state.crowd, cfg.ped_params, cfg.conflict_params
    masks = []
    for k, (area, lane) in enumerate(zip(state.areas, state.lanes)):
        mask = conflict.occupancy_mask(area, crowd.pos)
        masks.append(mask)
        arrival = conflict.next_vehicle_arrival(area, lane.s, lane.v, cp.visibility, cfg.veh_params.length)
        state.arrivals[k] = arrival
        committed = crowd.cleared[:, k] & (crowd.pos[:, 1] < area.near_y)
        times = conflict.committed_clear_times(crowd.pos[committed, 1], crowd.speeds()[committed],
                                               crowd.v_des[committed], area.far_y, pp.radius, pp.relaxation_time)
        flag = conflict.compute_must_yield(bool(mask.any()), arrival, times, cp)
        if flag and not area.must_yield:
            # vehicles that cannot stop any more when the flag rises are exempt
            dist = area.edge_s - lane.s
            free = conflict.collision_free_distance(lane.v, cfg.dt, cfg.veh_params.max_decel)
            state.exempt[k] = set(lane.ids[(dist >= 0) & (dist < free)].tolist())
        elif not flag:
            state.exempt[k] = set()
        occupants = frozenset(crowd.ids[mask].tolist()) if mask.any() else frozenset()
        state.areas[k] = dataclasses.replace(area, occupants=occupants, must_yield=flag)
    return masks


def _update_phases(state: SimState) -> tuple[np.ndarray, np.ndarray]:
    """Monotone phase update; returns (holding mask, per-pedestrian hold line)."""
    crowd, pp = state.crowd, state.cfg.ped_params
    a0, a1 = state.areas
    y = crowd.pos[:, 1]
    look = conflict.decision_distance(pp.radius, crowd.v_des, pp.relaxation_time)
    c0, c1 = crowd.cleared[:, 0], crowd.cleared[:, 1]
    new_phase = np.full(len(crowd), Phase.APPROACHING, dtype=np.int8)
    new_phase[~c0 & (y >= a0.near_y - look)] = Phase.WAITING
    new_phase[c0] = Phase.CROSSING
    new_phase[c0 & c1 & (y > a1.far_y)] = Phase.EGRESSING
    crowd.phase = np.maximum(crowd.phase, new_phase)
    at_edge = (crowd.phase == Phase.WAITING) | (c0 & ~c1 & (y >= a1.near_y - look))
    must_stop = ~(c0 & c1)
    holding = queue_blocked(crowd.pos, at_edge, must_stop, pp.radius)
    hold_line = np.where(c0, a1.near_y, a0.near_y) - pp.radius
    hold_line[~must_stop] = np.inf
    return holding, hold_line


def _move_pedestrians(state: SimState, holding: np.ndarray, hold_line: np.ndarray) -> None:
    crowd, cfg = state.crowd, state.cfg
    if len(crowd) == 0:
        return
    corridor = state.geometry.corridor
    target = np.where(holding, 0.0, crowd.v_des)
    crowd.pos, crowd.vel = advance_crowd(crowd, target, hold_line, state.geometry.zone(ZoneKind.SINK), corridor,
                                         cfg.ped_params, cfg.dt)


def _move_vehicles(state: SimState, occupied: list[bool]) -> None:
    cfg = state.cfg
    vp, cp = cfg.veh_params, cfg.conflict_params
    for k, (lane, area) in enumerate(zip(state.lanes, state.areas)):
        if len(lane) == 0:
            continue
        gap, lead_v = lane.leader_gaps()
        acc = car_following_accel(lane.v, gap, lead_v, vp)
        vgap = virtual_leader_gaps(lane.s, lane.v, area.edge_s, area.must_yield, vp, cp.visibility)
        yielding = np.isfinite(vgap)
        if yielding.any():
            acc[yielding] = np.minimum(acc[yielding], car_following_accel(lane.v[yielding], vgap[yielding], 0.0, vp))
        s_old = lane.s
        lane.s, lane.v = integrate_vehicle(lane.s, lane.v, acc, cfg.dt)
        if occupied[k]:
            entering = (s_old <= area.edge_s) & (lane.s > area.edge_s)
            for vid in lane.ids[entering].tolist():
                if vid in state.exempt[k]:
                    state.metrics.unsafe_passes += 1
                else:
                    state.metrics.collisions += 1
        lane.remove_exited()
        if lane.overlaps():
            raise SimulationAbort(f"vehicle overlap on lane {lane.lane_id} at t={state.t:.1f}", dump_state(state))


def _sample(state: SimState) -> None:
    cfg, geo, crowd = state.cfg, state.geometry, state.crowd
    ped_jam = ped_jam_size(crowd.pos, geo.zone(ZoneKind.APPROACH), geo.zone(ZoneKind.MEASURED))
    veh = tuple(veh_jam_size(l.s, l.v, a.far_s, cfg.veh_params.jam_speed_threshold)
                for l, a in zip(state.lanes, state.areas))
    state.metrics.sample(state.t, ped_jam, veh)
    acc = state.accounting
    if not (acc.balanced and acc.inserted == len(crowd) + len(state.metrics.records)):
        state.metrics.conservation_violations += 1
    rows = state.metrics.trajectory_rows
    if rows is not None:
        t = f"{state.t:.6g}"
        speeds = crowd.speeds()
        for i in range(len(crowd)):
            rows.append(f"{t},ped,{crowd.ids[i]},{crowd.pos[i, 0]:.6g},{crowd.pos[i, 1]:.6g},{speeds[i]:.6g}\n")
        for lane, lg in zip(state.lanes, geo.lanes):
            y = 0.5 * (lg.y_min + lg.y_max)
            xs = lg.world_x(lane.s, cfg.geometry.lane_stretch, cfg.geometry.corridor_width)
            for vid, x, v in zip(lane.ids, xs, lane.v):
                rows.append(f"{t},veh,{vid},{x:.6g},{y:.6g},{v:.6g}\n")


def step(state: SimState) -> SimState:
    cfg = state.cfg
    state.crowd.sort_by_id()
    _insert(state)
    masks = _conflict_flags(state)
    conflict.pedestrian_decisions(state.crowd, state.areas, state.arrivals, cfg.ped_params, cfg.conflict_params)
    holding, hold_line = _update_phases(state)
    _move_pedestrians(state, holding, hold_line)
    _move_vehicles(state, [bool(m.any()) for m in masks])

    state.step_index += 1
    state.t = state.step_index * cfg.dt
    crowd = state.crowd
    if len(crowd):
        geo = state.geometry
        crowd.start_time, arrived = on_zone_transition(
            crowd.start_time, crowd.pos[:, 1], state.t,
            geo.zone(ZoneKind.MEASURED).y_min, geo.zone(ZoneKind.SINK).y_min)
        if arrived.any():
            state.metrics.record_arrivals(crowd.ids[arrived], crowd.start_time[arrived], state.t)
            crowd.keep(~arrived)
    if state.step_index % cfg.sample_every == 0:
        _sample(state)
    return state


def dump_state(state: SimState) -> dict:
    c = state.crowd
    return {
        "t": state.t,
        "pedestrians": {"ids": c.ids.tolist(), "pos": c.pos.tolist(), "vel": c.vel.tolist(),
                        "phase": c.phase.tolist(), "cleared": c.cleared.tolist()},
        "lanes": [{"ids": l.ids.tolist(), "s": l.s.tolist(), "v": l.v.tolist(), "queue": l.entry_queue}
                  for l in state.lanes],
        "must_yield": [a.must_yield for a in state.areas],
    }


def finalize(state: SimState) -> MetricsOutput:
    drawn = sum(l.arrivals_drawn for l in state.lanes)
    spawned = sum(l.spawned for l in state.lanes)
    summary = state.metrics.summarize(state.cfg, state.accounting, spawned, drawn)
    return MetricsOutput(summary, list(state.metrics.records), list(state.metrics.samples),
                         state.metrics.trajectory_rows)


def run(cfg: ScenarioConfig, dump_trajectories: bool = False) -> MetricsOutput:
    state = initial_state(cfg, dump_trajectories)
    for _ in range(cfg.n_steps):
        step(state)
    return finalize(state)
