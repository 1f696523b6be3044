"""Vehicle-priority conflict areas between the pedestrian corridor and a lane.

Pedestrians accept a gap when the nearest visible vehicle arrives later than
their own scaled clearance time plus the rear gap; vehicles brake for an area
that is occupied or about to be occupied by a committed pedestrian.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

ARRIVAL_SPEED_FLOOR = 0.1  # m/s, keeps stopped vehicles non-threatening
OVERTAKE_SPEED_MARGIN = 0.1  # m/s
OVERTAKE_LATERAL_SLACK = 0.1  # m

# where the safety factor applies in the acceptance window
SAFETY_MODES = ("clear_time", "rear_gap", "both")


@dataclass(frozen=True)
class ConflictParams:
    visibility: float = 100.0  # m
    front_gap: float = 0.5  # s
    rear_gap: float = 0.5  # s
    safety_factor: float = 1.5
    priority: str = "vehicle"
    safety_mode: str = "clear_time"
    lookahead: bool = False  # also check the far lane before leaving the curb

    def violations(self) -> list[str]:
        out = []
        if not self.visibility > 0:
            out.append("conflict_params.visibility must be > 0")
        if self.front_gap < 0 or self.rear_gap < 0:
            out.append("conflict_params gaps must be >= 0")
        if not self.safety_factor >= 1:
            out.append("conflict_params.safety_factor must be >= 1")
        if self.priority != "vehicle":
            out.append("conflict_params.priority: only 'vehicle' priority is supported")
        if self.safety_mode not in SAFETY_MODES:
            out.append(f"conflict_params.safety_mode must be one of {SAFETY_MODES}")
        return out


@dataclass(frozen=True)
class ConflictAreaState:
    area_id: int
    rect: object  # scenario.Rect
    lane_id: int
    edge_s: float  # upstream edge along the lane
    far_s: float
    occupants: frozenset = frozenset()
    must_yield: bool = False

    @property
    def near_y(self) -> float:
        return self.rect.y_min

    @property
    def far_y(self) -> float:
        return self.rect.y_max

    @property
    def depth(self) -> float:
        return self.rect.y_max - self.rect.y_min


def occupancy_mask(area: ConflictAreaState, pos: np.ndarray) -> np.ndarray:
    return area.rect.contains(pos[:, 0], pos[:, 1])


def update_occupancy(area: ConflictAreaState, ids, pos) -> ConflictAreaState:
    """Recompute occupants from pedestrian centres (closed rectangle)."""
    pos = np.asarray(pos, dtype=float).reshape(-1, 2)
    inside = occupancy_mask(area, pos)
    return dataclasses.replace(area, occupants=frozenset(int(i) for i in np.asarray(ids)[inside]))


def next_vehicle_arrival(area: ConflictAreaState, s, v, visibility: float, length: float) -> float | None:
    """Seconds until the nearest visible vehicle reaches the area's upstream edge.

    A vehicle already overlapping the area counts as arriving now. Returns
    None when no vehicle is within ``visibility``.
    """
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    if s.size == 0:
        return None
    if np.any((s > area.edge_s) & (s - length < area.far_s)):
        return 0.0
    dist = area.edge_s - s
    visible = (dist >= 0.0) & (dist <= visibility)
    if not visible.any():
        return None
    k = np.flatnonzero(visible)[np.argmin(dist[visible])]
    return float(dist[k] / max(v[k], ARRIVAL_SPEED_FLOOR))


def crossing_clear_time(speed, desired_speed, depth, tau):
    """Time to walk ``depth`` metres, plus tau for a standing start.

    A pedestrian moving slower than half its desired speed counts as standing.
    """
    speed = np.asarray(speed, dtype=float)
    desired_speed = np.asarray(desired_speed, dtype=float)
    standing = speed < desired_speed / 2.0
    return depth / desired_speed + np.where(standing, tau, 0.0)


def required_window(t_clear, cparams: ConflictParams):
    t_clear = np.asarray(t_clear, dtype=float)
    sf = cparams.safety_factor
    if cparams.safety_mode == "clear_time":
        return sf * t_clear + cparams.rear_gap
    if cparams.safety_mode == "rear_gap":
        return t_clear + sf * cparams.rear_gap
    return sf * (t_clear + cparams.rear_gap)


def gap_accept(arrival: float | None, t_clear, cparams: ConflictParams):
    """True (enter) iff the vehicle arrives no sooner than the required window."""
    t_clear = np.asarray(t_clear, dtype=float)
    if arrival is None:
        return np.ones(t_clear.shape, dtype=bool) if t_clear.ndim else np.bool_(True)
    return arrival >= required_window(t_clear, cparams)


def lateral_corridor_free(occupant_x, radius: float, x_min: float, x_max: float) -> bool:
    """Whether a free lane of width 2r + slack exists beside the occupants."""
    need = 2.0 * radius + OVERTAKE_LATERAL_SLACK
    xs = np.sort(np.asarray(occupant_x, dtype=float))
    edges = np.concatenate([[x_min], xs + radius])
    starts = np.concatenate([xs - radius, [x_max]])
    # running max of occupied right edges handles overlapping bodies
    covered = np.maximum.accumulate(edges)
    return bool(np.any(starts - covered >= need))


def overtake_feasible(desired_speed, occupant_speeds, occupant_x, radius: float, x_min: float, x_max: float):
    """Can a pedestrian with ``desired_speed`` pass the occupants of an area?"""
    occupant_speeds = np.asarray(occupant_speeds, dtype=float)
    if occupant_speeds.size == 0:
        return np.ones(np.shape(desired_speed), dtype=bool)
    fast_enough = np.asarray(desired_speed, dtype=float) >= occupant_speeds.max() + OVERTAKE_SPEED_MARGIN
    return fast_enough & lateral_corridor_free(occupant_x, radius, x_min, x_max)


def committed_clear_times(y, speed, desired_speed, far_y: float, radius: float, tau: float):
    """Projected time until a committed pedestrian's body has left the area."""
    return crossing_clear_time(speed, desired_speed, far_y + radius - np.asarray(y, dtype=float), tau)


def compute_must_yield(occupied: bool, arrival: float | None, committed_times, cparams: ConflictParams) -> bool:
    if occupied:
        return True
    committed_times = np.asarray(committed_times, dtype=float)
    if arrival is None or committed_times.size == 0:
        return False
    return bool(np.any(committed_times > arrival - cparams.front_gap))


def decision_distance(radius: float, desired_speed, tau: float):
    """Look-ahead before an area's near edge at which pedestrians decide."""
    return radius + np.asarray(desired_speed) * tau + 0.5


def pedestrian_decisions(crowd, areas, arrivals, pparams, cparams) -> None:
    """Per-area gap acceptance and overtake/follow decisions, in place.

    ``crowd.cleared[:, k]`` is set for pedestrians allowed to enter area k.
    Areas are handled in walking order; area k+1 is only considered once
    area k is cleared. A clearance is never withdrawn, and anyone whose
    centre is already on an area is cleared for it.
    """
    if len(crowd) == 0:
        return
    y = crowd.pos[:, 1]
    look = decision_distance(pparams.radius, crowd.v_des, pparams.relaxation_time)
    speed = crowd.speeds()
    for k, area in enumerate(areas):
        on_area = occupancy_mask(area, crowd.pos)
        crowd.cleared[on_area, k] = True
        eligible = ~crowd.cleared[:, k] & (y >= area.near_y - look)
        if k > 0:
            eligible &= crowd.cleared[:, k - 1]
        if not eligible.any():
            continue
        idx = np.flatnonzero(eligible)
        t_clear = crossing_clear_time(speed[idx], crowd.v_des[idx], area.depth + 2.0 * pparams.radius,
                                      pparams.relaxation_time)
        enter = np.asarray(gap_accept(arrivals[k], t_clear, cparams))
        if cparams.lookahead and k + 1 < len(areas):
            ahead = areas[k + 1]
            t_far = crossing_clear_time(speed[idx], crowd.v_des[idx], ahead.far_y + pparams.radius - y[idx],
                                        pparams.relaxation_time)
            enter &= np.asarray(gap_accept(arrivals[k + 1], t_far, cparams))
        if on_area.any():
            passing = overtake_feasible(crowd.v_des[idx], speed[on_area], crowd.pos[on_area, 0],
                                        pparams.radius, area.rect.x_min, area.rect.x_max)
            # those who cannot pass adopt the occupants' decision, which is to go
            enter = np.where(passing, enter, True)
        crowd.cleared[idx, k] = enter


def collision_free_distance(v, dt: float, max_decel: float):
    """Distance beyond which a vehicle can always stop before an area."""
    v = np.asarray(v, dtype=float)
    return v * v / (2.0 * max_decel) + v * dt

