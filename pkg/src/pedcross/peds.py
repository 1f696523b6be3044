"""Social-force pedestrian dynamics.

Pedestrians are stored as a struct of arrays (:class:`Crowd`) so that every
force term can be evaluated for the whole crowd at once. The single-agent
functions broadcast over leading dimensions, so ``driving_force`` and friends
accept either one pedestrian's ``(2,)`` vectors or ``(N, 2)`` crowd arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from numba import njit

from pedcross.grid import build_cells


class Phase(IntEnum):
    APPROACHING = 0
    WAITING = 1
    CROSSING = 2
    EGRESSING = 3


@dataclass(frozen=True)
class PedModelParams:
    desired_speed_mean: float = 1.34  # m/s
    desired_speed_sd: float = 0.26  # m/s
    desired_speed_min: float = 0.6  # truncation bounds of the speed draw
    desired_speed_max: float = 2.2
    radius: float = 0.2  # m
    relaxation_time: float = 0.5  # s
    repulsion_strength: float = 3.0  # m/s^2
    repulsion_range: float = 0.3  # m
    boundary_strength: float = 5.0  # m/s^2
    boundary_range: float = 0.2  # m
    speed_cap_factor: float = 1.3

    @property
    def cutoff(self) -> float:
        return 5.0 * self.repulsion_range

    def violations(self) -> list[str]:
        out = []
        for name, value in vars(self).items():
            if not value > 0:
                out.append(f"ped_params.{name} must be > 0 (got {value})")
        if self.desired_speed_sd >= self.desired_speed_mean:
            out.append("ped_params.desired_speed_sd must be < desired_speed_mean")
        if self.desired_speed_min >= self.desired_speed_max:
            out.append("ped_params.desired_speed_min must be < desired_speed_max")
        return out


@dataclass
class Pedestrian:
    """One pedestrian, used for construction, tests and debugging.

    The engine keeps pedestrians in a :class:`Crowd`; ``Crowd.get`` and
    ``Crowd.append`` convert between the two.
    """

    id: int
    position: np.ndarray
    velocity: np.ndarray
    desired_speed: float
    radius: float = 0.2
    relaxation_time: float = 0.5
    phase: Phase = Phase.APPROACHING
    entered_measured_at: float | None = None
    lane_clearances: list[bool] = field(default_factory=lambda: [False, False])

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)

    @property
    def speed(self) -> float:
        return float(np.hypot(*self.velocity))


def draw_desired_speed(rng: np.random.Generator, params: PedModelParams) -> float:
    """Truncated normal draw by rejection."""
    while True:
        v = rng.normal(params.desired_speed_mean, params.desired_speed_sd)
        if params.desired_speed_min <= v <= params.desired_speed_max:
            return float(v)


def desired_direction(position, sink) -> np.ndarray:
    """Unit vector(s) toward the nearest point of the sink rectangle.

    ``sink`` is anything with ``x_min, x_max, y_min, y_max``. Positions on
    or inside the sink get (0, 1).
    """
    p = np.asarray(position, dtype=float)
    nearest = np.stack(
        [np.clip(p[..., 0], sink.x_min, sink.x_max), np.clip(p[..., 1], sink.y_min, sink.y_max)],
        axis=-1,
    )
    offset = nearest - p
    norm = np.hypot(offset[..., 0], offset[..., 1])
    inside = norm == 0.0
    safe = np.where(inside, 1.0, norm)
    out = offset / safe[..., None]
    out[..., 0] = np.where(inside, 0.0, out[..., 0])
    out[..., 1] = np.where(inside, 1.0, out[..., 1])
    return out


def driving_force(velocity, target_dir, target_speed, tau) -> np.ndarray:
    """(target_speed * target_dir - velocity) / tau."""
    velocity = np.asarray(velocity, dtype=float)
    target_speed = np.asarray(target_speed, dtype=float)
    return (target_speed[..., None] * np.asarray(target_dir, dtype=float) - velocity) / np.asarray(tau)[..., None]


@njit(cache=True)
def _mix64(z):
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _tiebreak(id_a, id_b):
    """Deterministic unit vector for the ordered pair (id_a -> id_b).

    Swapping the pair flips the vector, so coincident agents still repel
    antisymmetrically.
    """
    lo = min(id_a, id_b)
    hi = max(id_a, id_b)
    h = _mix64(np.uint64(lo) * np.uint64(0x100000000) + np.uint64(hi))
    angle = float(h >> np.uint64(11)) / 9007199254740992.0 * 2.0 * np.pi
    sign = 1.0 if id_a == lo else -1.0
    return sign * np.cos(angle), sign * np.sin(angle)


def _tiebreak_direction(id_a: int, id_b: int) -> np.ndarray:
    return np.array(_tiebreak(id_a, id_b))


def repulsion_from_ped(ped: Pedestrian, other: Pedestrian, params: PedModelParams) -> np.ndarray:
    if ped.id == other.id:
        raise ValueError("a pedestrian does not repel itself")
    diff = ped.position - other.position
    d = float(np.hypot(*diff))
    r_sum = ped.radius + other.radius
    if d > params.cutoff:
        return np.zeros(2)
    magnitude = params.repulsion_strength * np.exp((r_sum - d) / params.repulsion_range)
    if d == 0.0:
        return magnitude * _tiebreak_direction(ped.id, other.id)
    return magnitude * (diff / d)


def repulsion_from_boundary(position, radius, x_min, x_max, params: PedModelParams) -> np.ndarray:
    """Push away from the nearest of the two corridor side walls."""
    p = np.asarray(position, dtype=float)
    d_left = p[..., 0] - x_min
    d_right = x_max - p[..., 0]
    left_nearer = d_left <= d_right
    d = np.where(left_nearer, d_left, d_right)
    normal_x = np.where(left_nearer, 1.0, -1.0)
    magnitude = params.boundary_strength * np.exp((radius - d) / params.boundary_range)
    magnitude = np.where(d > 5.0 * params.boundary_range, 0.0, magnitude)
    out = np.zeros(p.shape)
    out[..., 0] = magnitude * normal_x
    return out


def integrate_ped(position, velocity, total_accel, dt, max_speed):
    """Semi-implicit Euler with a speed cap. Returns (position', velocity')."""
    v = np.asarray(velocity, dtype=float) + np.asarray(total_accel, dtype=float) * dt
    speed = np.hypot(v[..., 0], v[..., 1])
    max_speed = np.asarray(max_speed, dtype=float)
    over = speed > max_speed
    scale = np.where(over, max_speed / np.where(over, speed, 1.0), 1.0)
    v = v * scale[..., None]
    return np.asarray(position, dtype=float) + v * dt, v


class Crowd:
    """Struct-of-arrays pedestrian store, kept sorted by id."""

    def __init__(self):
        self.ids = np.zeros(0, dtype=np.int64)
        self.pos = np.zeros((0, 2))
        self.vel = np.zeros((0, 2))
        self.v_des = np.zeros(0)
        self.phase = np.zeros(0, dtype=np.int8)
        self.cleared = np.zeros((0, 2), dtype=bool)
        self.start_time = np.zeros(0)

    def __len__(self) -> int:
        return len(self.ids)

    def append(self, peds: list[Pedestrian]) -> None:
        if not peds:
            return
        self.ids = np.concatenate([self.ids, [p.id for p in peds]])
        self.pos = np.concatenate([self.pos, [p.position for p in peds]])
        self.vel = np.concatenate([self.vel, [p.velocity for p in peds]])
        self.v_des = np.concatenate([self.v_des, [p.desired_speed for p in peds]])
        self.phase = np.concatenate([self.phase, np.array([int(p.phase) for p in peds], dtype=np.int8)])
        self.cleared = np.concatenate([self.cleared, np.array([p.lane_clearances for p in peds], dtype=bool)])
        start = [np.nan if p.entered_measured_at is None else p.entered_measured_at for p in peds]
        self.start_time = np.concatenate([self.start_time, start])

    def keep(self, mask: np.ndarray) -> None:
        for name in ("ids", "pos", "vel", "v_des", "phase", "cleared", "start_time"):
            setattr(self, name, getattr(self, name)[mask])

    def permute(self, order: np.ndarray) -> None:
        self.keep(order)

    def sort_by_id(self) -> None:
        order = np.argsort(self.ids, kind="stable")
        if np.any(order != np.arange(len(order))):
            self.permute(order)

    def get(self, i: int, params: PedModelParams) -> Pedestrian:
        start = self.start_time[i]
        return Pedestrian(
            id=int(self.ids[i]),
            position=self.pos[i].copy(),
            velocity=self.vel[i].copy(),
            desired_speed=float(self.v_des[i]),
            radius=params.radius,
            relaxation_time=params.relaxation_time,
            phase=Phase(int(self.phase[i])),
            entered_measured_at=None if np.isnan(start) else float(start),
            lane_clearances=[bool(c) for c in self.cleared[i]],
        )

    def speeds(self) -> np.ndarray:
        return np.hypot(self.vel[:, 0], self.vel[:, 1])


@njit(cache=True)
def _repulsion_kernel(ids, pos, r_sum, strength, rng, cutoff):
    n = pos.shape[0]
    out = np.zeros((n, 2))
    if n < 2:
        return out
    cx, cy, ncx, ncy, start, items = build_cells(pos, cutoff)
    for i in range(n):
        for gy in range(max(cy[i] - 1, 0), min(cy[i] + 2, ncy)):
            for gx in range(max(cx[i] - 1, 0), min(cx[i] + 2, ncx)):
                c = gy * ncx + gx
                for k in range(start[c], start[c + 1]):
                    j = items[k]
                    if j <= i:
                        continue
                    dx = pos[i, 0] - pos[j, 0]
                    dy = pos[i, 1] - pos[j, 1]
                    d = np.hypot(dx, dy)
                    if d > cutoff:
                        continue
                    mag = strength * np.exp((r_sum - d) / rng)
                    if d == 0.0:
                        ex, ey = _tiebreak(ids[i], ids[j])
                    else:
                        ex = dx / d
                        ey = dy / d
                    out[i, 0] += mag * ex
                    out[i, 1] += mag * ey
                    out[j, 0] -= mag * ex
                    out[j, 1] -= mag * ey
    return out


def crowd_repulsion(ids: np.ndarray, pos: np.ndarray, params: PedModelParams) -> np.ndarray:
    """Summed pedestrian-pedestrian repulsion for every agent.

    Pairs are found with the cell grid (cell side = force cutoff). Each
    pair's term is computed once and applied with opposite signs.
    """
    return _repulsion_kernel(np.ascontiguousarray(ids, dtype=np.int64), np.ascontiguousarray(pos, dtype=float),
                             2.0 * params.radius, params.repulsion_strength, params.repulsion_range, params.cutoff)


@njit(cache=True)
def _advance_kernel(ids, pos, vel, target_speed, max_speed, hold_line, sink, x_min, x_max, y_min, radius, tau, dt,
                    strength, rng, cutoff, wall_strength, wall_range):
    n = pos.shape[0]
    rep = _repulsion_kernel(ids, pos, 2.0 * radius, strength, rng, cutoff)
    new_pos = np.empty_like(pos)
    new_vel = np.empty_like(vel)
    for i in range(n):
        px = pos[i, 0]
        py = pos[i, 1]
        ox = min(max(px, sink[0]), sink[1]) - px
        oy = min(max(py, sink[2]), sink[3]) - py
        norm = np.hypot(ox, oy)
        if norm == 0.0:
            ex, ey = 0.0, 1.0
        else:
            ex, ey = ox / norm, oy / norm
        d_left = px - x_min
        d_right = x_max - px
        d = d_left if d_left <= d_right else d_right
        wall = 0.0
        if d <= 5.0 * wall_range:
            wall = wall_strength * np.exp((radius - d) / wall_range)
            if d_left > d_right:
                wall = -wall
        ax = (target_speed[i] * ex - vel[i, 0]) / tau + rep[i, 0] + wall
        ay = (target_speed[i] * ey - vel[i, 1]) / tau + rep[i, 1] + 0.0
        vx = vel[i, 0] + ax * dt
        vy = vel[i, 1] + ay * dt
        speed = np.hypot(vx, vy)
        if speed > max_speed[i]:
            scale = max_speed[i] / speed
            vx *= scale
            vy *= scale
        nx = px + vx * dt
        ny = py + vy * dt
        if ny > hold_line[i]:
            ny = hold_line[i]
            vy = min(vy, 0.0)
        elif ny < y_min:
            ny = y_min
            vy = max(vy, 0.0)
        new_pos[i, 0] = min(max(nx, x_min), x_max)
        new_pos[i, 1] = ny
        new_vel[i, 0] = vx
        new_vel[i, 1] = vy
    return new_pos, new_vel


def advance_crowd(crowd: Crowd, target_speed: np.ndarray, hold_line: np.ndarray, sink, corridor,
                  params: PedModelParams, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """One social-force step for the whole crowd, fused into one pass.

    Same arithmetic as composing :func:`desired_direction`,
    :func:`driving_force`, :func:`crowd_repulsion`,
    :func:`repulsion_from_boundary` and :func:`integrate_ped`, followed by
    the hold-line clamp (``y <= hold_line`` with no forward velocity there)
    and clamping into the corridor: x between the side walls, y not behind
    the corridor start (no backward velocity there).
    """
    f = np.ascontiguousarray
    return _advance_kernel(
        f(crowd.ids, dtype=np.int64), f(crowd.pos, dtype=float), f(crowd.vel, dtype=float),
        f(target_speed, dtype=float), f(params.speed_cap_factor * crowd.v_des, dtype=float),
        f(hold_line, dtype=float), np.array([sink.x_min, sink.x_max, sink.y_min, sink.y_max]),
        float(corridor.x_min), float(corridor.x_max), float(corridor.y_min), params.radius, params.relaxation_time, float(dt),
        params.repulsion_strength, params.repulsion_range, params.cutoff,
        params.boundary_strength, params.boundary_range)


@njit(cache=True)
def _queue_kernel(pos, held, candidate, reach, lateral):
    n = pos.shape[0]
    blocked = held.copy()
    if n < 2:
        return blocked
    cx, cy, ncx, ncy, start, items = build_cells(pos, reach)
    # front to back, so a whole queue settles within one pass
    order = np.argsort(-pos[:, 1], kind="mergesort")
    for i in order:
        if blocked[i] or not candidate[i]:
            continue
        # anyone ahead by at most one cell side sits in this row or the next
        for gy in range(cy[i], min(cy[i] + 2, ncy)):
            for gx in range(max(cx[i] - 1, 0), min(cx[i] + 2, ncx)):
                c = gy * ncx + gx
                for k in range(start[c], start[c + 1]):
                    j = items[k]
                    if not blocked[j]:
                        continue
                    ahead = pos[j, 1] - pos[i, 1]
                    if 0.0 < ahead <= reach and abs(pos[j, 0] - pos[i, 0]) < lateral:
                        blocked[i] = True
                        break
                if blocked[i]:
                    break
            if blocked[i]:
                break
    return blocked


QUEUE_REACH = 1.0  # m, distance to a held pedestrian ahead that makes one queue up


def queue_blocked(pos: np.ndarray, held: np.ndarray, candidate: np.ndarray, radius: float,
                  reach: float = QUEUE_REACH) -> np.ndarray:
    """Extend ``held`` to candidates standing right behind a held pedestrian.

    A candidate queues when a held pedestrian is ahead of it (in +y) by at
    most ``reach`` and laterally closer than one body width.
    """
    held = np.asarray(held, dtype=np.bool_)
    if not held.any():
        return held.copy()
    # only held pedestrians and candidates take part
    sub = np.flatnonzero(held | np.asarray(candidate, dtype=np.bool_))
    blocked = held.copy()
    blocked[sub] = _queue_kernel(np.ascontiguousarray(np.asarray(pos, dtype=float)[sub]),
                                 np.ascontiguousarray(held[sub]),
                                 np.ascontiguousarray(np.asarray(candidate, dtype=np.bool_)[sub]),
                                 float(reach), 2.0 * radius)
    return blocked
