"""Longitudinal vehicle dynamics on a single lane (Intelligent Driver Model)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class VehModelParams:
    length: float = 4.5  # m
    desired_speed: float = 13.89  # m/s, ~50 km/h
    max_accel: float = 1.5  # m/s^2
    comfortable_decel: float = 2.0  # m/s^2
    max_decel: float = 7.0  # m/s^2, emergency bound
    min_gap: float = 2.0  # m
    headway: float = 1.2  # s
    jam_speed_threshold: float = 1.39  # m/s, ~5 km/h

    def violations(self) -> list[str]:
        out = [f"veh_params.{k} must be > 0 (got {v})" for k, v in vars(self).items() if not v > 0]
        if self.max_decel < self.comfortable_decel:
            out.append("veh_params.max_decel must be >= comfortable_decel")
        return out


@dataclass
class Vehicle:
    id: int
    lane: int
    s: float  # front bumper, metres from the upstream end
    speed: float = 0.0
    length: float = 4.5


def car_following_accel(v, gap, leader_speed, params: VehModelParams):
    """IDM acceleration, clamped to [-max_decel, max_accel].

    ``gap`` is the net bumper-to-bumper distance; ``np.inf`` means free road.
    """
    v = np.asarray(v, dtype=float)
    dv = v - np.asarray(leader_speed, dtype=float)
    s_star = params.min_gap + v * params.headway + v * dv / (2.0 * math.sqrt(params.max_accel * params.comfortable_decel))
    with np.errstate(divide="ignore"):
        interaction = (s_star / np.asarray(gap, dtype=float)) ** 2
    acc = params.max_accel * (1.0 - (v / params.desired_speed) ** 4 - interaction)
    return np.clip(acc, -params.max_decel, params.max_accel)


def stopping_distance(v, params: VehModelParams):
    return np.asarray(v, dtype=float) ** 2 / (2.0 * params.max_decel)


def virtual_leader(vehicle: Vehicle, edge_s: float, must_yield: bool, params: VehModelParams,
                   visibility: float = math.inf) -> tuple[float, float] | None:
    """Stationary obstacle ``min_gap`` short of the conflict area, or None.

    Only vehicles upstream of the area that can still stop before it (and see
    it) are given the obstacle.
    """
    gap = float(virtual_leader_gaps(np.array([vehicle.s]), np.array([vehicle.speed]), edge_s,
                                    must_yield, params, visibility)[0])
    return None if math.isinf(gap) else (gap, 0.0)


def virtual_leader_gaps(s: np.ndarray, v: np.ndarray, edge_s: float, must_yield: bool,
                        params: VehModelParams, visibility: float = math.inf) -> np.ndarray:
    gaps = np.full(len(s), np.inf)
    if not must_yield or len(s) == 0:
        return gaps
    dist = edge_s - s
    applies = (dist >= 0.0) & (dist <= visibility) & (dist >= stopping_distance(v, params))
    # floor keeps the IDM finite for vehicles already inside the min-gap band
    gaps[applies] = np.maximum(dist[applies] - params.min_gap, 1e-3)
    return gaps


def integrate_vehicle(s, speed, accel, dt):
    """speed' = max(0, speed + accel*dt); s' = s + speed'*dt."""
    v = np.maximum(0.0, np.asarray(speed, dtype=float) + np.asarray(accel, dtype=float) * dt)
    return np.asarray(s, dtype=float) + v * dt, v


def entry_speed(gap: float, leader_speed: float, params: VehModelParams) -> float:
    """Largest entry speed that keeps headway and a comfortable stop to the leader."""
    if math.isinf(gap):
        return params.desired_speed
    room = max(gap - params.min_gap, 0.0)
    return min(params.desired_speed, room / params.headway,
               math.sqrt(2.0 * params.comfortable_decel * room) + leader_speed)


class Lane:
    """Vehicles on one lane, ordered downstream-first (index 0 leads)."""

    def __init__(self, lane_id: int, length: float, params: VehModelParams):
        self.lane_id = lane_id
        self.length = length
        self.params = params
        self.ids = np.zeros(0, dtype=np.int64)
        self.s = np.zeros(0)
        self.v = np.zeros(0)
        self.entry_queue = 0
        self.arrivals_drawn = 0
        self.spawned = 0

    def __len__(self) -> int:
        return len(self.ids)

    def entry_blocked(self) -> bool:
        """Entry is blocked until the last vehicle is a safe headway ahead."""
        if len(self.s) == 0:
            return False
        gap = self.s[-1] - self.params.length
        return gap < self.params.min_gap + self.v[-1] * self.params.headway

    def spawn(self, arrived: bool, next_id: int) -> Vehicle | None:
        """Queue a drawn arrival and insert the queue head if the entry is free."""
        if arrived:
            self.arrivals_drawn += 1
            self.entry_queue += 1
        if self.entry_queue == 0 or self.entry_blocked():
            return None
        if len(self.s):
            gap = self.s[-1] - self.params.length
            speed = entry_speed(gap, self.v[-1], self.params)
        else:
            speed = self.params.desired_speed
        veh = Vehicle(id=next_id, lane=self.lane_id, s=0.0, speed=speed, length=self.params.length)
        self.ids = np.append(self.ids, veh.id)
        self.s = np.append(self.s, 0.0)
        self.v = np.append(self.v, speed)
        self.entry_queue -= 1
        self.spawned += 1
        return veh

    def leader_gaps(self) -> tuple[np.ndarray, np.ndarray]:
        """Net gap and speed of each vehicle's leader (inf/0 for the head)."""
        gap = np.full(len(self.s), np.inf)
        lead_v = np.zeros(len(self.s))
        if len(self.s) > 1:
            gap[1:] = self.s[:-1] - self.params.length - self.s[1:]
            lead_v[1:] = self.v[:-1]
        return gap, lead_v

    def remove_exited(self) -> int:
        gone = self.s >= self.length
        n = int(gone.sum())
        if n:
            keep = ~gone
            self.ids, self.s, self.v = self.ids[keep], self.s[keep], self.v[keep]
        return n

    def overlaps(self) -> bool:
        if len(self.s) < 2:
            return False
        return bool(np.any(self.s[1:] > self.s[:-1] - self.params.length))


def spawn_vehicle(lane: Lane, veh_demand: float, dt: float, rng: np.random.Generator, next_id: int) -> Vehicle | None:
    """One Bernoulli(demand*dt/3600) arrival draw for ``lane``."""
    p = min(1.0, veh_demand * dt / 3600.0)
    return lane.spawn(bool(rng.random() < p), next_id)
