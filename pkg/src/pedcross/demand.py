"""Pedestrian demand: Poisson arrivals and density-capped insertion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pedcross.peds import PedModelParams, Pedestrian, draw_desired_speed

CAP_DENSITY = 5.0  # pedestrians per m^2 on the input area
PLACEMENT_ATTEMPTS = 50


@dataclass
class InputAccounting:
    demanded: int = 0
    inserted: int = 0
    skipped: int = 0
    cap_density: float = CAP_DENSITY

    @property
    def balanced(self) -> bool:
        return self.demanded == self.inserted + self.skipped


def pedestrian_arrivals(ped_demand: float, dt: float, rng: np.random.Generator) -> int:
    """Poisson number of arrivals in one step."""
    return int(rng.poisson(ped_demand * dt / 3600.0))


def try_insert(count: int, zone, existing_pos: np.ndarray, rng_place: np.random.Generator,
               rng_speed: np.random.Generator, params: PedModelParams, first_id: int,
               accounting: InputAccounting | None = None) -> tuple[list[Pedestrian], int]:
    """Insert up to ``count`` pedestrians into ``zone`` under the density cap.

    Each arrival samples a batch of candidate positions and takes the first
    one keeping 2r clearance from everyone; if none does, the candidate with
    the largest nearest-neighbour distance is used. Returns the new
    pedestrians (at rest) and the number skipped.
    """
    r = params.radius
    pos = np.asarray(existing_pos, dtype=float).reshape(-1, 2)
    occupancy = int(np.count_nonzero(zone.contains(pos[:, 0], pos[:, 1]))) if len(pos) else 0
    # only pedestrians near the zone can conflict with a placement
    near = pos[pos[:, 1] <= zone.y_max + 2.0 * r] if len(pos) else pos
    inserted, skipped = [], 0
    for _ in range(count):
        if (occupancy + 1) / zone.area > CAP_DENSITY:
            skipped += 1
            continue
        cand = np.column_stack([
            rng_place.uniform(zone.x_min + r, zone.x_max - r, PLACEMENT_ATTEMPTS),
            rng_place.uniform(zone.y_min, zone.y_max, PLACEMENT_ATTEMPTS),
        ])
        if len(near):
            d = np.hypot(cand[:, None, 0] - near[None, :, 0], cand[:, None, 1] - near[None, :, 1]).min(axis=1)
            ok = np.flatnonzero(d >= 2.0 * r)
            k = int(ok[0]) if len(ok) else int(np.argmax(d))
        else:
            k = 0
        p = cand[k]
        ped = Pedestrian(id=first_id + len(inserted), position=p, velocity=np.zeros(2),
                         desired_speed=draw_desired_speed(rng_speed, params),
                         radius=r, relaxation_time=params.relaxation_time)
        inserted.append(ped)
        near = np.vstack([near, p])
        occupancy += 1
    if accounting is not None:
        accounting.demanded += count
        accounting.inserted += len(inserted)
        accounting.skipped += skipped
    return inserted, skipped
