"""World geometry, scenario configuration and the ``key = value`` scenario file.

Coordinate frame: the street runs along x, pedestrians walk in +y. The
corridor occupies ``0 <= x <= corridor_width``. Along y the zones follow
each other as input, approach, measured (which contains the street), sink.
Lane 0 is the near lane and drives in +x, lane 1 the far lane, driving in -x.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from pedcross.conflict import ConflictParams
from pedcross.peds import PedModelParams
from pedcross.vehicles import VehModelParams


@dataclass(frozen=True)
class GeometryConfig:
    street_width: float = 7.0
    lane_width: float = 3.5
    corridor_width: float = 3.5
    lane_stretch: float = 500.0  # per side of the crossing
    travel_distance: float = 26.0
    conflict_area_side: float = 3.5
    input_area_depth: float = 0.5  # tuned: density cap binds just below 12000 ped/h
    input_area_width: float = 3.5  # centred in the corridor
    approach_zone_depth: float = 6.0


class ZoneKind(str, Enum):
    INPUT = "input"
    APPROACH = "approach"
    MEASURED = "measured"
    CONFLICT = "conflict"
    SINK = "sink"


@dataclass(frozen=True)
class Rect:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def contains(self, x, y):
        """Closed-rectangle membership; broadcasts over arrays."""
        return (x >= self.x_min) & (x <= self.x_max) & (y >= self.y_min) & (y <= self.y_max)


@dataclass(frozen=True)
class Zone:
    kind: ZoneKind
    rect: Rect


@dataclass(frozen=True)
class LaneGeometry:
    lane_id: int
    direction: int  # +1 drives toward +x, -1 toward -x
    y_min: float
    y_max: float
    length: float
    conflict_start_s: float  # upstream edge of the conflict area along the lane
    conflict_end_s: float

    def world_x(self, s, stretch: float, corridor_width: float):
        """Front-bumper x coordinate for lane position ``s``."""
        if self.direction > 0:
            return s - stretch
        return corridor_width + stretch - s


@dataclass(frozen=True)
class Geometry:
    zones: tuple[Zone, ...]
    lanes: tuple[LaneGeometry, ...]
    corridor: Rect

    def zone(self, kind: ZoneKind) -> Rect:
        return next(z.rect for z in self.zones if z.kind == kind)

    @property
    def conflict_rects(self) -> list[Rect]:
        return [z.rect for z in self.zones if z.kind == ZoneKind.CONFLICT]

    @property
    def street(self) -> Rect:
        rects = self.conflict_rects
        return Rect(self.corridor.x_min, self.corridor.x_max, rects[0].y_min, rects[-1].y_max)


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    ped_demand: float = 0.0  # ped/h
    veh_demand: float = 0.0  # veh/h per lane
    duration: float = 36000.0  # s
    dt: float = 0.1  # s
    seed: int = 0
    ped_params: PedModelParams = field(default_factory=PedModelParams)
    veh_params: VehModelParams = field(default_factory=VehModelParams)
    conflict_params: ConflictParams = field(default_factory=ConflictParams)
    sampling_interval: float = 1.0  # s

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def sample_every(self) -> int:
        return int(round(self.sampling_interval / self.dt))

    def with_overrides(self, **values) -> ScenarioConfig:
        """Apply flat or dotted overrides, e.g. ``relaxation_time=0.4``."""
        return _apply(self, values)


class ScenarioError(ValueError):
    pass


def _is_multiple(value: float, step: float) -> bool:
    if step <= 0:
        return False
    k = value / step
    return k >= 1 and abs(k - round(k)) < 1e-9 * max(1.0, k)


def validate_scenario(cfg: ScenarioConfig) -> list[str]:
    """List every invariant violation; an empty list means valid."""
    report = []
    g = cfg.geometry
    for name, value in vars(g).items():
        if not value > 0:
            report.append(f"geometry.{name} must be > 0 (got {value})")
    if not g.travel_distance > g.street_width:
        report.append("measured segment shorter than street (travel_distance <= street_width)")
    if not math.isclose(g.street_width, 2.0 * g.lane_width):
        report.append("street_width must equal two lane widths")
    if not (math.isclose(g.conflict_area_side, g.lane_width) and math.isclose(g.conflict_area_side, g.corridor_width)):
        report.append("conflict_area_side must equal lane_width and corridor_width")
    if g.input_area_width > g.corridor_width:
        report.append("input_area_width must not exceed corridor_width")
    if not cfg.dt > 0:
        report.append(f"dt must be > 0 (got {cfg.dt})")
    elif not _is_multiple(cfg.duration, cfg.dt):
        report.append(f"duration must be a positive multiple of dt (got {cfg.duration})")
    if cfg.dt > 0 and not _is_multiple(cfg.sampling_interval, cfg.dt):
        report.append(f"sampling_interval must be a positive multiple of dt (got {cfg.sampling_interval})")
    if cfg.dt > cfg.ped_params.relaxation_time:
        report.append(f"dt ({cfg.dt}) exceeds relaxation_time ({cfg.ped_params.relaxation_time})")
    if cfg.ped_demand < 0:
        report.append(f"ped_demand must be >= 0 (got {cfg.ped_demand})")
    if cfg.veh_demand < 0:
        report.append(f"veh_demand must be >= 0 (got {cfg.veh_demand})")
    if not 0 <= cfg.seed < 2**64:
        report.append("seed must be a 64-bit unsigned integer")
    report += cfg.ped_params.violations()
    report += cfg.veh_params.violations()
    report += cfg.conflict_params.violations()
    return report


def build_geometry(cfg: ScenarioConfig) -> Geometry:
    g = cfg.geometry
    w = g.corridor_width
    y_approach = g.input_area_depth
    y_measured = y_approach + g.approach_zone_depth
    y_sink = y_measured + g.travel_distance
    y_street = y_measured + (g.travel_distance - g.street_width) / 2.0
    zones = [
        Zone(ZoneKind.INPUT, Rect((w - g.input_area_width) / 2.0, (w + g.input_area_width) / 2.0, 0.0, y_approach)),
        Zone(ZoneKind.APPROACH, Rect(0.0, w, y_approach, y_measured)),
        Zone(ZoneKind.MEASURED, Rect(0.0, w, y_measured, y_sink)),
    ]
    lanes = []
    length = 2.0 * g.lane_stretch + w
    for k, direction in enumerate((+1, -1)):
        y0 = y_street + k * g.lane_width
        zones.append(Zone(ZoneKind.CONFLICT, Rect(0.0, w, y0, y0 + g.lane_width)))
        lanes.append(LaneGeometry(k, direction, y0, y0 + g.lane_width, length, g.lane_stretch, g.lane_stretch + w))
    zones.append(Zone(ZoneKind.SINK, Rect(0.0, w, y_sink, y_sink + g.input_area_depth)))
    corridor = Rect(0.0, w, 0.0, y_sink + g.input_area_depth)
    return Geometry(tuple(zones), tuple(lanes), corridor)


_SECTIONS = {
    "geometry": GeometryConfig,
    "ped_params": PedModelParams,
    "veh_params": VehModelParams,
    "conflict_params": ConflictParams,
}


def _field_types(cls) -> dict[str, type]:
    return {f.name: type(f.default) for f in dataclasses.fields(cls)}


def _resolve_key(key: str) -> tuple[str | None, str]:
    """Map a flat or dotted key to (section, field)."""
    if "." in key:
        section, name = key.split(".", 1)
        if section in _SECTIONS and name in _field_types(_SECTIONS[section]):
            return section, name
        raise KeyError(key)
    top = {f.name for f in dataclasses.fields(ScenarioConfig)} - set(_SECTIONS)
    if key in top:
        return None, key
    for section, cls in _SECTIONS.items():
        if key in _field_types(cls):
            return section, key
    raise KeyError(key)


def _coerce(kind: type, raw, key: str):
    if isinstance(raw, kind):
        return raw
    text = str(raw).strip()
    if kind is bool:
        lowered = text.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ScenarioError(f"{key}: expected a boolean value, got {text!r}")
    try:
        if kind is int:
            try:
                return int(text, 0)
            except ValueError:
                return _int_from_float(text)
        if kind is float:
            value = float(text)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind is str:
            return text
    except ValueError:
        raise ScenarioError(f"{key}: expected a {kind.__name__} value, got {text!r}") from None
    raise ScenarioError(f"{key}: unsupported field type {kind.__name__}")


def _int_from_float(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(text)
    return int(value)


def _apply(cfg: ScenarioConfig, values: dict) -> ScenarioConfig:
    top, nested = {}, {s: {} for s in _SECTIONS}
    top_types = {f.name: type(f.default) for f in dataclasses.fields(ScenarioConfig) if f.name not in _SECTIONS}
    for key, raw in values.items():
        try:
            section, name = _resolve_key(key)
        except KeyError:
            raise ScenarioError(f"unknown key {key!r}") from None
        if section is None:
            top[name] = _coerce(top_types[name], raw, key)
        else:
            nested[section][name] = _coerce(_field_types(_SECTIONS[section])[name], raw, key)
    for section, changes in nested.items():
        if changes:
            top[section] = dataclasses.replace(getattr(cfg, section), **changes)
    return dataclasses.replace(cfg, **top)


def parse_scenario(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse ``key = value`` text into a config; invalid files raise ScenarioError."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ScenarioError(f"{source}:{lineno}: expected 'key = value', got {content!r}")
        key, raw = (part.strip() for part in content.split("=", 1))
        if not key or not raw:
            raise ScenarioError(f"{source}:{lineno}: empty key or value")
        if key in values:
            raise ScenarioError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = raw
        try:
            _resolve_key(key)
        except KeyError:
            raise ScenarioError(f"{source}:{lineno}: unknown key {key!r}") from None
    try:
        cfg = _apply(ScenarioConfig(), values)
    except ScenarioError as exc:
        raise ScenarioError(f"{source}: {exc}") from None
    report = validate_scenario(cfg)
    if report:
        raise ScenarioError(f"{source}: invalid scenario: " + "; ".join(report))
    return cfg


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), source=str(path))


def dump_scenario(cfg: ScenarioConfig) -> str:
    """Inverse of :func:`parse_scenario`, dotted keys for nested parameters."""
    lines = []
    for f in dataclasses.fields(ScenarioConfig):
        value = getattr(cfg, f.name)
        if f.name in _SECTIONS:
            for sub in dataclasses.fields(value):
                lines.append(f"{f.name}.{sub.name} = {getattr(value, sub.name)!r}".replace("'", ""))
        else:
            lines.append(f"{f.name} = {value!r}")
    return "\n".join(lines) + "\n"
