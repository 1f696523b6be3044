import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pedcross.scenario import (GeometryConfig, ScenarioConfig, ScenarioError, ZoneKind, build_geometry,
                               dump_scenario, load_scenario, parse_scenario, validate_scenario)


def test_file_with_only_demands_keeps_defaults(tmp_path):
    path = tmp_path / "fig5.txt"
    path.write_text("ped_demand = 900\nveh_demand = 1800\n", encoding="utf-8")
    cfg = load_scenario(path)
    assert (cfg.ped_demand, cfg.veh_demand) == (900.0, 1800.0)
    assert cfg == ScenarioConfig(ped_demand=900.0, veh_demand=1800.0)


def test_empty_file_is_pure_defaults(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("", encoding="utf-8")
    cfg = load_scenario(path)
    assert cfg == ScenarioConfig()
    assert cfg.ped_demand == 0 and cfg.veh_demand == 0


def test_dt_above_relaxation_time_is_rejected():
    with pytest.raises(ScenarioError, match="relaxation_time"):
        parse_scenario("dt = 0.6\n")


def test_comments_and_dotted_keys():
    cfg = parse_scenario("# sensitivity run\nsafety_factor = 2  # flat key\nveh_params.headway = 1.5\n")
    assert cfg.conflict_params.safety_factor == 2.0
    assert cfg.veh_params.headway == 1.5


@pytest.mark.parametrize("text, needle", [
    ("ped_demnd = 3\n", "unknown key"),
    ("ped_demand = lots\n", "expected a float"),
    ("ped_demand 900\n", ":1: expected 'key = value'"),
    ("seed = 1\nseed = 2\n", ":2: duplicate key"),
    ("seed = 1.5\n", "expected a int"),
    ("lookahead = maybe\n", "expected a boolean"),
])
def test_parse_errors_carry_context(text, needle):
    with pytest.raises(ScenarioError, match=needle):
        parse_scenario(text, source="s.txt")


@pytest.mark.parametrize("raw, value", [("true", True), ("On", True), ("1", True), ("no", False), ("0", False)])
def test_boolean_values(raw, value):
    assert parse_scenario(f"lookahead = {raw}\n").conflict_params.lookahead is value


def test_default_config_is_valid():
    assert validate_scenario(ScenarioConfig()) == []


def test_short_measured_segment_is_reported():
    cfg = ScenarioConfig(geometry=GeometryConfig(travel_distance=5.0))
    assert any("measured segment shorter than street" in v for v in validate_scenario(cfg))


def test_negative_demand_is_reported():
    assert any("ped_demand" in v for v in validate_scenario(ScenarioConfig(ped_demand=-1.0)))


def test_duration_must_be_a_multiple_of_dt():
    assert validate_scenario(ScenarioConfig(duration=0.0))
    assert validate_scenario(ScenarioConfig(duration=10.05))
    assert not validate_scenario(ScenarioConfig(duration=10.0))


def test_input_area_wider_than_corridor_is_reported():
    cfg = ScenarioConfig(geometry=GeometryConfig(input_area_width=4.0))
    assert any("input_area_width" in v for v in validate_scenario(cfg))


def test_conflict_squares_are_stacked_across_the_street():
    geo = build_geometry(ScenarioConfig())
    a, b = geo.conflict_rects
    for r in (a, b):
        assert math.isclose(r.x_max - r.x_min, 3.5) and math.isclose(r.y_max - r.y_min, 3.5)
    assert a.y_max == b.y_min
    assert math.isclose(b.y_max - a.y_min, 7.0)


def test_measured_zone_spans_26_m_and_centres_the_street():
    geo = build_geometry(ScenarioConfig())
    m, street = geo.zone(ZoneKind.MEASURED), geo.street
    assert math.isclose(m.y_max - m.y_min, 26.0)
    assert math.isclose(street.y_min - m.y_min, 9.5) and math.isclose(m.y_max - street.y_max, 9.5)


def test_lane_length_is_both_stretches_plus_crossing():
    geo = build_geometry(ScenarioConfig())
    for lane in geo.lanes:
        assert math.isclose(lane.length, 500.0 + 3.5 + 500.0)
        assert math.isclose(lane.conflict_start_s, 500.0)
    assert [lane.direction for lane in geo.lanes] == [1, -1]


def test_lane_world_coordinates_meet_the_corridor():
    geo = build_geometry(ScenarioConfig())
    near, far = geo.lanes
    assert near.world_x(near.conflict_start_s, 500.0, 3.5) == 0.0
    assert far.world_x(far.conflict_start_s, 500.0, 3.5) == 3.5


geometries = st.builds(
    GeometryConfig,
    lane_stretch=st.floats(10.0, 800.0),
    travel_distance=st.floats(7.5, 60.0),
    input_area_depth=st.floats(0.2, 4.0),
    approach_zone_depth=st.floats(0.5, 10.0),
)


@given(geometries)
@settings(max_examples=60, deadline=None)
def test_zones_are_contiguous_along_the_walking_axis(g):
    geo = build_geometry(ScenarioConfig(geometry=g))
    chain = [geo.zone(k) for k in (ZoneKind.INPUT, ZoneKind.APPROACH, ZoneKind.MEASURED, ZoneKind.SINK)]
    for before, after in zip(chain, chain[1:]):
        assert before.y_max == after.y_min
    measured = geo.zone(ZoneKind.MEASURED)
    for r in geo.conflict_rects:
        assert measured.y_min <= r.y_min < r.y_max <= measured.y_max


@given(geometries)
@settings(max_examples=60, deadline=None)
def test_conflict_squares_partition_the_street(g):
    geo = build_geometry(ScenarioConfig(geometry=g))
    a, b = geo.conflict_rects
    street = geo.street
    assert a.area + b.area == pytest.approx(street.area)
    assert a.y_max == b.y_min  # shared edge only, zero-area intersection
    assert (a.x_min, a.x_max) == (b.x_min, b.x_max) == (street.x_min, street.x_max)


@given(geometries)
@settings(max_examples=20, deadline=None)
def test_build_geometry_is_pure(g):
    cfg = ScenarioConfig(geometry=g)
    assert build_geometry(cfg) == build_geometry(dataclasses.replace(cfg))


def test_dump_round_trips():
    cfg = ScenarioConfig(ped_demand=900.0, veh_demand=1800.0, seed=42).with_overrides(
        safety_mode="both", lookahead="yes", lane_stretch=50)
    assert parse_scenario(dump_scenario(cfg)) == cfg
