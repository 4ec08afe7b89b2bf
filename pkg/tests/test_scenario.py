"""Scenario documents: bundled files, generators, validation, overrides."""

import math

import pytest

from brsim.scenario import (
    ParseError,
    ScenarioError,
    TrafficSpec,
    ValidationError,
    apply_overrides,
    build_scenario,
    grid_topology,
    list_bundled,
    load_raw,
    load_scenario,
    parse_document,
    tandem_topology,
)

MINIMAL = {
    "horizon_s": 10,
    "topology": {
        "nodes": [
            {"id": 0, "x": 0.0, "y": 0.0},
            {"id": 1, "x": 5.0, "y": 0.0},
        ],
        "destination": 1,
    },
    "traffic": {"sources": [0]},
}


def minimal(**extra):
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in MINIMAL.items()}
    raw["topology"] = {
        "nodes": [dict(n) for n in MINIMAL["topology"]["nodes"]],
        "destination": 1,
    }
    raw.update(extra)
    return raw


# ---- bundled scenarios ---------------------------------------------------------


def test_bundled_listing():
    assert set(list_bundled()) >= {"motion_testbed", "tandem12"}


def test_tandem12_contents():
    sc = load_scenario("tandem12")
    assert sc.name == "tandem12"
    assert sc.protocol == "both"
    assert sc.horizon_ms == 1_500_000
    assert len(sc.topology.nodes) == 12
    assert sc.topology.destination == 11
    gap = 14.0 / 11
    for i in range(12):
        pos = sc.topology.position(i)
        assert pos.x == pytest.approx(i * gap)
        assert pos.y == pytest.approx(2.05 / 2)
    assert sc.channel.tx_range_m == pytest.approx(6.0)
    assert sc.br.relay_probability == pytest.approx(0.83)
    assert sc.traffic.sources == (0,)
    assert sc.traffic.packets_per_source == 20
    assert sc.traffic.inter_arrival_ms == 60_000
    assert sc.traffic.start_ms == 10_000


def test_motion_testbed_contents():
    sc = load_scenario("motion_testbed")
    assert sc.name == "motion_testbed"
    assert len(sc.topology.nodes) == 10
    assert sc.topology.destination == 0
    assert sc.horizon_ms == 300_000
    assert sc.channel.tx_range_m == pytest.approx(30.0)
    assert sc.br.relay_probability == pytest.approx(0.73)
    [wall] = sc.topology.walls
    assert wall.attenuation_db == pytest.approx(35.0)
    assert wall.a.x == wall.b.x == pytest.approx(2.5)
    # all nine non-destination nodes source one packet each
    assert sc.traffic.sources == tuple(range(1, 10))
    assert sc.traffic.packets_per_source == 1


# ---- generators -----------------------------------------------------------------


def test_tandem_generator_spacing():
    topo = tandem_topology(5)
    assert topo.destination == 4
    xs = [topo.position(i).x for i in range(5)]
    assert xs == pytest.approx([0.0, 3.5, 7.0, 10.5, 14.0])
    assert all(topo.position(i).y == pytest.approx(1.025) for i in range(5))
    with pytest.raises(ValidationError):
        tandem_topology(1)


def test_grid_generator_row_major():
    topo = grid_topology(2, 3, floor_width_m=4.0, floor_length_m=10.0)
    assert len(topo.nodes) == 6
    assert topo.destination == 5
    assert (topo.position(0).x, topo.position(0).y) == (0.0, 0.0)
    assert (topo.position(2).x, topo.position(2).y) == (10.0, 0.0)
    assert (topo.position(3).x, topo.position(3).y) == (0.0, 4.0)
    assert (topo.position(5).x, topo.position(5).y) == (10.0, 4.0)
    with pytest.raises(ValidationError):
        grid_topology(1, 1, 4.0, 10.0)


def test_generator_via_document():
    raw = minimal()
    raw["topology"] = {"generator": "tandem", "count": 6}
    sc = build_scenario(raw)
    assert len(sc.topology.nodes) == 6
    assert sc.topology.destination == 5
    raw["topology"] = {"generator": "grid", "rows": 2, "cols": 2}
    sc = build_scenario(raw)
    assert len(sc.topology.nodes) == 4
    raw["topology"] = {"generator": "hexagon", "count": 4}
    with pytest.raises(ValidationError, match="unknown generator"):
        build_scenario(raw)
    raw["topology"] = {"generator": "tandem"}
    with pytest.raises(ValidationError, match="count"):
        build_scenario(raw)


# ---- document building -----------------------------------------------------------


def test_minimal_document_defaults():
    sc = build_scenario(minimal(), default_name="fromfile")
    assert sc.name == "fromfile"
    assert sc.protocol == "both"
    assert sc.horizon_ms == 10_000
    assert sc.br.relay_probability == pytest.approx(0.73)
    assert sc.csma.min_backoff_exponent == 3
    assert sc.csma.next_hop_metric == "link"
    assert sc.channel.noise_floor_dbm == pytest.approx(-95.0)
    assert sc.traffic.packets_per_source == 1


def test_next_hop_metric_accepts_dst():
    raw = minimal()
    raw["csma"] = {"next_hop_metric": "dst"}
    assert build_scenario(raw).csma.next_hop_metric == "dst"


def test_walls_merge_into_topology():
    raw = minimal()
    raw["walls"] = [
        {"x1": 1.0, "y1": -1.0, "x2": 1.0, "y2": 1.0},
        {"x1": 2.0, "y1": -1.0, "x2": 2.0, "y2": 1.0, "attenuation_db": 35.0},
    ]
    sc = build_scenario(raw)
    assert len(sc.topology.walls) == 2
    assert sc.topology.walls[0].attenuation_db == pytest.approx(20.0)
    assert sc.topology.walls[1].attenuation_db == pytest.approx(35.0)


def test_sources_all_excludes_destination():
    raw = minimal()
    raw["traffic"] = {"sources": "all"}
    assert build_scenario(raw).traffic.sources == (0,)


@pytest.mark.parametrize(
    "mutate,message",
    [
        (lambda r: r.update(bogus=1), "unknown top-level field"),
        (lambda r: r.update(horizon_ms=1000), "exactly one"),
        (lambda r: r.pop("horizon_s"), "exactly one"),
        (lambda r: r.update(horizon_s=0), "must be positive"),
        (lambda r: r.update(protocol="tcp"), "protocol"),
        (lambda r: r.pop("topology"), "topology: required"),
        (lambda r: r.pop("traffic"), "traffic: required"),
        (lambda r: r["topology"].update(generator="tandem", count=4), "not both"),
        (lambda r: r["topology"].pop("nodes"), "positions or a generator"),
        (lambda r: r["topology"].pop("destination"), "destination: required"),
        (lambda r: r["topology"].update(destination=9), "unknown node"),
        (lambda r: r["topology"]["nodes"].append({"id": 0, "x": 1, "y": 1}), "duplicate"),
        (lambda r: r["topology"]["nodes"].append({"id": 0xFFFF, "x": 1, "y": 1}), "out of range"),
        (lambda r: r["topology"]["nodes"].append({"id": 2, "x": 1}), "missing"),
        (lambda r: r["topology"]["nodes"][0].update(color="red"), "unknown field"),
        (lambda r: r.update(channel={"bogus": 3}), "channel.bogus"),
        (lambda r: r.update(channel={"tx_range_m": "far"}), "expected a number"),
        (lambda r: r.update(channel={"tx_range_m": math.inf}), "finite"),
        (lambda r: r.update(br={"relay_probability": 1.5}), "relay_probability"),
        (lambda r: r.update(br={"slot_ms": True}), "expected an integer"),
        (lambda r: r.update(br={"slot_ms": 2.5}), "expected an integer"),
        (lambda r: r.update(csma={"max_csma_backoffs": -1}), "csma"),
        (lambda r: r.update(csma={"next_hop_metric": "hops"}), "next_hop_metric"),
        (lambda r: r.update(traffic={"sources": []}), "sources"),
        (lambda r: r.update(traffic={"sources": [9]}), "unknown node"),
        (lambda r: r.update(traffic={"sources": [1]}), "cannot source"),
        (lambda r: r.update(traffic={"sources": "some"}), "expected a list or 'all'"),
        (lambda r: r.update(traffic={"sources": [0], "rate": 3}), "unknown field"),
        (lambda r: r.update(walls={"x1": 0}), "expected a list"),
        (lambda r: r.update(walls=[{"x1": 0.0}]), "required"),
        (lambda r: r.update(walls=[{"x1": 0, "y1": 0, "x2": 1, "y2": 1, "z": 2}]), "unknown field"),
        (lambda r: r.update(name=""), "name"),
    ],
)
def test_validation_errors(mutate, message):
    raw = minimal()
    mutate(raw)
    with pytest.raises(ValidationError, match=message):
        build_scenario(raw)


def test_int_fields_accept_integral_floats():
    raw = minimal()
    raw["br"] = {"slot_ms": 20.0}
    assert build_scenario(raw).br.slot_ms == 20


# ---- parsing and overrides ---------------------------------------------------------


def test_parse_document_errors():
    with pytest.raises(ParseError, match="empty"):
        parse_document("")
    with pytest.raises(ParseError):
        parse_document("a: [unclosed")
    with pytest.raises(ScenarioError):
        parse_document("- just\n- a list\n")


def test_overrides_set_nested_and_typed_values():
    raw = minimal()
    out = apply_overrides(
        raw,
        [
            "channel.tx_range_m=12.5",
            "br.relay_probability=0.5",
            "traffic.packets_per_source=3",
            "protocol=aodv",
        ],
    )
    sc = build_scenario(out)
    assert sc.channel.tx_range_m == pytest.approx(12.5)
    assert sc.br.relay_probability == pytest.approx(0.5)
    assert sc.traffic.packets_per_source == 3
    assert sc.protocol == "aodv"
    # the input document is never mutated
    assert "channel" not in raw and "br" not in raw


def test_override_swaps_horizon_spelling():
    raw = minimal()  # declares horizon_s
    sc = build_scenario(apply_overrides(raw, ["horizon_ms=2500"]))
    assert sc.horizon_ms == 2500
    raw2 = apply_overrides(raw, ["horizon_ms=2500"])
    sc2 = build_scenario(apply_overrides(raw2, ["horizon_s=4"]))
    assert sc2.horizon_ms == 4000


def test_override_must_be_assignment():
    with pytest.raises(ValidationError, match="key.path=value"):
        apply_overrides(minimal(), ["nonsense"])
    with pytest.raises(ValidationError, match="is not a mapping"):
        apply_overrides(minimal(), ["horizon_s.deep=1"])


def test_load_raw_bundled_and_missing():
    raw, name = load_raw("tandem12")
    assert name == "tandem12"
    assert raw["topology"]["generator"] == "tandem"
    with pytest.raises(ScenarioError, match="bundled"):
        load_raw("no_such_scenario")


def test_load_raw_from_file(tmp_path):
    p = tmp_path / "mine.yaml"
    p.write_text(
        "horizon_s: 5\n"
        "topology: {generator: tandem, count: 3}\n"
        "traffic: {sources: [0]}\n"
    )
    raw, name = load_raw(str(p))
    assert name == "mine"
    sc = build_scenario(raw, default_name=name)
    assert sc.name == "mine"
    assert len(sc.topology.nodes) == 3


def test_load_scenario_with_overrides():
    sc = load_scenario("tandem12", overrides=["topology.count=7", "horizon_ms=60000"])
    assert len(sc.topology.nodes) == 7
    assert sc.horizon_ms == 60_000


def test_traffic_spec_validation():
    with pytest.raises(ValueError):
        TrafficSpec(sources=())
    with pytest.raises(ValueError):
        TrafficSpec(sources=(1,), packets_per_source=0)
    with pytest.raises(ValueError):
        TrafficSpec(sources=(1,), inter_arrival_ms=0)
    with pytest.raises(ValueError):
        TrafficSpec(sources=(1,), start_ms=-1)
