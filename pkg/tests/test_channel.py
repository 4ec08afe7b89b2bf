"""Radio model: path loss, rounding, walls, SIR adjudication, link cache."""

import math
import random
from fractions import Fraction

import pytest

from brsim.channel import (
    ChannelParams,
    LinkCache,
    Position,
    Topology,
    WallSegment,
    beacon_success,
    can_hear,
    delivery_success,
    path_loss,
    rssi,
    segments_intersect,
    sensitivity_dbm,
    wall_attenuation_db,
)

DEFAULTS = ChannelParams()


def topo(positions, destination=0, walls=()):
    return Topology({i: Position(*p) for i, p in enumerate(positions)}, destination, list(walls))


# ---- path loss and RSSI ----------------------------------------------------


def test_path_loss_reference_points():
    # 40 dB at 1 m, exponent 3: +30 dB per decade of distance
    assert path_loss(1.0, 0, DEFAULTS) == pytest.approx(40.0)
    assert path_loss(10.0, 0, DEFAULTS) == pytest.approx(70.0)
    assert path_loss(100.0, 0, DEFAULTS) == pytest.approx(100.0)
    assert path_loss(6.0, 0, DEFAULTS) == pytest.approx(63.34453751150931)
    assert path_loss(30.0, 0, DEFAULTS) == pytest.approx(84.31363764158988)


def test_path_loss_clamps_below_reference_distance():
    assert path_loss(0.5, 0, DEFAULTS) == pytest.approx(40.0)
    assert path_loss(0.0, 0, DEFAULTS) == pytest.approx(40.0)


def test_rssi_whole_dbm_values():
    t = topo([(0.0, 0.0), (10.0, 0.0), (6.0, 0.0), (30.0, 0.0)])
    assert rssi(t.position(0), t.position(1), t, DEFAULTS) == -70
    assert rssi(t.position(0), t.position(2), t, DEFAULTS) == -63
    assert rssi(t.position(0), t.position(3), t, DEFAULTS) == -84
    assert isinstance(rssi(t.position(0), t.position(1), t, DEFAULTS), int)


def test_rssi_half_rounds_toward_positive_infinity():
    t = topo([(0.0, 0.0), (1.0, 0.0)])
    # raw -40.5 dBm must round to -40, raw -41.5 to -41
    assert rssi(t.position(0), t.position(1), t, ChannelParams(ref_loss_db=40.5)) == -40
    assert rssi(t.position(0), t.position(1), t, ChannelParams(ref_loss_db=41.5)) == -41


def test_rssi_symmetric():
    rng = random.Random(7)
    for _ in range(50):
        pts = [(rng.uniform(0, 20), rng.uniform(0, 20)) for _ in range(2)]
        wall = WallSegment(
            Position(rng.uniform(0, 20), rng.uniform(0, 20)),
            Position(rng.uniform(0, 20), rng.uniform(0, 20)),
            rng.uniform(1, 40),
        )
        t = topo(pts, walls=[wall])
        assert rssi(t.position(0), t.position(1), t, DEFAULTS) == rssi(
            t.position(1), t.position(0), t, DEFAULTS
        )


# ---- sensitivity and hearing range ------------------------------------------


def test_sensitivity_matches_configured_range():
    assert sensitivity_dbm(DEFAULTS) == -84  # 30 m default
    assert sensitivity_dbm(ChannelParams(tx_range_m=6.0)) == -63


def test_can_hear_boundary_tie_succeeds():
    params = ChannelParams(tx_range_m=6.0)
    t = topo([(0.0, 0.0), (6.0, 0.0), (7.0, 0.0)])
    assert can_hear(0, 1, t, params)
    assert not can_hear(0, 2, t, params)
    assert not can_hear(0, 0, t, params)


# ---- wall intersection -------------------------------------------------------


def exact_segments_intersect(p1, p2, q1, q2):
    """Fraction-arithmetic oracle: straddle test plus collinear overlap."""

    def sub(a, b):
        return (Fraction(a[0]) - Fraction(b[0]), Fraction(a[1]) - Fraction(b[1]))

    def cross(u, v):
        return u[0] * v[1] - u[1] * v[0]

    zero = (Fraction(0), Fraction(0))
    d = sub(p2, p1)
    e = sub(q2, q1)
    f = sub(q1, p1)
    denom = cross(d, e)
    if denom != 0:
        t = Fraction(cross(f, e), denom)
        u = Fraction(cross(f, d), denom)
        return 0 <= t <= 1 and 0 <= u <= 1
    # parallel; check collinearity against whichever direction is non-degenerate
    if d == zero and e == zero:
        return tuple(p1) == tuple(q1)
    ref = d if d != zero else e
    if cross(f, ref) != 0:
        return False
    # collinear: project onto the dominant axis and test interval overlap
    axis = 0 if abs(ref[0]) >= abs(ref[1]) else 1
    lo_p, hi_p = sorted((Fraction(p1[axis]), Fraction(p2[axis])))
    lo_q, hi_q = sorted((Fraction(q1[axis]), Fraction(q2[axis])))
    return max(lo_p, lo_q) <= min(hi_p, hi_q)


def test_segment_intersection_matches_exact_oracle():
    rng = random.Random(0x5E6)
    cases = []
    for _ in range(400):
        cases.append(tuple((rng.randrange(7), rng.randrange(7)) for _ in range(4)))
    cases += [
        ((0, 0), (4, 0), (2, 0), (6, 0)),  # collinear overlap
        ((0, 0), (4, 0), (4, 0), (8, 0)),  # collinear endpoint touch
        ((0, 0), (4, 0), (5, 0), (8, 0)),  # collinear disjoint
        ((0, 0), (4, 4), (0, 4), (4, 0)),  # proper cross
        ((0, 0), (4, 4), (2, 2), (6, 0)),  # endpoint on interior
        ((0, 0), (0, 0), (0, 0), (2, 2)),  # degenerate point on segment
        ((1, 1), (1, 1), (2, 2), (3, 3)),  # degenerate point off segment
    ]
    for p1, p2, q1, q2 in cases:
        got = segments_intersect(Position(*p1), Position(*p2), Position(*q1), Position(*q2))
        want = exact_segments_intersect(p1, p2, q1, q2)
        assert got == want, (p1, p2, q1, q2)


def test_wall_attenuation_sums_per_crossing():
    walls = [
        WallSegment(Position(2.0, -1.0), Position(2.0, 1.0), 20.0),
        WallSegment(Position(4.0, -1.0), Position(4.0, 1.0), 15.0),
        WallSegment(Position(9.0, -1.0), Position(9.0, 1.0), 40.0),  # not crossed
    ]
    a, b = Position(0.0, 0.0), Position(6.0, 0.0)
    assert wall_attenuation_db(a, b, walls) == pytest.approx(35.0)
    assert wall_attenuation_db(a, Position(1.0, 0.0), walls) == pytest.approx(0.0)


def test_wall_lowers_rssi_by_its_attenuation():
    wall = WallSegment(Position(5.0, -1.0), Position(5.0, 1.0), 20.0)
    clear = topo([(0.0, 0.0), (10.0, 0.0)])
    blocked = topo([(0.0, 0.0), (10.0, 0.0)], walls=[wall])
    assert rssi(clear.position(0), clear.position(1), clear, DEFAULTS) == -70
    assert rssi(blocked.position(0), blocked.position(1), blocked, DEFAULTS) == -90


# ---- SIR adjudication --------------------------------------------------------


def test_beacon_sir_boundary_tie_passes():
    # rssi -85 against the -95 dBm floor is exactly the 10 dB target
    d = 10.0 ** 1.5
    t = topo([(0.0, 0.0), (d, 0.0)])
    assert rssi(t.position(0), t.position(1), t, DEFAULTS) == -85
    assert beacon_success(0, 1, frozenset(), t, DEFAULTS)


def test_beacon_fails_one_dbm_past_the_target():
    d = 10.0 ** (46.0 / 30.0)  # rounds to -86 dBm
    t = topo([(0.0, 0.0), (d, 0.0)])
    assert rssi(t.position(0), t.position(1), t, DEFAULTS) == -86
    assert not beacon_success(0, 1, frozenset(), t, DEFAULTS)


def test_beacon_reaches_past_data_range():
    d = 10.0 ** 1.5  # 31.62 m: outside the 30 m data range, SIR still passes
    t = topo([(0.0, 0.0), (d, 0.0)])
    assert not can_hear(0, 1, t, DEFAULTS)
    assert beacon_success(0, 1, frozenset(), t, DEFAULTS)
    assert not delivery_success(0, 1, frozenset(), t, DEFAULTS)


def test_delivery_survives_weak_interferer():
    t = topo([(0.0, 0.0), (5.0, 0.0), (100.0, 0.0)])
    assert delivery_success(0, 1, frozenset({2}), t, DEFAULTS)


def test_delivery_killed_by_close_interferer():
    t = topo([(0.0, 0.0), (5.0, 0.0), (6.0, 0.0)])
    assert delivery_success(0, 1, frozenset(), t, DEFAULTS)
    assert not delivery_success(0, 1, frozenset({2}), t, DEFAULTS)


def test_symmetric_collision_kills_both_directions():
    # two transmitters equidistant from a middle receiver: SIR ~ 0 dB each way
    t = topo([(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)])
    assert not delivery_success(0, 1, frozenset({2}), t, DEFAULTS)
    assert not delivery_success(2, 1, frozenset({0}), t, DEFAULTS)


def test_adjudication_rejects_malformed_concurrent_sets():
    t = topo([(0.0, 0.0), (5.0, 0.0)])
    with pytest.raises(ValueError):
        delivery_success(0, 1, frozenset({0}), t, DEFAULTS)
    with pytest.raises(ValueError):
        delivery_success(0, 0, frozenset(), t, DEFAULTS)
    with pytest.raises(ValueError):
        beacon_success(0, 1, frozenset({0}), t, DEFAULTS)


# ---- LinkCache ---------------------------------------------------------------


def random_world(rng):
    n = rng.randrange(3, 8)
    positions = [(rng.uniform(0, 40), rng.uniform(0, 10)) for _ in range(n)]
    walls = [
        WallSegment(
            Position(rng.uniform(0, 40), rng.uniform(0, 10)),
            Position(rng.uniform(0, 40), rng.uniform(0, 10)),
            rng.choice([10.0, 20.0, 35.0]),
        )
        for _ in range(rng.randrange(3))
    ]
    return topo(positions, walls=walls)


def test_link_cache_matches_module_functions():
    rng = random.Random(0xCACE)
    for _ in range(25):
        t = random_world(rng)
        params = ChannelParams(tx_range_m=rng.choice([6.0, 12.0, 30.0]))
        cache = LinkCache(t, params)
        assert cache.sensitivity == sensitivity_dbm(params)
        ids = sorted(t.nodes)
        for tx in ids:
            for rx in ids:
                assert cache.rssi_of(tx, rx) == rssi(
                    t.position(tx), t.position(rx), t, params
                )
                assert cache.can_hear(tx, rx) == can_hear(tx, rx, t, params)
                if tx == rx:
                    continue
                others = [o for o in ids if o not in (tx, rx)]
                concurrent = frozenset(
                    o for o in others if rng.random() < 0.5
                )
                assert cache.delivery(tx, rx, concurrent) == delivery_success(
                    tx, rx, concurrent, t, params
                )
                assert cache.beacon(tx, rx, concurrent) == beacon_success(
                    tx, rx, concurrent, t, params
                )


def test_link_cache_beacon_audible_is_quiet_channel_beacon():
    t = topo([(0.0, 0.0), (10.0 ** 1.5, 0.0), (50.0, 0.0)])
    cache = LinkCache(t, DEFAULTS)
    assert cache.beacon_audible(0, 1) == beacon_success(0, 1, frozenset(), t, DEFAULTS)
    assert cache.beacon_audible(0, 2) == beacon_success(0, 2, frozenset(), t, DEFAULTS)
    assert not cache.beacon_audible(0, 0)
