import math

import numpy as np
import pytest

from isocausal.fixtures import fixture
from isocausal.grid import future_set, node_index
from isocausal.products import (
    CRITICAL_BAND,
    FiberSpec,
    GRWClass,
    GRWSpec,
    TimeProductSpec,
    arrival_time,
    canonical_rep,
    circle_fiber,
    conformal_interval,
    desitter_instability_probe,
    grw_classify,
    grw_mapping_construct,
    grw_obstruction,
    grw_order,
    horizon_check,
    horizon_probe,
    split_mapping,
)

INF = math.inf


def power_law(a):
    return GRWSpec(interval=(0.0, INF), f=f"t^{a!r}", fiber=circle_fiber())


def test_interval_profile_power_laws():
    # integral of t^-a: converges at 0 iff a < 1, at infinity iff a > 1
    prof = conformal_interval(power_law(0.5))
    assert prof.pastFinite is True and prof.futureFinite is False
    assert prof.L == INF
    prof = conformal_interval(power_law(1.0))
    assert prof.pastFinite is False and prof.futureFinite is False
    prof = conformal_interval(power_law(2.0))
    assert prof.pastFinite is False and prof.futureFinite is True


def test_interval_profile_cosh():
    prof = conformal_interval(GRWSpec((-INF, INF), "cosh(t)"))
    assert prof.pastFinite and prof.futureFinite
    assert abs(prof.L - math.pi) < 1e-8
    assert prof.error < 1e-6


def test_interval_profile_undecided():
    # decay ratio 2^-0.1 ~ 0.933 sits between the two shell rules
    spec = GRWSpec((1.0, INF), "t^1.1", fiber=circle_fiber())
    prof = conformal_interval(spec)
    assert prof.pastFinite is True
    assert prof.futureFinite is None
    assert math.isnan(prof.L)
    with pytest.raises(ValueError, match="undecidable"):
        grw_classify(spec)


def test_interval_requires_positive_warping():
    with pytest.raises(ValueError, match="positive"):
        conformal_interval(GRWSpec((-1.0, 1.0), "t"))


def test_classify_four_types():
    assert grw_classify(GRWSpec((-INF, INF), "1")).kind == "EinsteinStaticType"
    assert grw_classify(GRWSpec((-INF, INF), "exp(-t)")).kind == "ExpNegType"
    assert grw_classify(GRWSpec((-INF, INF), "exp(t)")).kind == "ExpPosType"
    cls = grw_classify(GRWSpec((-INF, INF), "cosh(t)"))
    assert cls.kind == "FiniteBand"
    assert abs(cls.L - math.pi) < 1e-8
    band = grw_classify(GRWSpec((0.0, 2.5), "1"))
    assert band.kind == "FiniteBand" and abs(band.L - 2.5) < 1e-10


def test_classify_power_laws():
    kinds = [grw_classify(power_law(a)).kind for a in (0.5, 1.0, 2.0)]
    assert kinds == ["ExpNegType", "EinsteinStaticType", "ExpPosType"]


def test_classify_scaling_invariance():
    # f -> c f with h -> h / c^2 is the same metric; the class agrees
    base = grw_classify(GRWSpec((-INF, INF), "cosh(t)"))
    scaled_fiber = FiberSpec(dim=1, compact=True, complete=True,
                             diameter=math.pi / 3.0, name="circle")
    scaled = grw_classify(GRWSpec((-INF, INF), "3*cosh(t)", fiber=scaled_fiber))
    assert scaled.kind == base.kind == "FiniteBand"
    assert abs(scaled.L - base.L) < 1e-8
    assert grw_classify(GRWSpec((-INF, INF), "3*exp(-t)", fiber=scaled_fiber)).kind == "ExpNegType"


def test_profile_translation_invariance():
    a = conformal_interval(GRWSpec((-INF, INF), "cosh(t)"))
    b = conformal_interval(GRWSpec((-INF, INF), "cosh(t - 5)"))
    assert (a.pastFinite, a.futureFinite) == (b.pastFinite, b.futureFinite)
    assert abs(a.L - b.L) < 1e-8


def test_canonical_rep_roundtrip():
    for cls in (GRWClass("EinsteinStaticType"), GRWClass("ExpNegType"),
                GRWClass("ExpPosType"), GRWClass("FiniteBand", 2.0)):
        rep = canonical_rep(cls)
        assert rep.f == "1"
        back = grw_classify(rep)
        assert back.kind == cls.kind
        if cls.kind == "FiniteBand":
            assert abs(back.L - cls.L) < 1e-10


def test_mapping_constructions_are_causal():
    band = GRWClass("FiniteBand", 2.0)
    for dst in ("ExpNegType", "ExpPosType", "EinsteinStaticType"):
        m = grw_mapping_construct(band, GRWClass(dst))
        v = m.verify()
        assert v.outcome == "Causal", (dst, v.note)
        assert v.min_margin >= -1e-9
    for src in ("ExpNegType", "ExpPosType"):
        m = grw_mapping_construct(GRWClass(src), GRWClass("EinsteinStaticType"))
        assert m.verify().outcome == "Causal"
    m = grw_mapping_construct(GRWClass("FiniteBand", 1.0), GRWClass("FiniteBand", 2.5))
    assert m.params["slope"] == pytest.approx(2.5)
    assert m.verify().outcome == "Causal"
    m = grw_mapping_construct(GRWClass("ExpNegType"), GRWClass("ExpNegType"))
    assert m.verify().outcome == "Causal"


def test_mapping_direction_errors():
    band = GRWClass("FiniteBand", 2.0)
    static = GRWClass("EinsteinStaticType")
    with pytest.raises(ValueError, match="direction not provided by the construction"):
        grw_mapping_construct(static, band)
    with pytest.raises(ValueError, match="direction not provided by the construction"):
        grw_mapping_construct(GRWClass("ExpNegType"), GRWClass("ExpPosType"))
    with pytest.raises(ValueError, match="direction not provided by the construction"):
        grw_mapping_construct(GRWClass("FiniteBand", 2.5), GRWClass("FiniteBand", 1.0))
    with pytest.raises(ValueError, match="at least 2L/pi"):
        grw_mapping_construct(band, GRWClass("ExpNegType"), A=0.5)
    with pytest.raises(ValueError, match="exceed one"):
        grw_mapping_construct(GRWClass("ExpNegType"), static, B=1.0)


def test_order_matrix():
    below = GRWClass("FiniteBand", 2.0)
    above = GRWClass("FiniteBand", 3.5)
    rep = grw_order(below, above)
    assert rep.relation == "precedes" and rep.strict is True
    rep = grw_order(above, below)
    assert rep.relation == "succeeds" and rep.strict is True
    rep = grw_order(GRWClass("FiniteBand", 3.0), GRWClass("FiniteBand", 3.1))
    assert rep.relation == "precedes" and rep.strict is None
    rep = grw_order(below, GRWClass("FiniteBand", 2.0 + 1e-9))
    assert rep.relation == "equivalent"
    assert grw_order(below, GRWClass("ExpNegType")).relation == "precedes"
    assert grw_order(GRWClass("ExpNegType"), GRWClass("ExpPosType")).relation == "incomparable"
    rep = grw_order(GRWClass("ExpPosType"), GRWClass("EinsteinStaticType"))
    assert rep.relation == "precedes" and rep.strict is True
    rep = grw_order(GRWClass("EinsteinStaticType"), below)
    assert rep.relation == "succeeds" and rep.strict is True
    assert grw_order(GRWClass("ExpNegType"), GRWClass("ExpNegType")).relation == "equivalent"


WHOLE_LINE = (-INF, INF)


def test_split_mapping_doubling():
    s1 = TimeProductSpec(WHOLE_LINE, rho="1", fiber_metric=(("1",),))
    s2 = TimeProductSpec(WHOLE_LINE, rho="1", fiber_metric=(("4",),))
    rep = split_mapping(s1, s2)
    assert rep.k == pytest.approx(1.0)
    assert rep.N == pytest.approx(4.0)
    assert rep.slope == pytest.approx(2.0)
    assert rep.verdict.outcome == "Causal"


def test_split_mapping_position_dependent():
    # conformal pair with exact sampled constants
    s1 = TimeProductSpec(WHOLE_LINE, rho="1 + x^2", fiber_bounds=((-2.0, 2.0),),
                         fiber_metric=(("1 + x^2",),))
    s2 = TimeProductSpec(WHOLE_LINE, rho="1 + x^2", fiber_bounds=((-2.0, 2.0),),
                         fiber_metric=(("4*(1 + x^2)",),))
    rep = split_mapping(s1, s2)
    assert rep.k == pytest.approx(1.0)
    assert rep.N == pytest.approx(4.0)
    assert rep.verdict.outcome == "Causal"


def test_split_mapping_rejects_vanishing_lapse_ratio():
    s1 = TimeProductSpec(WHOLE_LINE, rho="1")
    s2 = TimeProductSpec(WHOLE_LINE, rho="exp(-t^2)")
    with pytest.raises(ValueError, match="condition \\(i\\)"):
        split_mapping(s1, s2)


def test_split_mapping_requires_whole_line():
    s1 = TimeProductSpec((0.0, INF))
    with pytest.raises(ValueError, match="whole line"):
        split_mapping(s1, TimeProductSpec(WHOLE_LINE))


def test_split_mapping_requires_zero_cross_terms():
    s1 = TimeProductSpec(WHOLE_LINE, omega=("x",))
    with pytest.raises(ValueError, match="cross terms"):
        split_mapping(s1, TimeProductSpec(WHOLE_LINE))


def flat_product(span=3.0):
    return TimeProductSpec((-span, span), rho="1", fiber_names=("x",),
                           fiber_bounds=((-span, span),), fiber_metric=(("1",),))


def test_arrival_flat_product():
    field = arrival_time(flat_product(), (1.0, 0.0), shape=(121, 121))
    t0, x0 = field.base
    d = np.abs(field.coords - x0)
    inner = d <= 1.5
    assert not field.truncated_plus[inner].any()
    assert np.allclose(field.t_plus[inner], d[inner], atol=field.cell[0] + 1e-12)
    assert np.allclose(field.t_minus[inner], d[inner], atol=field.cell[0] + 1e-12)
    # the window roof at t=3 cuts off columns farther than ~2
    assert field.truncated_plus[0] and field.truncated_plus[-1]
    assert not field.truncated_minus[0] and not field.truncated_minus[-1]


def test_arrival_chronology_consistency():
    # strict arrival inequality reproduces the chronology relation
    g = fixture("minkowski2").grid
    field = arrival_time(flat_product(1.0), (0.0, 0.0), shape=(81, 81))
    t0, x0 = field.base
    cols = {float(x): j for j, x in enumerate(field.coords)}
    rng = np.random.default_rng(42)
    H, W = g.shape
    base = node_index(g, (t0, x0))
    chron = future_set(g, base, kind="I")
    for _ in range(200):
        i, j = int(rng.integers(0, H)), int(rng.integers(0, W))
        dt_pair = g.ts[i] - t0
        arr = field.t_plus[cols[float(g.xs[j])]]
        assert chron[i, j] == (arr < dt_pair - 1e-12), (i, j)


def test_arrival_closed_fiber_far_side_unreached():
    spec = GRWSpec(WHOLE_LINE, "cosh(t)", fiber=circle_fiber())
    field = arrival_time(spec, (0.0, math.pi / 2), shape=(200, 192), window=(-8.0, 8.0))
    t0, x0 = field.base
    dx = field.cell[1]
    W = field.coords.size

    def col_at(dist):
        j0 = int(np.argmin(np.abs(field.coords - x0)))
        return (j0 + int(round(dist / dx))) % W

    # the future conformal span from t=0 is pi/2, so the far point of
    # the circle (distance pi) stays out of reach forever
    far = col_at(math.pi)
    assert field.truncated_plus[far] and field.t_plus[far] == INF
    near, mid = col_at(0.3), col_at(0.7)
    assert field.t_plus[near] < field.t_plus[mid] < INF
    assert field.t_plus[near] > 0.3  # slower than flat space
    dist = np.minimum(np.abs(field.coords - x0), 2 * math.pi - np.abs(field.coords - x0))
    reached = np.isfinite(field.t_plus)
    assert dist[reached].max() < math.pi / 2 + 2 * dx


def test_horizon_checks_warped():
    rep = horizon_check(GRWSpec(WHOLE_LINE, "cosh(t)"))
    assert (rep.noPastHorizon, rep.noFutureHorizon) == (False, False)
    assert not rep.truncated
    rep = horizon_check(GRWSpec(WHOLE_LINE, "1"))
    assert (rep.noPastHorizon, rep.noFutureHorizon) == (True, True)
    rep = horizon_check(GRWSpec(WHOLE_LINE, "exp(-t)"))
    assert (rep.noPastHorizon, rep.noFutureHorizon) == (True, False)


def test_horizon_grid_flat_product():
    spec = TimeProductSpec((-6.0, 6.0), rho="1", fiber_bounds=((-1.0, 1.0),))
    rep = horizon_check(spec, x0=0.0, shape=(161, 81))
    assert rep.truncated
    assert rep.noPastHorizon and rep.noFutureHorizon


def test_horizon_probe_one_way_drift():
    g = fixture("drift-trap").grid
    rep = horizon_probe(g, 0.0)
    assert rep.noPastHorizon
    assert not rep.noFutureHorizon
    assert rep.truncated


def test_obstruction_power_law_pairs():
    specs = {a: power_law(a) for a in (0.5, 1.0, 2.0)}
    pairs = [(0.5, 1.0), (0.5, 2.0), (1.0, 2.0)]
    for a, b in pairs:
        verdicts = {grw_obstruction(specs[a], specs[b]).related,
                    grw_obstruction(specs[b], specs[a]).related}
        assert "no" in verdicts, (a, b)
    rep = grw_obstruction(specs[1.0], specs[2.0])
    assert rep.related == "no" and "future" in rep.reason
    rep = grw_obstruction(specs[1.0], specs[0.5])
    assert rep.related == "no" and "past" in rep.reason
    assert grw_obstruction(specs[0.5], specs[1.0]).related == "unknown"


def test_obstruction_pinched_isocausal():
    s1 = GRWSpec(WHOLE_LINE, "1.5 + 0.5*sin(t)", fiber=circle_fiber())
    s2 = GRWSpec(WHOLE_LINE, "1", fiber=circle_fiber())
    rep = grw_obstruction(s1, s2)
    assert rep.related == "isocausal"
    assert rep.sampled


def test_desitter_probe():
    probe = desitter_instability_probe(0.5, 1.0)
    assert abs(probe.L_reference - math.pi) < 1e-8
    assert probe.L_low < math.pi - 1e-8
    assert probe.L_high > math.pi + 1e-8
    for rep in probe.orders:
        assert rep.relation == "precedes" and rep.strict is True
    kinds = {c.kind for c in probe.classes}
    assert kinds == {"FiniteBand"}


def test_desitter_probe_edge_cases():
    with pytest.raises(ValueError, match="positive"):
        desitter_instability_probe(-10.0, 1.0)
    probe = desitter_instability_probe(0.0, 1.0)
    assert probe.note == "unperturbed"
    assert abs(probe.L_high - probe.L_low) < 1e-10
    assert abs(probe.L_low - CRITICAL_BAND) < 1e-8
