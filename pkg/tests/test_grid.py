import numpy as np
import pytest

from isocausal._kernels import OFFSETS, reach
from isocausal.fixtures import fixture
from isocausal.grid import (
    chain_obstruction,
    closedness_probe,
    coverage_criterion,
    coverage_verdict,
    diagonal_curve,
    dump_csv,
    future_set,
    helix_curve,
    hypersurface_tests,
    imprisonment_probe,
    node_index,
    past_set,
)


def offset_slot(di, dj):
    for k, (a, b) in enumerate(OFFSETS):
        if (a, b) == (di, dj):
            return k
    raise AssertionError


@pytest.fixture(scope="module")
def flat41():
    return fixture("minkowski2", shape=(41, 41)).grid


def test_flat_cone_offsets(flat41):
    g = flat41
    inner = np.zeros(g.shape, dtype=bool)
    inner[3:-3, 3:-3] = True
    causal = {(1, 0), (1, 1), (1, -1), (2, 1), (2, -1)}
    null = {(1, 1), (1, -1)}
    for k, (di, dj) in enumerate(OFFSETS):
        has_edge = g.edges[k] & inner
        if (di, dj) in causal:
            assert has_edge.sum() == inner.sum()
        else:
            assert not has_edge.any()
        has_int = g.interior[k] & inner
        if (di, dj) in causal - null:
            assert has_int.sum() == inner.sum()
        else:
            assert not has_int.any()


def test_flat_null_angles(flat41):
    a = flat41.angles[20, 20]
    assert a == pytest.approx([-np.pi / 4, np.pi / 4])


def test_backends_agree(flat41):
    seeds = np.zeros(flat41.shape, dtype=bool)
    seeds[5, 7] = seeds[11, 30] = True
    out_nb = reach(flat41.edges, seeds, False, backend_name="numba")
    out_np = reach(flat41.edges, seeds, False, backend_name="numpy")
    assert np.array_equal(out_nb, out_np)


def test_future_past_adjoint(flat41):
    p = (8, 20)
    fut = future_set(flat41, p)
    for q in [(15, 13), (30, 20), (9, 21)]:
        assert fut[q]
        assert past_set(flat41, q)[p]
    assert not fut[7, 20]
    assert not fut[10, 26]


def test_flat_cone_shape(flat41):
    # J+ of a point on the flat square is the exact discrete cone.
    p = (8, 20)
    fut = future_set(flat41, p)
    ii, jj = np.meshgrid(np.arange(41), np.arange(41), indexing="ij")
    cone = (ii >= p[0]) & (np.abs(jj - p[1]) <= ii - p[0])
    assert np.array_equal(fut, cone)


def test_chronology_excludes_pure_rays(flat41):
    p = (8, 20)
    chron = future_set(flat41, p, kind="I")
    fut = future_set(flat41, p)
    assert not (chron & ~fut).any()
    # interior column is chronological, the bounding null rays are not
    assert chron[12, 20]
    assert chron[12, 21] and chron[12, 17]
    assert not chron[12, 24] and fut[12, 24]
    assert not chron[12, 16] and fut[12, 16]
    # a corner of two null steps lands back inside
    assert chron[10, 20]
    assert not chron[8, 20]


def test_refinement_stability():
    fractions = []
    for n in (21, 41, 81):
        g = fixture("minkowski2", shape=(n, n)).grid
        p = node_index(g, (-0.5, 0.0))
        fut = future_set(g, p)
        fractions.append(fut.sum() / g.live_count())
    assert abs(fractions[1] - fractions[2]) <= abs(fractions[0] - fractions[1])
    # clipped cone {t >= -1/2, |x| <= t + 1/2} fills half of (-1,1)^2
    assert fractions[2] == pytest.approx(0.5, rel=0.08)


def test_chain_rect_feasible_two():
    g = fixture("rect:2.5", shape=(102, 41)).grid
    assert chain_obstruction(g, 1).feasible
    rep = chain_obstruction(g, 2)
    assert rep.feasible
    assert len(rep.starts) == 2
    assert not chain_obstruction(g, 3).feasible


def test_chain_rect_short_strip():
    assert chain_obstruction(fixture("rect:1", shape=(41, 41)).grid, 1).feasible
    rep = chain_obstruction(fixture("rect:0.5", shape=(21, 41)).grid, 1)
    assert not rep.feasible
    assert rep.uncovered > 0


def test_diagonal_curve_is_causal_path():
    g = fixture("rect:1", shape=(41, 41)).grid
    nodes = diagonal_curve(g, 0.0, "right")
    assert len(nodes) == 41
    k = offset_slot(1, 1)
    for (i, j), (i2, j2) in zip(nodes[:-1], nodes[1:]):
        assert (i2 - i, j2 - j) == (1, 1)
        assert g.edges[k][i, j]


def test_helix_coverage_trichotomy():
    verdicts = []
    for L in (np.pi + 0.3, np.pi, np.pi - 0.3):
        g = fixture("cyl:%r" % L).grid
        tl = coverage_criterion(g, helix_curve(g, 0.9), "timelike")
        nl = coverage_criterion(g, helix_curve(g, 1.0), "null")
        verdicts.append(coverage_verdict(tl, nl))
    assert verdicts == [
        "timelike-covers",
        "lightlike-closure-covers-only",
        "neither",
    ]


def test_null_helix_parity_seam():
    g = fixture("cyl:%r" % np.pi, shape=(48, 96)).grid
    rep = coverage_criterion(g, helix_curve(g, 1.0), "null")
    assert not rep.coversJ
    assert rep.coversClosureJ
    assert 0 < rep.uncovered < g.live_count() // 20


def test_full_line_hypersurface(flat41):
    S = np.zeros(flat41.shape, dtype=bool)
    S[20] = True
    rep = hypersurface_tests(flat41, S)
    assert rep.acausal and rep.achronal and rep.covers
    assert rep.uncovered == 0 and rep.witness is None


def test_timelike_line_not_acausal(flat41):
    S = np.zeros(flat41.shape, dtype=bool)
    S[:, 20] = True
    rep = hypersurface_tests(flat41, S)
    assert not rep.acausal
    assert not rep.achronal


def test_flat_cylinder_not_imprisoned():
    g = fixture("cyl:2", shape=(40, 96)).grid
    rep = imprisonment_probe(g)
    assert not rep.imprisoned
    assert rep.membranes == []


def test_closedness_flat(flat41):
    rep = closedness_probe(flat41, (0.0, 0.0))
    assert rep.closed
    assert rep.gap_plus == 0 and rep.gap_minus == 0
    assert rep.jump_plus <= 0.005 and rep.jump_minus <= 0.005


def test_csv_dump(tmp_path, flat41):
    path = tmp_path / "nodes.csv"
    dump_csv(flat41, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "i,j,t,x,mask,coneAngle1,coneAngle2"
    assert len(lines) == 1 + 41 * 41
    first = lines[1].split(",")
    assert first[4] == "1"
    assert float(first[6]) == pytest.approx(np.pi / 4)
