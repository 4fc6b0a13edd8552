import numpy as np
import pytest

from isocausal.fixtures import fixture, fixture_names, wedge_profile
from isocausal.grid import (
    coverage_criterion,
    future_set,
    hypersurface_tests,
    imprisonment_probe,
    joinability_matrix,
    node_index,
    past_set,
)


def test_wedge_profile_branch_values():
    assert wedge_profile(0.5, 0.5) == pytest.approx(3.0)
    assert wedge_profile(1.0, 2.0) == pytest.approx(3.0)
    assert wedge_profile(2.0, 3.0) == pytest.approx(2.0)
    # constant branches: left half plane, below the axis, below v = u - 1
    assert wedge_profile(-1.0, 5.0) == pytest.approx(1.0)
    assert wedge_profile(-1.0, 0.5) == pytest.approx(1.0)
    assert wedge_profile(3.0, -2.0) == pytest.approx(1.0)
    assert wedge_profile(2.0, 0.5) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="removed wedge"):
        wedge_profile(-1.0, 5.0, strict=True)


def test_wedge_profile_seams():
    rng = np.random.default_rng(7)
    u = rng.uniform(0.2, 2.5, size=200)
    eps = 1e-9
    upper = wedge_profile(u, u + eps)
    below = wedge_profile(u, u - eps)
    assert np.allclose(upper, below, atol=1e-6)
    # lower seam of the blend: v = max(u - 1, 0) from either side
    v_lo = np.maximum(u - 1.0, 0.0)
    inside = wedge_profile(u, v_lo + eps)
    outside = wedge_profile(u, v_lo - eps)
    assert np.allclose(inside, outside, atol=1e-6)
    assert np.allclose(outside, 1.0)


def test_wedge_profile_ray_fraction_oracle():
    # the closed-form blend fraction matches the geometric construction:
    # rays through (0, -1) hit the diagonal at Q and the axis at S_pt
    rng = np.random.default_rng(11)
    u = rng.uniform(0.3, 2.0, size=300)
    lo = np.maximum(u - 1.0, 0.0)
    v = lo + rng.uniform(0.05, 0.95, size=300) * (u - lo)
    s_formula = (u - v) * (1.0 + v) / u
    q = u / (1.0 - u + v)
    Q = np.stack([q, q], axis=-1)
    S_pt = np.stack([u / (1.0 + v), np.zeros_like(u)], axis=-1)
    P = np.stack([u, v], axis=-1)
    s_geom = np.linalg.norm(P - Q, axis=-1) / np.linalg.norm(S_pt - Q, axis=-1)
    assert np.allclose(s_formula, s_geom, rtol=1e-10)
    assert ((s_formula > 0.0) & (s_formula < 1.0)).all()


def test_wedge_profile_phi_variants():
    rng = np.random.default_rng(3)
    u = rng.uniform(0.3, 2.0, size=400)
    lo = np.maximum(u - 1.0, 0.0)
    v = lo + rng.uniform(0.0, 1.0, size=400) * (u - lo)
    fe = wedge_profile(u, v, phi="exp")
    fs = wedge_profile(u, v, phi="smoothstep")
    ratio = (1.0 + v) / u
    for f in (fe, fs):
        assert (f >= 1.0 - 1e-12).all()
        assert (f <= np.maximum(ratio, 1.0) + 1e-12).all()
    assert np.abs(fe - fs).max() < 0.2


def test_wedge_eta_barrier():
    fx = fixture("wedge:eta", shape=(101, 101))
    g = fx.grid
    U, V = np.meshgrid(g.ts, g.xs, indexing="ij")
    # from just below the slit tip the future cannot cross to u < 0
    p = node_index(g, (1.0, 0.0))
    assert g.mask[p]
    fut = future_set(g, p)
    assert not (fut & (U < -0.1)).any()
    # dipping under the tip first does reach the pocket
    fut2 = future_set(g, node_index(g, (1.0, -0.5)))
    assert fut2[node_index(g, (-1.0, 0.3))]
    pocket = fx.surfaces["pocket"]
    assert pocket.any() and not (pocket & ~g.mask).any()
    assert (fut2 & pocket).any()


def test_wedge_tilted_cone_crosses_barrier():
    fx = fixture("wedge", shape=(101, 101))
    g = fx.grid
    fut = future_set(g, node_index(g, (1.0, 0.0)))
    # the widened cones let the same start reach the pocket
    assert fut[node_index(g, (-1.0, 0.3))]
    # far from the blend f = 1 and the null directions are the v axis
    # and the main diagonal, future copies (0,1) and (-1,-1)
    i, j = node_index(g, (-2.0, -2.0))
    a1, a2 = g.angles[i, j]
    assert a1 == pytest.approx(-3 * np.pi / 4, abs=1e-6)
    assert a2 == pytest.approx(np.pi / 2, abs=1e-6)


def test_quadrant_coverage_gap():
    fx = fixture("quadrant")
    g = fx.grid
    line = fx.surfaces["line"]
    rep = hypersurface_tests(g, line)
    assert rep.acausal and rep.achronal
    assert not rep.covers and rep.uncovered > 0
    assert rep.witness is not None
    cov = future_set(g, line) | past_set(g, line) | line
    for pt in ((0.5, 2.0), (-3.0, 2.5)):
        assert not cov[node_index(g, pt)]
    for pt in ((2.0, 1.0), (-3.0, 1.0), (-1.0, -2.0)):
        assert cov[node_index(g, pt)]


def test_slit_pieces_not_joinable():
    fx = fixture("slits:2")
    g = fx.grid
    pieces = [fx.surfaces["piece%d" % p] for p in range(3)]
    for piece in pieces:
        rep = hypersurface_tests(g, piece)
        assert rep.acausal and rep.achronal
        assert not rep.covers
    assert not joinability_matrix(g, pieces).any()
    # control: a segment above the slits is joinable with every piece
    top = np.zeros(g.shape, dtype=bool)
    i, _ = node_index(g, (1.0, 1.5))
    top[i] = g.mask[i]
    m = joinability_matrix(g, pieces + [top])
    assert m[3, :3].all() and m[:3, 3].all()
    # shadow of the first slit stays uncovered from piece 0
    cov0 = future_set(g, pieces[0]) | past_set(g, pieces[0]) | pieces[0]
    assert not cov0[node_index(g, (-2.0, 2.2))]


def test_staircase_threading_curve_misses_third_square():
    fx = fixture("staircase:3")
    g = fx.grid
    nodes = []
    i0, ja = node_index(g, (1.05, -0.95))
    _, jb = node_index(g, (1.05, 0.95))
    for j in range(ja, jb + 1):
        nodes.append((i0, j))
    i1, _ = node_index(g, (2.95, 0.95))
    for i in range(i0 + 1, i1 + 1):
        nodes.append((i, jb))
    curve = np.array(nodes, dtype=int)
    assert g.mask[curve[:, 0], curve[:, 1]].all()

    rep = coverage_criterion(g, curve, "null")
    assert not rep.coversJ and not rep.coversClosureJ
    cov = future_set(g, curve) | past_set(g, curve)
    assert not cov[node_index(g, (3.9, -1.9))]
    q2 = fx.surfaces["square2"]
    missed = (q2 & ~cov).sum() / q2.sum()
    assert missed > 0.2
    # the curve itself only meets the first two squares
    on = np.zeros(g.shape, dtype=bool)
    on[curve[:, 0], curve[:, 1]] = True
    assert (on & fx.surfaces["square0"]).any()
    assert (on & fx.surfaces["square1"]).any()
    assert not (on & q2).any()


def test_rotating_cones_imprisonment():
    fx = fixture("rotating-cones", shape=(96, 96))
    g = fx.grid
    rep = imprisonment_probe(g)
    assert rep.imprisoned
    assert len(rep.membranes) == 2
    assert rep.membranes[0][0] < np.pi / 2 < rep.membranes[0][1]
    assert rep.membranes[1][0] < 3 * np.pi / 2 < rep.membranes[1][1]
    assert rep.band is not None
    assert 3.9 < rep.max_reached_t < 4.3
    # null angles track the rotation phase
    for t_probe in (np.pi / 4, np.pi):
        i, j = node_index(g, (t_probe, 1.0))
        phase = 0.5 * np.pi * np.sin(g.ts[i]) ** 2
        lo = ((phase + np.pi / 2 + np.pi) % (2 * np.pi)) - np.pi
        expected = sorted((float(phase), float(lo)))
        assert g.angles[i, j] == pytest.approx(expected, abs=1e-6)


def test_drift_trap_one_way_membrane():
    fx = fixture("drift-trap")
    g = fx.grid
    T, X = np.meshgrid(g.ts, g.xs, indexing="ij")
    start = node_index(g, (-5.0, 2.0))
    fut = future_set(g, start)
    # beyond the ergo-style region both cone edges point left
    assert X[fut].max() <= g.xs[start[1]] + 1e-9
    # the grid cone floors the leftward drift near x = -1/2
    assert X[fut].min() > -0.6
    # every early event can still send a signal to the axis
    axis = np.zeros(g.shape, dtype=bool)
    axis[:, node_index(g, (0.0, 0.0))[1]] = True
    past = past_set(g, axis)
    early = g.mask & (T <= 3.0)
    assert (past & early).sum() == early.sum()
    # the metric is static so edge stacks repeat row to row
    assert np.array_equal(g.edges[:, 40, :], g.edges[:, 100, :])


def test_fixture_registry():
    assert len(fixture_names()) == 10
    with pytest.raises(ValueError, match="unknown fixture"):
        fixture("nope")
    with pytest.raises(ValueError, match="unknown fixture"):
        fixture("rect")
