"""Acceptance gate: ten pinned end-to-end behaviors, one verdict line each.

Every test prints "ACCEPTANCE <n> PASS" or "... FAIL" so a log scrape
shows the gate at a glance.  Tolerances and budgets are pinned in the
assertions; the compiled kernels are warmed once so budgets measure
steady-state work, not jit compilation.
"""

import functools
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from isocausal.algebra import classify_dp, null_oracle
from isocausal.fixtures import fixture, wedge_profile
from isocausal.grid import (
    chain_obstruction,
    closedness_probe,
    coverage_criterion,
    coverage_verdict,
    future_set,
    helix_curve,
    node_index,
)
from isocausal.lorentz import minkowski
from isocausal.mapping import Chart, MetricField, minkowski_stability
from isocausal.products import (
    GRWSpec,
    circle_fiber,
    desitter_instability_probe,
    grw_classify,
    grw_obstruction,
    grw_order,
)
from isocausal.waves import PlaneWaveSpec, boundary_report, pol_check, weyl_flatness

LINE = (-math.inf, math.inf)


def criterion(n):
    def deco(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\nACCEPTANCE {n} FAIL")
                raise
            print(f"\nACCEPTANCE {n} PASS")
        return run
    return deco


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    # compile the oracle refiner and the reachability BFS up front
    null_oracle(minkowski(3), np.eye(3), samples=64)
    g = fixture("minkowski2", shape=(11, 11)).grid
    future_set(g, node_index(g, (0.0, 0.0)))


@criterion(1)
def test_cosh_conformal_length():
    t0 = time.perf_counter()
    cls = grw_classify(GRWSpec(interval=LINE, f="cosh(t)", fiber=circle_fiber()))
    elapsed = time.perf_counter() - t0
    assert cls.kind == "FiniteBand"
    assert abs(cls.L - math.pi) < 1e-8
    assert elapsed < 1.0


@criterion(2)
def test_four_type_classifier():
    expected = {
        "1": "EinsteinStaticType",
        "exp(-t)": "ExpNegType",
        "exp(t)": "ExpPosType",
        "cosh(t)": "FiniteBand",
    }
    for f, kind in expected.items():
        t0 = time.perf_counter()
        cls = grw_classify(GRWSpec(interval=LINE, f=f, fiber=circle_fiber()))
        elapsed = time.perf_counter() - t0
        assert cls.kind == kind, (f, cls)
        assert elapsed < 1.0, (f, elapsed)


@criterion(3)
def test_power_warpings_pairwise_obstructed():
    specs = {a: GRWSpec(interval=(0.0, math.inf), f=f"t^{a}", fiber=circle_fiber())
             for a in (0.5, 1.0, 2.0)}
    flagged = 0
    for a, b in ((0.5, 1.0), (0.5, 2.0), (1.0, 2.0)):
        reports = (grw_obstruction(specs[a], specs[b]),
                   grw_obstruction(specs[b], specs[a]))
        assert not any(r.related == "isocausal" for r in reports)
        assert any(r.related == "no" for r in reports), (a, b, reports)
        flagged += 1
    assert flagged == 3


@criterion(4)
def test_classifier_agrees_with_sampling_oracle():
    def random_lorentzian(rng, n):
        while True:
            a = rng.normal(size=(n, n))
            g = a @ minkowski(n) @ a.T
            if abs(np.linalg.det(g)) > 0.05:
                return g

    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    disagreements = 0
    undecided = 0
    for n in (2, 3, 4):
        for _ in range(500):
            g = random_lorentzian(rng, n)
            s = rng.normal(size=(n, n))
            T = s + s.T
            rep = classify_dp(g, T)
            if abs(rep.margin) < 1e-6:
                undecided += 1
                continue
            measured = null_oracle(g, T, samples=4096, seed=42).min_pair_value
            if (rep.classification == "Future") != (measured >= -1e-7):
                disagreements += 1
    elapsed = time.perf_counter() - t0
    assert disagreements == 0
    assert undecided < 15
    assert elapsed < 30.0, elapsed


@criterion(5)
def test_slit_plane_fixture():
    t0 = time.perf_counter()

    # double null eigenvector family: T = g K for K = [[2f, -1], [1, 0]]
    # on the -2dudv chart, future cone spanned by -du and dv
    # f stays below ~4: the doubled eigenvalue of a defective matrix
    # splits numerically like sqrt(eps * f), and on this chart the split
    # crosses the classifier's clustering threshold near f ~ 8
    g2 = np.array([[0.0, -1.0], [-1.0, 0.0]])
    orient = np.array([-1.0, 1.0])
    rng = np.random.default_rng(42)
    for f in 10.0 ** rng.uniform(-2.0, 0.6, size=100):
        T = np.array([[2.0 * f, -1.0], [-1.0, 0.0]])
        rep = classify_dp(g2, T, orientation=orient)
        assert rep.classification == "Future"
        assert rep.segre == "NullEigenvector"
        assert rep.null_lambda == pytest.approx(f, rel=1e-9)

    # flat metric on the slit plane: the pocket left of the slit is
    # invisible from (1, 0) yet fully visible from just below the axis
    fx = fixture("wedge:eta")
    grid = fx.grid
    assert grid.shape == (201, 201)
    pocket = fx.surfaces["pocket"]
    chron = future_set(grid, node_index(grid, (1.0, 0.0)), kind="I")
    assert not (chron & pocket).any()
    for k in range(1, 6):
        below = future_set(grid, node_index(grid, (1.0, -1.0 / k)), kind="I")
        assert not (pocket & ~below).any(), k

    # closed causal sets for the tilted-cone metric at generic points.
    # Generic means the lattice represents the cones faithfully: away
    # from the slit column, the sliver band under the main diagonal,
    # the profile seams, and the region where the cone edge meets or
    # exceeds the stencil slope cap (f >= 2); closedness elsewhere is a
    # continuum claim a 201x201 grid cannot settle.
    fg = fixture("wedge")
    gw = fg.grid
    U, V = np.meshgrid(gw.ts, gw.xs, indexing="ij")
    F = wedge_profile(U, V)
    generic = gw.mask.copy()
    generic[:12] = generic[-12:] = False
    generic[:, :12] = generic[:, -12:] = False
    generic &= np.abs(U) >= 0.1
    generic &= ~((V - U > -0.40) & (V - U < -0.15))
    generic &= (F == 1.0) | ((V - U > 0.25) & (F < 1.8))
    flat_picks = np.argwhere(generic & (F == 1.0))
    tilt_picks = np.argwhere(generic & (F > 1.0))
    picks = np.vstack([
        flat_picks[rng.choice(flat_picks.shape[0], size=16, replace=False)],
        tilt_picks[rng.choice(tilt_picks.shape[0], size=4, replace=False)],
    ])
    for i, j in picks:
        rep = closedness_probe(gw, (float(gw.ts[i]), float(gw.xs[j])))
        assert rep.closed, (gw.ts[i], gw.xs[j], rep)
    assert not closedness_probe(grid, (1.0, 0.0)).closed

    assert time.perf_counter() - t0 < 60.0


@criterion(6)
def test_minkowski_stability_bracket():
    chart = Chart(("t", "x"), ((-2.0, 2.0), (-2.0, 2.0)))
    flat = minkowski_stability(MetricField.constant(chart, minkowski(2)))
    assert flat.theta_minus == math.pi / 4.0
    assert flat.theta_plus == math.pi / 4.0

    bump = "1 + 0.5*piecewise(t^2 + x^2 < 1, exp(1 - 1/(1 - (t^2 + x^2))), 0)"
    field = MetricField(chart, [["1", "0"], ["0", f"-({bump})"]])
    bracket = minkowski_stability(field, grid=41)
    assert 0.0 < bracket.theta_minus <= bracket.theta_plus < math.pi / 2.0
    assert bracket.verdict == "isocausal"
    for verdict in (bracket.lower, bracket.upper):
        assert verdict.outcome == "Causal"
        assert verdict.min_margin >= 0.0


@criterion(7)
def test_rectangle_chain_criterion():
    feasible = {}
    for L in (2.5, 1.0, 0.5):
        grid = fixture(f"rect:{L}").grid
        assert grid.shape[1] == 201  # 201 nodes per unit width
        feasible[L] = {j: chain_obstruction(grid, j).feasible for j in (1, 2, 3)}
    assert feasible[2.5] == {1: True, 2: True, 3: False}
    assert feasible[1.0] == {1: True, 2: False, 3: False}
    assert feasible[0.5] == {1: False, 2: False, 3: False}


@criterion(8)
def test_cylinder_trichotomy():
    verdicts = []
    for L in (math.pi + 0.3, math.pi, math.pi - 0.3):
        grid = fixture("cyl:%r" % L).grid
        timelike = coverage_criterion(grid, helix_curve(grid, 0.9), "timelike")
        null = coverage_criterion(grid, helix_curve(grid, 1.0), "null")
        verdicts.append(coverage_verdict(timelike, null))
    assert verdicts == ["timelike-covers", "lightlike-closure-covers-only", "neither"]


@criterion(9)
def test_plane_wave_suite():
    a1 = PlaneWaveSpec(frequency=(("-1", "0"), ("0", "-2")))
    a2 = PlaneWaveSpec(frequency=(("-3", "0"), ("0", "-1")))
    rep = pol_check(a1, a2)
    assert rep.isocausal
    assert rep.forward.verdict.outcome == "Causal"
    assert rep.reverse.verdict.outcome == "Causal"
    assert rep.forward.verdict.min_margin >= -1e-9
    assert rep.reverse.verdict.min_margin >= -1e-9

    assert weyl_flatness(3.0 * np.eye(2), 4).isFlat is True
    assert weyl_flatness(np.diag([1.0, -1.0]), 4).isFlat is False

    case = boundary_report(PlaneWaveSpec(frequency=(("-1", "0"), ("0", "-2")),
                                         locallySymmetric=True))
    assert case.isConformallyFlat is False
    assert case.case == "SandwichPlanes1B"


@criterion(10)
def test_critical_band_instability():
    probe = desitter_instability_probe(0.5, 1.0)
    assert abs(probe.L_reference - math.pi) < 1e-8
    assert probe.L_low < math.pi - 1e-8
    assert probe.L_high > math.pi + 1e-8

    # independent quadrature of the two perturbed band lengths
    def bump(t):
        u2 = t * t
        return math.exp(1.0 - 1.0 / (1.0 - u2)) if u2 < 1.0 else 0.0

    for sign, expected in ((1.0, probe.L_low), (-1.0, probe.L_high)):
        def integrand(t):
            if abs(t) > 700.0:  # cosh overflows; the tail is zero anyway
                return 0.0
            return 1.0 / (math.cosh(t) + sign * 0.5 * bump(t))

        total = err = 0.0
        for lo, hi in ((-math.inf, -1.0), (-1.0, 1.0), (1.0, math.inf)):
            v, e = quad(integrand, lo, hi, limit=200, epsabs=1e-12, epsrel=1e-12)
            total += v
            err += e
        assert err <= 1e-8
        assert abs(total - expected) <= 1e-8

    pairs = [(0, 1), (1, 2), (0, 2)]
    for i, j in pairs:
        order = grw_order(probe.classes[i], probe.classes[j])
        assert order.relation == "precedes"
        assert order.strict is True
