"""Warped and layered product metrics: conformal time, classes, mappings.

The metrics handled here carry a preferred time axis over a spatial
fiber, either in warped form ``dt^2 - f(t)^2 h`` or in the layered form
``rho(t, x) dt^2 - h[t]``.  The module measures the conformal-time
content of the warping interval by dyadic-shell quadrature, sorts
compact-fiber warped metrics into the four coarse causal classes that
finiteness profile allows, builds the explicit time reparameterizations
that order those classes, constructs the time-stretching map between
two layered metrics when the standard pinching constants exist, and
runs grid probes for signal arrival times and particle horizons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh as _generalized_eigh

from .expr import compile_fn, parse
from .fixtures import FunctionMetric2D
from .grid import build_grid, future_set, node_index, past_set
from .mapping import (
    Chart,
    ComposedMap,
    ExprMap,
    IdentityMap,
    MappingVerdict,
    MetricField,
    check_causal_mapping,
)

__all__ = [
    "FiberSpec",
    "GRWSpec",
    "TimeProductSpec",
    "IntervalProfile",
    "GRWClass",
    "OrderReport",
    "GRWMapping",
    "SplitReport",
    "ArrivalField",
    "HorizonReport",
    "ObstructionReport",
    "DesitterProbe",
    "circle_fiber",
    "sphere_fiber",
    "line_fiber",
    "conformal_interval",
    "grw_classify",
    "canonical_rep",
    "grw_order",
    "grw_mapping_construct",
    "split_mapping",
    "arrival_time",
    "horizon_check",
    "horizon_probe",
    "grw_obstruction",
    "desitter_instability_probe",
    "CRITICAL_BAND",
]

# Band length separating the helix coverage regimes on a unit round fiber.
CRITICAL_BAND = math.pi

_UNIT_DIAMETER = math.pi


@dataclass(frozen=True)
class FiberSpec:
    """Spatial fiber summary carrying the inputs the product checks need.

    ``diameter`` is the metric diameter; compact fibers must declare a
    positive one (the unit circle and unit spheres all have pi).
    """

    dim: int = 1
    compact: bool = True
    complete: bool = True
    diameter: float | None = _UNIT_DIAMETER
    name: str = "circle"


def circle_fiber() -> FiberSpec:
    return FiberSpec(dim=1, compact=True, complete=True, diameter=_UNIT_DIAMETER, name="circle")


def sphere_fiber(dim: int = 2) -> FiberSpec:
    return FiberSpec(dim=dim, compact=True, complete=True, diameter=_UNIT_DIAMETER, name="sphere")


def line_fiber() -> FiberSpec:
    return FiberSpec(dim=1, compact=False, complete=True, diameter=None, name="line")


@dataclass(frozen=True)
class GRWSpec:
    """Warped metric ``dt^2 - f(t)^2 h`` over a fixed fiber ``(S, h)``.

    ``f`` is an expression in ``t``, positive on the open ``interval``.
    """

    interval: tuple
    f: str = "1"
    fiber: FiberSpec = field(default_factory=FiberSpec)


@dataclass(frozen=True)
class TimeProductSpec:
    """Layered metric ``rho dt^2 - h[t]`` on an explicit fiber chart.

    ``fiber_metric`` holds the d x d entries of h as expressions in
    ``t`` and the fiber coordinates; ``omega`` is the optional cross
    one-form, which must vanish for the splitting operations.
    """

    interval: tuple
    rho: str = "1"
    fiber_names: tuple = ("x",)
    fiber_bounds: tuple = ((-1.0, 1.0),)
    fiber_metric: tuple = (("1",),)
    omega: tuple | None = None
    periodic: bool = False
    isotropic: bool = False


@dataclass(frozen=True)
class IntervalProfile:
    """Finiteness profile of the conformal-time integral of 1/f.

    A ``None`` entry means the shell diagnostics could not decide; the
    note records why.  ``L`` is the total conformal length (inf when a
    side diverges, nan when undecided) and ``error`` bounds the
    quadrature plus geometric-tail error of a finite ``L``.
    """

    pastFinite: bool | None
    futureFinite: bool | None
    L: float
    error: float
    note: str = ""


@dataclass(frozen=True)
class GRWClass:
    """Coarse causal class of a compact-fiber warped metric."""

    kind: str
    L: float | None = None

    def __str__(self) -> str:
        if self.kind == "FiniteBand":
            return f"FiniteBand(L={self.L:.8g})"
        return self.kind


@dataclass(frozen=True)
class OrderReport:
    """Existence of causal mappings between two classes, left to right.

    ``strict`` is True when the converse mapping is impossible, False
    when it exists, and None when the criterion leaves it open.
    """

    relation: str
    strict: bool | None
    note: str


@dataclass
class GRWMapping:
    """Explicit reparameterization between canonical class representatives."""

    phi: object
    source: MetricField
    target: MetricField
    params: dict
    note: str = ""

    def verify(self, grid: int = 41) -> MappingVerdict:
        return check_causal_mapping(self.phi, self.source, self.target, grid=grid)


@dataclass
class SplitReport:
    """Stretching map between layered metrics and its sampled constants."""

    k: float
    N: float
    slope: float
    phi: ExprMap
    verdict: MappingVerdict
    note: str = ""


@dataclass
class ArrivalField:
    """Earliest/latest signal times between a base event and comoving lines.

    ``t_plus[j]`` is the least ``t - t_base`` at which the line through
    ``coords[j]`` is causally reached (inf when no arrival inside the
    window; the matching truncated flag is then set).  ``t_minus`` is
    the dual quantity through the past.
    """

    coords: np.ndarray
    t_plus: np.ndarray
    t_minus: np.ndarray
    base: tuple
    window: tuple
    cell: tuple
    truncated_plus: np.ndarray
    truncated_minus: np.ndarray
    note: str = ""


@dataclass(frozen=True)
class HorizonReport:
    """Particle-horizon verdicts for a comoving observer."""

    noPastHorizon: bool
    noFutureHorizon: bool
    truncated: bool
    window: tuple | None
    note: str = ""


@dataclass(frozen=True)
class ObstructionReport:
    """Directional no-mapping verdict between two warped metrics."""

    related: str
    reason: str
    profiles: tuple
    sampled: bool = False


@dataclass(frozen=True)
class DesitterProbe:
    """Band lengths of compactly supported perturbations of cosh."""

    amplitude: float
    width: float
    L_low: float
    L_reference: float
    L_high: float
    classes: tuple
    orders: tuple
    note: str = ""


def _as_callable(f):
    if callable(f):
        return f
    fn = compile_fn(parse(f), ("t",))

    def wrapped(t):
        with np.errstate(all="ignore"):
            return np.broadcast_to(np.asarray(fn(t), dtype=float), np.shape(t))

    return wrapped


def _interior_points(a: float, b: float, n: int = 4097) -> np.ndarray:
    # arctan-compactified interior samples; never touches the endpoints
    lo = math.atan(a) if math.isfinite(a) else -math.pi / 2
    hi = math.atan(b) if math.isfinite(b) else math.pi / 2
    u = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    return np.tan(u)


def _check_positive(fn, interval, what="warping function") -> None:
    pts = _interior_points(*interval)
    with np.errstate(all="ignore"):
        vals = np.asarray(fn(pts), dtype=float)
    # exact zeros pass: a positive warping may underflow far out
    bad = (vals < 0.0) | np.isnan(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise ValueError(f"{what} must be positive on the interval; fails near t={pts[i]:.6g}")


def _reciprocal(fn):
    def integrand(t):
        with np.errstate(all="ignore"):
            v = float(np.asarray(fn(np.float64(t)), dtype=float))
        if v > 0.0:
            return 1.0 / v
        return math.inf

    return integrand


def _quad(integrand, lo, hi):
    out = quad(integrand, lo, hi, limit=200, full_output=1)
    return float(out[0]), float(out[1])


_NONDECAY_RUN = 20
_DECAY_RUN = 5
_DECAY_RATIO = 0.9
_DIVERGENCE_CAP = 1e10
_MAX_SHELLS = 60


def _shell(c: float, endpoint: float, j: int):
    if math.isinf(endpoint):
        w0, w1 = 2.0 ** j - 1.0, 2.0 ** (j + 1) - 1.0
        return (c + w0, c + w1) if endpoint > 0 else (c - w1, c - w0)
    s = endpoint - c
    lo, hi = endpoint - s / 2.0 ** j, endpoint - s / 2.0 ** (j + 1)
    return (lo, hi) if lo <= hi else (hi, lo)


def _side_finite(integrand, c: float, endpoint: float):
    """Decide convergence of the improper integral toward ``endpoint``.

    Dyadic shells accumulate toward the endpoint; a long run of
    non-shrinking contributions (or blowing past the divergence cap)
    flags infinity, a short geometric decay flags convergence with a
    tail bound, anything else stays undecided (None).
    """
    prev = None
    nondecay = decay = 0
    ratios: list[float] = []
    total = err_total = 0.0
    for j in range(_MAX_SHELLS):
        lo, hi = _shell(c, endpoint, j)
        if lo == hi:
            return True, total, err_total, "shells exhausted the float range"
        val, err = _quad(integrand, lo, hi)
        if not math.isfinite(val) or total + val > _DIVERGENCE_CAP:
            return False, math.inf, 0.0, f"diverged by shell {j}"
        total += val
        err_total += err
        if prev is not None:
            nondecay = nondecay + 1 if val >= (1.0 - 1e-3) * prev else 0
            if prev > 0.0 and val < _DECAY_RATIO * prev:
                decay += 1
                ratios.append(val / prev)
            else:
                decay = 0
                ratios = []
            if nondecay >= _NONDECAY_RUN:
                return False, math.inf, 0.0, f"{_NONDECAY_RUN} non-shrinking shells"
            if decay >= _DECAY_RUN:
                q = max(ratios)
                return True, total, err_total + val * q / (1.0 - q), "geometric shell decay"
        if val <= 1e-300:
            return True, total, err_total, "shell contributions underflowed"
        prev = val
    return None, total, err_total, f"undecided after {_MAX_SHELLS} shells"


def _default_anchor(a: float, b: float) -> float:
    if math.isfinite(a) and math.isfinite(b):
        return 0.5 * (a + b)
    if math.isfinite(a):
        return a + 1.0
    if math.isfinite(b):
        return b - 1.0
    return 0.0


def conformal_interval(spec: GRWSpec, anchor: float | None = None) -> IntervalProfile:
    """Finiteness profile of ``integral dt / f`` over the spec interval.

    Each side is probed with dyadic shells from an interior anchor; the
    exact length is recomputed by adaptive quadrature once both sides
    are known finite.  Raises ValueError when f fails to be positive.
    """
    a, b = float(spec.interval[0]), float(spec.interval[1])
    if not a < b:
        raise ValueError("the warping interval is empty")
    fn = _as_callable(spec.f)
    _check_positive(fn, (a, b))
    if anchor is None:
        anchor = _default_anchor(a, b)
    elif not a < anchor < b:
        raise ValueError("anchor must lie inside the interval")
    integrand = _reciprocal(fn)
    past_fin, p_tot, p_err, p_note = _side_finite(integrand, anchor, a)
    fut_fin, f_tot, f_err, f_note = _side_finite(integrand, anchor, b)
    note = f"past: {p_note}; future: {f_note}"
    if past_fin is None or fut_fin is None:
        return IntervalProfile(past_fin, fut_fin, math.nan, math.nan, note)
    if past_fin and fut_fin:
        v1, e1 = _quad(integrand, a, anchor)
        v2, e2 = _quad(integrand, anchor, b)
        return IntervalProfile(True, True, v1 + v2, e1 + e2, note)
    return IntervalProfile(bool(past_fin), bool(fut_fin), math.inf, 0.0, note)


def grw_classify(spec: GRWSpec, anchor: float | None = None) -> GRWClass:
    """Sort a compact-fiber warped metric into one of four causal classes.

    The class depends only on which ends of the conformal-time interval
    are finite; a finite band reports its length normalized to a fiber
    of unit diameter pi, so rescaling ``f`` and the fiber together does
    not move the class.
    """
    fib = spec.fiber
    if not fib.compact:
        raise ValueError("the four-class taxonomy needs a compact fiber")
    if fib.diameter is None or not fib.diameter > 0:
        raise ValueError("a compact fiber must declare a positive diameter")
    prof = conformal_interval(spec, anchor)
    if prof.pastFinite is None or prof.futureFinite is None:
        raise ValueError("undecidable conformal integral: " + prof.note)
    if prof.pastFinite and prof.futureFinite:
        return GRWClass("FiniteBand", prof.L * (_UNIT_DIAMETER / fib.diameter))
    if prof.pastFinite:
        return GRWClass("ExpNegType")
    if prof.futureFinite:
        return GRWClass("ExpPosType")
    return GRWClass("EinsteinStaticType")


_CANONICAL_INTERVALS = {
    "EinsteinStaticType": (-math.inf, math.inf),
    "ExpNegType": (0.0, math.inf),
    "ExpPosType": (-math.inf, 0.0),
}


def canonical_rep(cls: GRWClass, fiber: FiberSpec | None = None) -> GRWSpec:
    """Conformal product representative ``dt^2 - h`` of a class.

    The warping factor of the representative is identically one; the
    time interval carries the entire causal content.
    """
    if fiber is None:
        fiber = circle_fiber()
    if cls.kind == "FiniteBand":
        if cls.L is None or not cls.L > 0:
            raise ValueError("a finite band needs a positive length")
        return GRWSpec(interval=(0.0, float(cls.L)), f="1", fiber=fiber)
    try:
        interval = _CANONICAL_INTERVALS[cls.kind]
    except KeyError:
        raise ValueError(f"unknown class kind {cls.kind!r}") from None
    return GRWSpec(interval=interval, f="1", fiber=fiber)


def _band_regime(L: float, tol: float = 1e-9) -> str:
    if L < CRITICAL_BAND - tol:
        return "below"
    if L > CRITICAL_BAND + tol:
        return "above"
    return "critical"


_CLASS_RANK = {
    "FiniteBand": 0,
    "ExpNegType": 1,
    "ExpPosType": 1,
    "EinsteinStaticType": 2,
}


def grw_order(c1: GRWClass, c2: GRWClass) -> OrderReport:
    """Order two causal classes under existence of causal mappings.

    ``precedes`` means a causal mapping from the first class into the
    second exists.  Between two finite bands strictness is decided by
    the helix coverage regime: crossing the critical length pi kills
    the converse mapping, while two bands on the same side of pi leave
    it open.
    """
    for c in (c1, c2):
        if c.kind not in _CLASS_RANK:
            raise ValueError(f"unknown class kind {c.kind!r}")
    if c1.kind == "FiniteBand" and c2.kind == "FiniteBand":
        if abs(c1.L - c2.L) <= 1e-6:
            return OrderReport("equivalent", False, "band lengths agree within tolerance")
        relation = "precedes" if c1.L < c2.L else "succeeds"
        r1, r2 = _band_regime(c1.L), _band_regime(c2.L)
        if r1 != r2:
            note = ("time dilation maps the shorter band into the longer; "
                    "the helix coverage regime changes across pi, so the converse fails")
            return OrderReport(relation, True, note)
        note = ("time dilation maps the shorter band into the longer; "
                "strictness within one coverage regime is not settled here")
        return OrderReport(relation, None, note)
    r1, r2 = _CLASS_RANK[c1.kind], _CLASS_RANK[c2.kind]
    if r1 == r2:
        if c1.kind == c2.kind:
            return OrderReport("equivalent", False,
                               "each unbounded class carries a single causal structure")
        return OrderReport("incomparable", True,
                           "each side has a bounded conformal end the other lacks")
    relation = "precedes" if r1 < r2 else "succeeds"
    return OrderReport(relation, True,
                       "an explicit stretching map goes up the ladder; the bounded "
                       "conformal end obstructs the converse")


def _product_field(interval, name: str) -> MetricField:
    chart = Chart(("t", "p"), (tuple(interval), (0.0, 2.0 * math.pi)))
    return MetricField(chart, [["1", "0"], ["0", "-1"]], orientation=("1", "0"), name=name)


def grw_mapping_construct(src: GRWClass, dst: GRWClass,
                          A: float | None = None, B: float | None = None) -> GRWMapping:
    """Explicit time reparameterization between canonical representatives.

    Supported directions: a band into a longer band (linear dilation),
    a band into either one-sided class (a tangent stretch with
    ``A >= 2L/pi``), a one-sided class into the static class
    (``B*t - A/t`` with ``A > 0``, ``B > 1``), and their composite from
    a band to the static class.  Everything else raises
    ``ValueError("direction not provided by the construction: ...")``.
    """
    for c in (src, dst):
        if c.kind not in _CLASS_RANK:
            raise ValueError(f"unknown class kind {c.kind!r}")
    source = _product_field(canonical_rep(src).interval, "source representative")
    target = _product_field(canonical_rep(dst).interval, "target representative")

    if src.kind == dst.kind:
        if src.kind == "FiniteBand" and abs(src.L - dst.L) > 1e-6:
            if src.L > dst.L:
                raise ValueError(
                    f"direction not provided by the construction: "
                    f"FiniteBand({src.L:g}) -> FiniteBand({dst.L:g})")
            slope = dst.L / src.L
            phi = ExprMap(("t", "p"), (f"({slope!r}) * t", "p"))
            return GRWMapping(phi, source, target, {"slope": slope},
                              "linear time dilation onto the longer band")
        return GRWMapping(IdentityMap(2), source, target, {}, "same class")

    key = (src.kind, dst.kind)
    if key in (("FiniteBand", "ExpNegType"), ("FiniteBand", "ExpPosType")):
        L = float(src.L)
        c = math.pi / (2.0 * L)
        if A is None:
            A = 2.0 * L / math.pi
        if A < 2.0 * L / math.pi - 1e-12:
            raise ValueError("A must be at least 2L/pi, or the stretch dips below slope one")
        if key[1] == "ExpNegType":
            expr = f"({A!r}) * tan(({c!r}) * t)"
        else:
            expr = f"({A!r}) * tan(({c!r}) * (t - ({L!r})))"
        phi = ExprMap(("t", "p"), (expr, "p"))
        return GRWMapping(phi, source, target, {"A": A, "L": L},
                          "tangent stretch; the time derivative stays at or above one")
    if key in (("ExpNegType", "EinsteinStaticType"), ("ExpPosType", "EinsteinStaticType")):
        if A is None:
            A = 1.0
        if B is None:
            B = 2.0
        if not A > 0:
            raise ValueError("A must be positive")
        if not B > 1:
            raise ValueError("B must exceed one, or the map fails to dominate the identity")
        expr = f"({B!r}) * t - ({A!r}) / t"
        phi = ExprMap(("t", "p"), (expr, "p"))
        return GRWMapping(phi, source, target, {"A": A, "B": B},
                          "hyperbolic stretch onto the whole line")
    if key == ("FiniteBand", "EinsteinStaticType"):
        first = grw_mapping_construct(src, GRWClass("ExpNegType"), A=A)
        second = grw_mapping_construct(GRWClass("ExpNegType"), dst, B=B)
        phi = ComposedMap(first.phi, second.phi)
        params = {"first": first.params, "second": second.params}
        return GRWMapping(phi, first.source, second.target, params,
                          "composite of the tangent and hyperbolic stretches")
    raise ValueError(f"direction not provided by the construction: {src.kind} -> {dst.kind}")


def _compile_over(expr: str, names) -> object:
    return compile_fn(parse(expr), tuple(names))


def _is_zero_form(omega) -> bool:
    if omega is None:
        return True
    return all(str(o).strip() in ("0", "0.0", "-0", "-0.0") for o in omega)


def _layered_field(spec: TimeProductSpec, name: str) -> MetricField:
    d = len(spec.fiber_names)
    n = d + 1
    entries = [["0"] * n for _ in range(n)]
    entries[0][0] = spec.rho
    for i in range(d):
        for j in range(d):
            entries[i + 1][j + 1] = f"-({spec.fiber_metric[i][j]})"
    chart = Chart(("t",) + tuple(spec.fiber_names),
                  (tuple(spec.interval),) + tuple(spec.fiber_bounds))
    orient = ("1",) + ("0",) * d
    return MetricField(chart, entries, orientation=orient, name=name)


def split_mapping(spec1: TimeProductSpec, spec2: TimeProductSpec,
                  grid: int = 41) -> SplitReport:
    """Time-stretching causal mapping between two layered metrics.

    ``k`` is the sampled infimum of ``rho2(t2, x)/rho1(t1, x)`` over
    independent times at a common fiber point, ``N`` the sampled
    supremum of the spectral radius of ``h2[t]`` relative to ``h1[t]``.
    The constructed map stretches time by ``sqrt(N/k)`` and fixes the
    fiber; the verdict re-checks it through the mapping engine.  Raises
    ValueError when a pinching condition fails on the sample grid.
    """
    if tuple(spec1.fiber_names) != tuple(spec2.fiber_names):
        raise ValueError("the two metrics must share the fiber coordinates")
    if not (_is_zero_form(spec1.omega) and _is_zero_form(spec2.omega)):
        raise ValueError("splitting requires vanishing cross terms")
    for s in (spec1, spec2):
        a, b = float(s.interval[0]), float(s.interval[1])
        if not (math.isinf(a) and math.isinf(b)):
            raise ValueError("reparameterize the time interval onto the whole line first")
    names = ("t",) + tuple(spec1.fiber_names)
    d = len(spec1.fiber_names)

    taxis = _interior_points(-math.inf, math.inf, grid)
    axes = [taxis]
    for lo, hi in spec1.fiber_bounds:
        axes.append(_interior_points(float(lo), float(hi), grid))
    mesh = np.meshgrid(*axes, indexing="ij")
    cols = [m.ravel() for m in mesh]
    nt = grid
    nfib = cols[0].size // nt

    def eval_expr_grid(expr):
        with np.errstate(all="ignore"):
            out = _compile_over(expr, names)(*cols)
        return np.broadcast_to(np.asarray(out, dtype=float), cols[0].shape)

    rho1 = eval_expr_grid(spec1.rho).reshape(nt, nfib)
    rho2 = eval_expr_grid(spec2.rho).reshape(nt, nfib)
    if not (np.isfinite(rho1).all() and (rho1 > 0).all()):
        raise ValueError("the first lapse fails to be positive and finite on the grid")
    k = float(np.min(rho2.min(axis=0) / rho1.max(axis=0)))
    if not math.isfinite(k) or k <= 1e-12:
        raise ValueError(f"condition (i) fails on the sample grid: inf rho2/rho1 = {k:.3g}")

    h1 = np.empty((cols[0].size, d, d))
    h2 = np.empty((cols[0].size, d, d))
    for i in range(d):
        for j in range(d):
            h1[:, i, j] = eval_expr_grid(spec1.fiber_metric[i][j])
            h2[:, i, j] = eval_expr_grid(spec2.fiber_metric[i][j])
    h1 = 0.5 * (h1 + np.transpose(h1, (0, 2, 1)))
    h2 = 0.5 * (h2 + np.transpose(h2, (0, 2, 1)))
    if np.linalg.eigvalsh(h1).min() <= 0:
        raise ValueError("the first fiber metric is not positive definite at a sample")
    if d == 1:
        lam = h2[:, 0, 0] / h1[:, 0, 0]
        N = float(np.abs(lam).max())
    else:
        N = 0.0
        for p in range(h1.shape[0]):
            vals = _generalized_eigh(h2[p], h1[p], eigvals_only=True)
            N = max(N, float(np.abs(vals).max()))
    if not math.isfinite(N):
        raise ValueError("condition (ii) fails on the sample grid: "
                         "the relative fiber norm is unbounded")

    slope = math.sqrt(N / k)
    phi = ExprMap(names, (f"({slope!r}) * t",) + tuple(spec1.fiber_names))
    field1 = _layered_field(spec1, "source layered metric")
    field2 = _layered_field(spec2, "target layered metric")
    verdict = check_causal_mapping(phi, field1, field2, grid=min(grid, 21))
    return SplitReport(k, N, slope, phi, verdict,
                       "pinching constants estimated on the sample grid")


def _as_product(spec, xspan: float = 6.0) -> TimeProductSpec:
    if isinstance(spec, TimeProductSpec):
        return spec
    if not isinstance(spec, GRWSpec):
        raise TypeError("expected a GRWSpec or TimeProductSpec")
    fib = spec.fiber
    h11 = f"({spec.f})^2"
    if fib.compact:
        if fib.diameter is None or not fib.diameter > 0:
            raise ValueError("a compact fiber must declare a positive diameter")
        # great-circle reduction: one periodic coordinate of full length
        bounds = (0.0, 2.0 * float(fib.diameter))
        periodic = True
    else:
        bounds = (-xspan, xspan)
        periodic = False
    return TimeProductSpec(interval=spec.interval, rho="1", fiber_names=("x",),
                           fiber_bounds=(bounds,), fiber_metric=((h11,),),
                           periodic=periodic)


def _product_grid(prod: TimeProductSpec, shape, window):
    names = ("t",) + tuple(prod.fiber_names)
    rho_fn = _compile_over(prod.rho, names)
    h_fn = _compile_over(prod.fiber_metric[0][0], names)

    def g_fn(T, X):
        with np.errstate(all="ignore"):
            R = np.broadcast_to(np.asarray(rho_fn(T, X), dtype=float), np.shape(T))
            Hm = np.broadcast_to(np.asarray(h_fn(T, X), dtype=float), np.shape(T))
        out = np.zeros(np.shape(T) + (2, 2))
        out[..., 0, 0] = R
        out[..., 1, 1] = -Hm
        return out

    def orient_fn(T, X):
        out = np.zeros(np.shape(T) + (2,))
        out[..., 0] = 1.0
        return out

    metric = FunctionMetric2D(g_fn, orient_fn, name="layered product")
    return build_grid(metric, (tuple(window), tuple(prod.fiber_bounds[0])),
                      shape, wrap=prod.periodic)


def _clip_window(interval, window):
    a, b = float(interval[0]), float(interval[1])
    if window is None:
        window = (max(a, -6.0), min(b, 6.0))
    lo, hi = float(window[0]), float(window[1])
    lo, hi = max(lo, a), min(hi, b)
    if not lo < hi:
        raise ValueError("the time window misses the interval")
    return lo, hi


def arrival_time(spec, base, shape=(161, 161), window=None) -> ArrivalField:
    """Grid field of earliest/latest signal times from a base event.

    One-dimensional fibers are sampled directly.  A two-dimensional
    isotropic fiber is reduced to its radial coordinate about the base
    point; higher fiber dimensions are rejected.  Entries with no
    arrival inside the window report inf and a truncated flag; the
    window always truncates genuinely infinite arrivals, so flags near
    the window edge are only lower bounds.
    """
    prod = _as_product(spec)
    d = len(prod.fiber_names)
    note = ""
    if d == 2:
        if not prod.isotropic:
            raise ValueError("two-dimensional fibers need an isotropic radial profile")
        rmax = float(prod.fiber_bounds[0][1])
        prod = TimeProductSpec(interval=prod.interval, rho=prod.rho,
                               fiber_names=(prod.fiber_names[0],),
                               fiber_bounds=((0.0, rmax),),
                               fiber_metric=((prod.fiber_metric[0][0],),))
        base = (base[0], 0.0)
        note = "radial reduction about the base point"
    elif d > 2:
        raise ValueError("fiber dimension above two is not supported")
    window = _clip_window(prod.interval, window)
    grid = _product_grid(prod, shape, window)
    src = node_index(grid, base)
    if not grid.mask[src]:
        raise ValueError("the base point is not a live grid node")
    t0 = float(grid.ts[src[0]])
    fut = future_set(grid, src, kind="J")
    past = past_set(grid, src, kind="J")
    any_f = fut.any(axis=0)
    any_p = past.any(axis=0)
    first = fut.argmax(axis=0)
    last = grid.mask.shape[0] - 1 - past[::-1].argmax(axis=0)
    t_plus = np.where(any_f, grid.ts[first] - t0, math.inf)
    t_minus = np.where(any_p, t0 - grid.ts[last], math.inf)
    return ArrivalField(coords=grid.xs.copy(), t_plus=t_plus, t_minus=t_minus,
                        base=(t0, float(grid.xs[src[1]])), window=window,
                        cell=(grid.dt, grid.dx), truncated_plus=~any_f,
                        truncated_minus=~any_p, note=note)


def horizon_probe(grid, x0: float, t_margin: float = 0.25) -> HorizonReport:
    """Window-truncated particle-horizon check on a causal grid.

    The observer is the comoving column nearest ``x0``.  No past
    horizon means every live node (below the trimmed future edge)
    reaches the column; no future horizon means the column reaches
    every live node above the trimmed past edge.  Both verdicts are
    window-truncated, so the truncated flag is always set.
    """
    j0 = int(np.argmin(np.abs(grid.xs - x0)))
    col = np.zeros_like(grid.mask)
    col[:, j0] = grid.mask[:, j0]
    if not col.any():
        raise ValueError("the observer column has no live nodes")
    reaches_col = past_set(grid, col, kind="J")
    reached_by_col = future_set(grid, col, kind="J")
    span = grid.ts[-1] - grid.ts[0]
    hi_cut = grid.ts[-1] - t_margin * span
    lo_cut = grid.ts[0] + t_margin * span
    T = grid.ts[:, None] * np.ones_like(grid.mask, dtype=float)
    below = grid.mask & (T <= hi_cut)
    above = grid.mask & (T >= lo_cut)
    no_past = bool((reaches_col | ~below).all())
    no_future = bool((reached_by_col | ~above).all())
    return HorizonReport(no_past, no_future, True,
                         (float(grid.ts[0]), float(grid.ts[-1])),
                         f"window-truncated; trimmed {t_margin:.0%} at the relevant edge")


def horizon_check(spec, x0: float | None = None, shape=(161, 161),
                  window=None, t_margin: float = 0.25) -> HorizonReport:
    """Particle-horizon verdicts for a comoving observer.

    Warped metrics with a complete fiber get the exact conformal-span
    rule: no past horizon iff the future conformal integral diverges,
    and dually.  Layered metrics fall back to a window-truncated grid
    check against the comoving line at ``x0``.
    """
    if isinstance(spec, GRWSpec):
        if not spec.fiber.complete:
            raise ValueError("the conformal-span rule needs a complete fiber")
        prof = conformal_interval(spec)
        if prof.pastFinite is None or prof.futureFinite is None:
            raise ValueError("undecidable conformal integral: " + prof.note)
        return HorizonReport(noPastHorizon=not prof.futureFinite,
                             noFutureHorizon=not prof.pastFinite,
                             truncated=False, window=None,
                             note="conformal-span rule; " + prof.note)
    prod = _as_product(spec)
    if len(prod.fiber_names) != 1:
        raise ValueError("grid horizon checks need a one-dimensional fiber")
    if x0 is None:
        raise ValueError("grid horizon checks need the observer coordinate x0")
    window = _clip_window(prod.interval, window)
    grid = _product_grid(prod, shape, window)
    return horizon_probe(grid, x0, t_margin)


def grw_obstruction(spec1: GRWSpec, spec2: GRWSpec) -> ObstructionReport:
    """Directional no-mapping test between two warped metrics.

    ``related="no"`` certifies that no causal mapping from the first
    into the second exists: a conformal end that is infinite for the
    source but finite for the target cannot be compressed.  When no
    obstruction shows and both warpings stay sampled-pinched between
    positive bounds over the same unbounded interval and fiber, the
    two are reported isocausal; otherwise unknown.
    """
    for s in (spec1, spec2):
        if not s.fiber.complete:
            raise ValueError("the obstruction criterion needs complete fibers")
    p1 = conformal_interval(spec1)
    p2 = conformal_interval(spec2)
    profs = (p1, p2)
    undecided = [side for side in ("pastFinite", "futureFinite")
                 if getattr(p1, side) is None or getattr(p2, side) is None]
    if undecided:
        return ObstructionReport("unknown",
                                 "undecidable conformal integral on: " + ", ".join(undecided),
                                 profs)
    if (not p1.pastFinite) and p2.pastFinite:
        return ObstructionReport(
            "no", "the past conformal integral diverges for the source "
                  "but converges for the target", profs)
    if (not p1.futureFinite) and p2.futureFinite:
        return ObstructionReport(
            "no", "the future conformal integral diverges for the source "
                  "but converges for the target", profs)

    same_fiber = (spec1.fiber.compact and spec2.fiber.compact
                  and spec1.fiber.dim == spec2.fiber.dim
                  and spec1.fiber.name == spec2.fiber.name)
    same_interval = tuple(map(float, spec1.interval)) == tuple(map(float, spec2.interval))
    unbounded = math.isinf(float(spec1.interval[0])) or math.isinf(float(spec1.interval[1]))
    if same_fiber and same_interval and unbounded:
        if _sampled_pinched(spec1) and _sampled_pinched(spec2):
            return ObstructionReport(
                "isocausal",
                "both warping functions stay between positive sampled bounds "
                "over a common unbounded interval and compact fiber", profs, sampled=True)
    return ObstructionReport("unknown",
                             "no one-sided obstruction; pinching not established", profs)


def _sampled_pinched(spec: GRWSpec) -> bool:
    """Sampled evidence that 0 < inf f <= sup f < inf over the interval.

    Two compactification depths must agree: bounds that keep drifting
    as sampling reaches deeper toward the ends are not accepted.
    """
    fn = _as_callable(spec.f)
    a, b = float(spec.interval[0]), float(spec.interval[1])
    stats = []
    for n in (257, 4097):
        with np.errstate(all="ignore"):
            vals = np.asarray(fn(_interior_points(a, b, n)), dtype=float)
        if not np.isfinite(vals).all():
            return False
        stats.append((float(vals.min()), float(vals.max())))
    (lo1, hi1), (lo2, hi2) = stats
    if lo2 <= 1e-9 or hi2 >= 1e9:
        return False
    return lo2 >= 0.6 * lo1 and hi2 <= 1.8 * hi1


def _bump_factory(width: float):
    def bump(t):
        t = np.asarray(t, dtype=float)
        u = t / width
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        with np.errstate(all="ignore"):
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out

    return bump


def _line_length(fn, width: float):
    integrand = _reciprocal(fn)
    total = err = 0.0
    for lo, hi in ((-math.inf, -width), (-width, width), (width, math.inf)):
        v, e = _quad(integrand, lo, hi)
        total += v
        err += e
    return total, err


def desitter_instability_probe(amplitude: float = 0.5, width: float = 1.0) -> DesitterProbe:
    """Perturb the cosh warping by a compactly supported bump.

    Adding the bump shortens the conformal band below pi, subtracting
    it stretches the band beyond pi, so arbitrarily small bumps move
    the metric into classes strictly ordered on either side of the
    unperturbed one: the taxonomy is unstable exactly at pi.
    """
    if not width > 0:
        raise ValueError("width must be positive")
    amplitude = float(amplitude)
    bump = _bump_factory(width)

    def f_plus(t):
        return np.cosh(np.asarray(t, dtype=float)) + amplitude * bump(t)

    def f_minus(t):
        return np.cosh(np.asarray(t, dtype=float)) - amplitude * bump(t)

    line = (-math.inf, math.inf)
    _check_positive(f_plus, line, what="perturbed warping (added bump)")
    _check_positive(f_minus, line, what="perturbed warping (subtracted bump)")
    L_add, e1 = _line_length(f_plus, width)
    L_sub, e2 = _line_length(f_minus, width)
    ref, e0 = _line_length(np.cosh, width)
    L_low, L_high = min(L_add, L_sub), max(L_add, L_sub)
    classes = (GRWClass("FiniteBand", L_low),
               GRWClass("FiniteBand", ref),
               GRWClass("FiniteBand", L_high))
    orders = (grw_order(classes[0], classes[1]), grw_order(classes[1], classes[2]))
    note = "unperturbed" if amplitude == 0.0 else ""
    return DesitterProbe(amplitude, width, L_low, ref, L_high, classes, orders, note)
