"""Metric fields on coordinate charts and verification of causal mappings.

A mapping between two Lorentzian fields is accepted as causal when the
pullback of the target metric classifies as a future tensor of the source
metric at every sample point and the push-forward of the declared future
orientation stays future-directed.  A consistent orientation reversal with
the same dominance property is reported as anticausal.  Verdicts are always
tied to the sampling grid that produced them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import classify_dp
from .expr import compile_fn, parse
from .lorentz import cone_angles, minkowski

__all__ = [
    "Chart",
    "MetricField",
    "ExprMap",
    "LinearMap",
    "IdentityMap",
    "ComposedMap",
    "MappingVerdict",
    "ConeBracket",
    "check_causal_mapping",
    "check_conformal",
    "minkowski_stability",
]


def _axis_samples(lo: float, hi: float, count: int) -> np.ndarray:
    """Cell-centered samples; infinite ends are compactified through arctan."""
    cells = (np.arange(count) + 0.5) / count
    if math.isinf(lo) and math.isinf(hi):
        return np.tan(-0.5 * math.pi + cells * math.pi)
    if math.isinf(hi):
        return lo + np.tan(cells * 0.5 * math.pi)
    if math.isinf(lo):
        return hi - np.tan(cells * 0.5 * math.pi)[::-1]
    return lo + cells * (hi - lo)


@dataclass(frozen=True)
class Chart:
    """Coordinate names with per-axis open bounds (infinite ends allowed)."""

    coords: tuple
    bounds: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        if len(bounds) != len(self.coords):
            raise ValueError("one bounds pair per coordinate is required")
        for a, b in bounds:
            if not a < b:
                raise ValueError(f"empty coordinate range ({a}, {b})")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def sample_grid(self, count: int = 41) -> np.ndarray:
        """(count**dim, dim) array of cell-centered sample points."""
        axes = [_axis_samples(lo, hi, count) for lo, hi in self.bounds]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def _compile_matrix(entries, names):
    rows = []
    for row in entries:
        rows.append([compile_fn(parse(e) if isinstance(e, str) else e, names) for e in row])
    return rows


class MetricField:
    """Lorentzian metric given by a matrix of coordinate expressions."""

    def __init__(self, chart: Chart, entries, orientation=None, name: str = ""):
        self.chart = chart
        self.name = name
        n = chart.dim
        self._const = None
        if isinstance(entries, np.ndarray) and entries.dtype != object:
            if entries.shape != (n, n):
                raise ValueError("constant metric has wrong shape")
            self._const = 0.5 * (entries + entries.T)
            self._fns = None
        else:
            if len(entries) != n or any(len(r) != n for r in entries):
                raise ValueError("metric entries must form a square matrix")
            self._fns = _compile_matrix(entries, chart.coords)
        if orientation is None:
            self._orient = None
        else:
            if len(orientation) != n:
                raise ValueError("orientation needs one component per coordinate")
            self._orient = [
                compile_fn(parse(c) if isinstance(c, str) else c, chart.coords)
                for c in orientation
            ]

    @classmethod
    def constant(cls, chart: Chart, matrix, orientation=None, name: str = "") -> "MetricField":
        return cls(chart, np.asarray(matrix, dtype=float), orientation=orientation, name=name)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        m, n = points.shape
        if n != self.chart.dim:
            raise ValueError("points do not match the chart dimension")
        if self._const is not None:
            return np.broadcast_to(self._const, (m, n, n)).copy()
        args = [points[:, j] for j in range(n)]
        out = np.empty((m, n, n))
        for i in range(n):
            for j in range(n):
                out[:, i, j] = self._fns[i][j](*args)
        sym = 0.5 * (out + np.transpose(out, (0, 2, 1)))
        if not np.allclose(out, sym, rtol=0.0, atol=1e-10 * max(1.0, np.abs(out).max())):
            raise ValueError("metric entries are not symmetric")
        return sym

    def orientation_at(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        m, n = points.shape
        if self._orient is None:
            out = np.zeros((m, n))
            out[:, 0] = 1.0
            return out
        args = [points[:, j] for j in range(n)]
        return np.stack([fn(*args) for fn in self._orient], axis=1)

    def validate(self, points=None, grid: int = 9) -> None:
        """Check Lorentzian signature and a timelike orientation on samples."""
        if points is None:
            points = self.chart.sample_grid(grid)
        gs = self.evaluate(points)
        ors = self.orientation_at(points)
        vals = np.linalg.eigvalsh(gs)
        scale = np.abs(vals).max(axis=1)
        pos = (vals > 1e-9 * scale[:, None]).sum(axis=1)
        neg = (vals < -1e-9 * scale[:, None]).sum(axis=1)
        bad = np.nonzero((pos != 1) | (neg != self.chart.dim - 1))[0]
        if bad.size:
            i = int(bad[0])
            raise ValueError(
                f"metric is not Lorentzian at {points[i]}: "
                f"signature ({pos[i]}, {neg[i]}, {self.chart.dim - pos[i] - neg[i]})"
            )
        qq = np.einsum("mi,mij,mj->m", ors, gs, ors)
        bad = np.nonzero(qq <= 0.0)[0]
        if bad.size:
            i = int(bad[0])
            raise ValueError(f"orientation is not timelike at {points[i]}")


class ExprMap:
    """Coordinate map whose components are expressions; Jacobian by central differences."""

    def __init__(self, names, components, name: str = ""):
        self.names = tuple(names)
        self.name = name
        self._fns = [
            compile_fn(parse(c) if isinstance(c, str) else c, self.names) for c in components
        ]

    @property
    def dim_out(self) -> int:
        return len(self._fns)

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        args = [points[:, j] for j in range(points.shape[1])]
        return np.stack([fn(*args) for fn in self._fns], axis=1)

    def jacobian(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        m, n = points.shape
        out = np.empty((m, self.dim_out, n))
        for j in range(n):
            h = 1e-6 * np.maximum(1.0, np.abs(points[:, j]))
            up = points.copy()
            dn = points.copy()
            up[:, j] += h
            dn[:, j] -= h
            out[:, :, j] = (self.apply(up) - self.apply(dn)) / (2.0 * h)[:, None]
        return out


class LinearMap:
    """Exact linear coordinate map x -> M x."""

    def __init__(self, matrix, name: str = ""):
        self.matrix = np.asarray(matrix, dtype=float)
        self.name = name

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.asarray(points, dtype=float)) @ self.matrix.T

    def jacobian(self, points: np.ndarray) -> np.ndarray:
        m = np.atleast_2d(points).shape[0]
        return np.broadcast_to(self.matrix, (m, *self.matrix.shape)).copy()


class IdentityMap:
    def __init__(self, dim: int):
        self.dim = dim

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.asarray(points, dtype=float))

    def jacobian(self, points: np.ndarray) -> np.ndarray:
        m = np.atleast_2d(points).shape[0]
        return np.broadcast_to(np.eye(self.dim), (m, self.dim, self.dim)).copy()


class ComposedMap:
    """Right-to-left composition: apply ``first``, then ``second``."""

    def __init__(self, first, second):
        self.first = first
        self.second = second

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.second.apply(self.first.apply(points))

    def jacobian(self, points: np.ndarray) -> np.ndarray:
        mid = self.first.apply(points)
        j1 = self.first.jacobian(points)
        j2 = self.second.jacobian(mid)
        return np.einsum("mij,mjk->mik", j2, j1)


@dataclass(frozen=True)
class MappingVerdict:
    outcome: str  # "Causal" | "Anticausal" | "NotCausal" | "Inconclusive"
    min_margin: float
    worst_point: np.ndarray
    orientation_reversed: bool
    samples: int
    note: str


def check_causal_mapping(
    phi,
    source: MetricField,
    target: MetricField,
    grid: int = 41,
    points=None,
    tol: float = 1e-9,
) -> MappingVerdict:
    """Decide whether ``phi`` maps (source) causally into (target) on a sample grid.

    The pullback of the target metric must classify as Future against the
    source metric at every point, allowing margins down to ``-tol`` for
    cone-touching maps; the orientation push-forward fixes the causal
    versus anticausal distinction.
    """
    if points is None:
        points = source.chart.sample_grid(grid)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    images = phi.apply(points)
    g1 = source.evaluate(points)
    g2 = target.evaluate(images)
    jac = phi.jacobian(points)
    pull = np.einsum("mia,mij,mjb->mab", jac, g2, jac)
    or1 = source.orientation_at(points)
    or2 = target.orientation_at(images)
    push = np.einsum("mij,mj->mi", jac, or1)
    side = np.einsum("mi,mij,mj->m", push, g2, or2)

    min_margin = math.inf
    worst = points[0]
    dominated = True
    for i in range(points.shape[0]):
        rep = classify_dp(g1[i], pull[i], orientation=or1[i], tol=tol)
        margin = rep.margin if rep.classification == "Future" else -abs(rep.margin)
        # margins within -tol are boundary passes: maps whose image cones
        # touch the source cones cancel to rounding noise, not to zero
        if rep.classification != "Future" and margin < -tol:
            dominated = False
        if margin < min_margin:
            min_margin = margin
            worst = points[i]
    all_future = bool(np.all(side > 0.0))
    all_past = bool(np.all(side < 0.0))
    if dominated and all_future:
        outcome = "Causal"
    elif dominated and all_past:
        outcome = "Anticausal"
    else:
        outcome = "NotCausal"
    return MappingVerdict(
        outcome=outcome,
        min_margin=float(min_margin),
        worst_point=np.asarray(worst, dtype=float),
        orientation_reversed=all_past,
        samples=points.shape[0],
        note=f"verified on {points.shape[0]} samples",
    )


@dataclass(frozen=True)
class ConformalReport:
    is_conformal: bool
    factor_min: float
    factor_max: float
    max_residual: float
    samples: int


def check_conformal(
    phi,
    source: MetricField,
    target: MetricField,
    grid: int = 41,
    points=None,
    rtol: float = 1e-8,
) -> ConformalReport:
    """Test whether the pullback is a positive multiple of the source metric."""
    if points is None:
        points = source.chart.sample_grid(grid)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    images = phi.apply(points)
    g1 = source.evaluate(points)
    g2 = target.evaluate(images)
    jac = phi.jacobian(points)
    pull = np.einsum("mia,mij,mjb->mab", jac, g2, jac)
    inv = np.linalg.inv(g1)
    factors = np.einsum("mij,mji->m", inv, pull) / source.chart.dim
    resid = pull - factors[:, None, None] * g1
    rel = np.abs(resid).max(axis=(1, 2)) / np.abs(pull).max(axis=(1, 2))
    ok = bool(np.all(factors > 0.0) and np.all(rel <= rtol))
    return ConformalReport(
        is_conformal=ok,
        factor_min=float(factors.min()),
        factor_max=float(factors.max()),
        max_residual=float(rel.max()),
        samples=points.shape[0],
    )


@dataclass(frozen=True)
class ConeBracket:
    theta_minus: float
    theta_plus: float
    valid: bool
    verdict: str  # "isocausal" | "inconclusive"
    eta_minus: np.ndarray | None
    eta_plus: np.ndarray | None
    lower: MappingVerdict | None
    upper: MappingVerdict | None
    samples: int


def minkowski_stability(field: MetricField, grid: int = 41, pad: float = 1e-12) -> ConeBracket:
    """Bracket the null cones of ``field`` between two flat metrics.

    theta_minus and theta_plus are the extreme angles the null cones make
    with the time axis over the sampled chart.  When the bracket stays
    strictly inside (0, pi/2) the field is squeezed between two flat
    metrics, and both bracket mappings are verified explicitly; the verdict
    is then "isocausal" (to the flat space), otherwise "inconclusive".

    Diagonal metrics take an exact path through coefficient ratios, so an
    already-flat field reports theta = pi/4 without rounding.
    """
    pts = field.chart.sample_grid(grid)
    gs = field.evaluate(pts)
    n = field.chart.dim

    offdiag = gs.copy()
    idx = np.arange(n)
    offdiag[:, idx, idx] = 0.0
    if not offdiag.any() and np.all(gs[:, 0, 0] > 0.0):
        diags = gs[:, idx, idx]
        ratios = -diags[:, 1:] / diags[:, :1]
        if np.any(ratios <= 0.0):
            return ConeBracket(0.0, math.pi, False, "inconclusive", None, None, None, None, pts.shape[0])
        c_minus = float(ratios.max())
        c_plus = float(ratios.min())
        theta_minus = math.atan(math.sqrt(1.0 / c_minus))
        theta_plus = math.atan(math.sqrt(1.0 / c_plus))
    else:
        theta_minus = math.inf
        theta_plus = -math.inf
        try:
            for i in range(pts.shape[0]):
                res = cone_angles(gs[i], orientation=field.orientation_at(pts[i])[0])
                theta_minus = min(theta_minus, res.theta_min)
                theta_plus = max(theta_plus, res.theta_max)
        except ValueError:
            return ConeBracket(0.0, math.pi, False, "inconclusive", None, None, None, None, pts.shape[0])
        c_minus = 1.0 / math.tan(theta_minus) ** 2
        c_plus = 1.0 / math.tan(theta_plus) ** 2

    valid = 0.0 < theta_minus <= theta_plus < math.pi
    if not (0.0 < theta_minus <= theta_plus < 0.5 * math.pi):
        return ConeBracket(
            theta_minus, theta_plus, valid, "inconclusive", None, None, None, None, pts.shape[0]
        )

    lo = np.diag([1.0] + [-(c_minus * (1.0 + pad))] * (n - 1))
    hi = np.diag([1.0] + [-(c_plus / (1.0 + pad))] * (n - 1))
    lower_field = MetricField.constant(field.chart, lo, name="flat lower bracket")
    upper_field = MetricField.constant(field.chart, hi, name="flat upper bracket")
    ident = IdentityMap(n)
    lower = check_causal_mapping(ident, lower_field, field, points=pts)
    upper = check_causal_mapping(ident, field, upper_field, points=pts)
    ok = lower.outcome == "Causal" and upper.outcome == "Causal"
    return ConeBracket(
        theta_minus=theta_minus,
        theta_plus=theta_plus,
        valid=valid,
        verdict="isocausal" if ok else "inconclusive",
        eta_minus=lo,
        eta_plus=hi,
        lower=lower,
        upper=upper,
        samples=pts.shape[0],
    )
