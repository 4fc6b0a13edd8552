"""Ready-made spacetime windows for the grid oracle.

Each fixture names a geometry by what it exhibits, parses optional
parameters from the registry key, and returns a built grid plus any
distinguished node sets (hypersurfaces, probe regions).

Registry keys:

* ``minkowski2``        flat square window
* ``rect:<L>``          flat strip of height L over unit width
* ``cyl:<L>``           flat cylinder of height L, circumference 2*pi
* ``wedge``             slit plane with a tilted, causally continuous cone field
* ``wedge:eta``         the same slit plane with the flat metric
* ``quadrant``          plane minus a closed quadrant, with a half-line surface
* ``slits:<m>``         plane with m half-infinite slits cutting a line into pieces
* ``staircase:<m>``     chain of m overlapping null squares
* ``rotating-cones``    cylinder whose cones turn a full quarter twice per period
* ``drift-trap``        strip whose cones tilt outward, trapping every curve
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import CausalGrid, build_grid, node_index

__all__ = [
    "FunctionMetric2D",
    "Fixture",
    "fixture",
    "fixture_names",
    "wedge_profile",
]


@dataclass
class FunctionMetric2D:
    """Coordinate metric on a 2-d chart given by vectorized callables.

    g_fn(t, x) returns the (..., 2, 2) matrix of components; orient_fn
    the (..., 2) future-pointing timelike field.
    """

    g_fn: object
    orient_fn: object
    name: str = ""

    def evaluate(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.asarray(self.g_fn(pts[..., 0], pts[..., 1]), dtype=float)

    def orientation_at(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.asarray(self.orient_fn(pts[..., 0], pts[..., 1]), dtype=float)


@dataclass
class Fixture:
    name: str
    grid: CausalGrid
    surfaces: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)


def _const_metric(m00, m01, m11, orient, name):
    m = np.array([[m00, m01], [m01, m11]], dtype=float)
    o = np.asarray(orient, dtype=float)

    def g_fn(t, x):
        return np.broadcast_to(m, t.shape + (2, 2)).copy()

    def orient_fn(t, x):
        return np.broadcast_to(o, t.shape + (2,)).copy()

    return FunctionMetric2D(g_fn, orient_fn, name)


# ---------------------------------------------------------------------------
# slit-plane profile


def _phi_exp(x):
    # smooth ramp from 1 at x<=0 to 0 at x>=1 built from exp(-1/x)
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        lo = np.where(x > 0.0, np.exp(-1.0 / np.where(x > 0.0, x, 1.0)), 0.0)
        hi = np.where(x < 1.0, np.exp(-1.0 / np.where(x < 1.0, 1.0 - x, 1.0)), 0.0)
    return hi / (hi + lo)


def _phi_smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)


_PHI = {"exp": _phi_exp, "smoothstep": _phi_smoothstep}


def wedge_profile(u, v, phi="exp", strict=False):
    """Cone-tilting profile for the slit plane.

    Equal to 1 left of the slit and below the first diagonal, to
    (1 + v)/u above the diagonal v = u, and ramped between them along
    the sheaf of rays through (0, -1); the ramp fraction along each ray
    has the closed form s = (u - v)(1 + v)/u.  The formula is total
    (the removed wedge {v >= -u >= 0} falls in the constant-1 branch);
    pass strict=True to raise there instead, e.g. to catch a caller
    whose mask should have excluded those points.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    if strict:
        bad = (u <= 0.0) & (v >= -u)
        if bad.any():
            i = tuple(np.argwhere(bad)[0])
            raise ValueError(
                "profile sampled on the removed wedge at (%.6g, %.6g)" % (u[i], v[i])
            )
    ramp = _PHI[phi]
    pos = u > 0.0
    safe_u = np.where(pos, u, 1.0)
    ratio = (1.0 + v) / safe_u
    s = (u - v) * (1.0 + v) / safe_u
    f = np.ones_like(u)
    f = np.where(pos & (v >= u), ratio, f)
    mid = pos & (v < u) & (v >= np.maximum(u - 1.0, 0.0))
    f = np.where(mid, (ratio - 1.0) * ramp(s * s) + 1.0, f)
    return f


def _wedge_metric(flat, phi):
    if flat:
        def g_fn(u, v):
            out = np.zeros(u.shape + (2, 2))
            out[..., 0, 1] = -1.0
            out[..., 1, 0] = -1.0
            return out

        def orient_fn(u, v):
            out = np.empty(u.shape + (2,))
            out[..., 0] = -1.0
            out[..., 1] = 1.0
            return out

        return FunctionMetric2D(g_fn, orient_fn, "wedge:eta")

    def g_fn(u, v):
        f = wedge_profile(u, v, phi)
        out = np.zeros(u.shape + (2, 2))
        out[..., 0, 0] = 2.0 * f
        out[..., 0, 1] = -1.0
        out[..., 1, 0] = -1.0
        return out

    def orient_fn(u, v):
        f = wedge_profile(u, v, phi)
        out = np.empty(u.shape + (2,))
        out[..., 0] = -1.0
        out[..., 1] = 1.0 - f
        return out

    return FunctionMetric2D(g_fn, orient_fn, "wedge")


# ---------------------------------------------------------------------------
# fixture builders


def _build_minkowski2(shape):
    shape = shape or (81, 81)
    metric = _const_metric(1.0, 0.0, -1.0, (1.0, 0.0), "minkowski2")
    grid = build_grid(metric, ((-1.0, 1.0), (-1.0, 1.0)), shape)
    return Fixture("minkowski2", grid)


def _build_rect(L, shape):
    if shape is None:
        shape = (int(round(201 * L)), 201)
    metric = _const_metric(1.0, 0.0, -1.0, (1.0, 0.0), "rect")
    grid = build_grid(metric, ((0.0, L), (0.0, 1.0)), shape)
    return Fixture("rect:%g" % L, grid, info={"height": L})


def _build_cyl(L, shape):
    if shape is None:
        W = 192
        # keep dt >= dtheta so unit-diagonal steps stay causal
        rows = L * W / (2.0 * np.pi)
        H = int(round(rows)) if abs(rows - round(rows)) < 1e-9 else int(np.floor(rows))
        shape = (max(2, H), W)
    metric = _const_metric(1.0, 0.0, -1.0, (1.0, 0.0), "cyl")
    grid = build_grid(metric, ((0.0, L), (0.0, 2.0 * np.pi)), shape, wrap=True)
    return Fixture("cyl:%g" % L, grid, info={"height": L})


def _build_wedge(flat, shape, phi="exp"):
    shape = shape or (201, 201)
    span = 6.0
    tol = (span / max(shape)) / 4.0

    def mask_fn(U, V):
        return ~((U <= tol) & (V >= -U - tol))

    metric = _wedge_metric(flat, phi)
    grid = build_grid(
        metric, ((-3.0, 3.0), (-3.0, 3.0)), shape, mask_fn=mask_fn
    )
    name = "wedge:eta" if flat else "wedge"
    region = np.zeros(grid.shape, dtype=bool)
    U, V = np.meshgrid(grid.ts, grid.xs, indexing="ij")
    region[(U < -tol) & (V > tol) & (V < -U - tol)] = True
    region &= grid.mask
    return Fixture(name, grid, surfaces={"pocket": region}, info={"tol": tol})


def _build_quadrant(shape):
    shape = shape or (161, 161)
    span = 8.0
    tol = (span / max(shape)) / 4.0

    def mask_fn(T, X):
        return ~((T >= -tol) & (X <= tol))

    metric = _const_metric(1.0, 0.0, -1.0, (1.0, 0.0), "quadrant")
    grid = build_grid(
        metric, ((-4.0, 4.0), (-4.0, 4.0)), shape, mask_fn=mask_fn
    )
    i, _ = node_index(grid, (-1.0, 0.0))
    line = np.zeros(grid.shape, dtype=bool)
    line[i] = grid.mask[i] & (grid.xs < 0.0)
    return Fixture("quadrant", grid, surfaces={"line": line})


def _build_slits(m, shape):
    if m < 1:
        raise ValueError("need at least one slit")
    width = float(m + 1)
    if shape is None:
        shape = (160, int(round(32 * width)))
    tol = max(5.0 / shape[0], width / shape[1]) / 4.0

    def mask_fn(T, X):
        dead = np.zeros(T.shape, dtype=bool)
        for s in range(1, m + 1):
            dead |= (T <= tol) & (X >= s - tol) & (X <= s + 0.5 + tol)
        return ~dead

    metric = _const_metric(1.0, 0.0, -1.0, (1.0, 0.0), "slits")
    grid = build_grid(metric, ((-3.0, 2.0), (0.0, width)), shape, mask_fn=mask_fn)
    i, _ = node_index(grid, (-1.0, 0.0))
    bounds = [(0.0, 1.0)] + [(s + 0.5, s + 1.0) for s in range(1, m + 1)]
    surfaces = {}
    for p, (a, b) in enumerate(bounds):
        piece = np.zeros(grid.shape, dtype=bool)
        piece[i] = grid.mask[i] & (grid.xs > a) & (grid.xs < b)
        surfaces["piece%d" % p] = piece
    return Fixture("slits:%d" % m, grid, surfaces=surfaces, info={"pieces": m + 1})


def _build_staircase(m, shape):
    if m < 1:
        raise ValueError("need at least one square")
    if shape is None:
        n = int(round(24 * (m + 1)))
        shape = (n, n)

    def mask_fn(U, V):
        live = np.zeros(U.shape, dtype=bool)
        for s in range(m):
            live |= (U > s) & (U < s + 2) & (V > -s) & (V < -s + 2)
        return live

    metric = _const_metric(0.0, 1.0, 0.0, (1.0, 1.0), "staircase")
    grid = build_grid(
        metric,
        ((0.0, m + 1.0), (-(m - 1.0), 2.0)),
        shape,
        mask_fn=mask_fn,
    )
    squares = {}
    U, V = np.meshgrid(grid.ts, grid.xs, indexing="ij")
    for s in range(m):
        sq = (U > s) & (U < s + 2) & (V > -s) & (V < -s + 2) & grid.mask
        squares["square%d" % s] = sq
    return Fixture("staircase:%d" % m, grid, surfaces=squares, info={"squares": m})


def _build_rotating_cones(shape):
    shape = shape or (192, 192)

    def g_fn(t, th):
        phi = 0.5 * np.pi * np.sin(t) ** 2
        out = np.empty(t.shape + (2, 2))
        out[..., 0, 0] = -np.sin(2 * phi)
        out[..., 1, 1] = np.sin(2 * phi)
        out[..., 0, 1] = np.cos(2 * phi)
        out[..., 1, 0] = np.cos(2 * phi)
        return out

    def orient_fn(t, th):
        phi = 0.5 * np.pi * np.sin(t) ** 2
        out = np.empty(t.shape + (2,))
        out[..., 0] = np.cos(phi + np.pi / 4)
        out[..., 1] = np.sin(phi + np.pi / 4)
        return out

    metric = FunctionMetric2D(g_fn, orient_fn, "rotating-cones")
    grid = build_grid(
        metric, ((0.0, 2 * np.pi), (0.0, 2 * np.pi)), shape, wrap=True
    )
    return Fixture("rotating-cones", grid)


def _build_drift_trap(shape):
    shape = shape or (240, 120)

    def g_fn(t, x):
        out = np.empty(t.shape + (2, 2))
        out[..., 0, 0] = 1.0 - x * x
        out[..., 0, 1] = -x
        out[..., 1, 0] = -x
        out[..., 1, 1] = -1.0
        return out

    def orient_fn(t, x):
        out = np.empty(t.shape + (2,))
        out[..., 0] = 1.0
        out[..., 1] = -x
        return out

    metric = FunctionMetric2D(g_fn, orient_fn, "drift-trap")
    grid = build_grid(metric, ((-6.0, 6.0), (-3.0, 3.0)), shape)
    return Fixture("drift-trap", grid)


def fixture_names():
    return [
        "minkowski2",
        "rect:<L>",
        "cyl:<L>",
        "wedge",
        "wedge:eta",
        "quadrant",
        "slits:<m>",
        "staircase:<m>",
        "rotating-cones",
        "drift-trap",
    ]


def fixture(name, shape=None, phi="exp"):
    """Build a registered fixture; see the module docstring for keys."""
    head, _, arg = name.partition(":")
    if head == "minkowski2" and not arg:
        return _build_minkowski2(shape)
    if head == "rect" and arg:
        return _build_rect(float(arg), shape)
    if head == "cyl" and arg:
        return _build_cyl(float(arg), shape)
    if head == "wedge":
        if arg == "eta":
            return _build_wedge(True, shape)
        if not arg:
            return _build_wedge(False, shape, phi=phi)
    if head == "quadrant" and not arg:
        return _build_quadrant(shape)
    if head == "slits" and arg:
        return _build_slits(int(arg), shape)
    if head == "staircase" and arg:
        return _build_staircase(int(arg), shape)
    if head == "rotating-cones" and not arg:
        return _build_rotating_cones(shape)
    if head == "drift-trap" and not arg:
        return _build_drift_trap(shape)
    raise ValueError(
        "unknown fixture %r; known keys: %s" % (name, ", ".join(fixture_names()))
    )
