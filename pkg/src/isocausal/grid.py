"""Discrete causal-structure oracle on rectangular and cylindrical grids.

A metric field is sampled at cell-centred nodes, and causal relations
are approximated by edge stacks over sixteen integer offsets (unit
neighbours plus knight moves).  An edge exists when the physical step
lies in the closed future cone at both of its endpoints, so grid
reachability converges to the continuum relations J+/J- as the mesh is
refined.  Chronological sets use the corner rule: a lattice path is
timelike when it contains a strictly timelike edge or null edges along
two different offsets.

All probes return plain reports; nothing here mutates the grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ._kernels import (
    K,
    NEGATION,
    OFFSETS,
    dilate,
    ray_closure,
    reach,
    reverse_edges,
    shift,
)

__all__ = [
    "CausalGrid",
    "build_grid",
    "node_index",
    "node_point",
    "future_set",
    "past_set",
    "diagonal_curve",
    "helix_curve",
    "chain_obstruction",
    "ChainReport",
    "hypersurface_tests",
    "HypersurfaceReport",
    "joinability_matrix",
    "coverage_criterion",
    "CoverageReport",
    "coverage_verdict",
    "imprisonment_probe",
    "ImprisonmentReport",
    "closedness_probe",
    "ClosednessReport",
    "dump_csv",
]


@dataclass
class CausalGrid:
    """Sampled spacetime window with precomputed causal edge stacks.

    ``edges[k]`` marks nodes with a causal (closed-cone) edge along
    ``offsets[k]``; ``interior[k]`` marks the strictly timelike subset.
    Rows are the first coordinate, columns the second; columns wrap
    when ``wrap`` is set (spatially closed universes).
    """

    ts: np.ndarray
    xs: np.ndarray
    dt: float
    dx: float
    wrap: bool
    mask: np.ndarray
    edges: np.ndarray
    interior: np.ndarray
    angles: np.ndarray
    offsets: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.offsets is None:
            self.offsets = OFFSETS.copy()
        self._redges = None
        self._rinterior = None

    @property
    def shape(self):
        return self.mask.shape

    @property
    def redges(self):
        if self._redges is None:
            self._redges = reverse_edges(self.edges, self.wrap)
        return self._redges

    @property
    def rinterior(self):
        if self._rinterior is None:
            self._rinterior = reverse_edges(self.interior, self.wrap)
        return self._rinterior

    def live_count(self):
        return int(self.mask.sum())


def build_grid(metric, domain, shape, wrap=False, mask_fn=None, rtol=1e-9):
    """Sample ``metric`` over ``domain`` and precompute causal edges.

    metric must expose ``evaluate(pts) -> (N, 2, 2)`` and
    ``orientation_at(pts) -> (N, 2)`` for an (N, 2) array of points.
    domain is ((t0, t1), (x0, x1)); shape is (rows, cols).  Nodes sit
    at cell centres, so open-boundary geometry is respected without
    placing nodes on the boundary itself.  mask_fn(T, X) may carve
    holes; the metric is only evaluated at live nodes.

    Raises ValueError when the metric fails to be Lorentzian or the
    orientation fails to be timelike at a live node.
    """
    (t0, t1), (x0, x1) = domain
    H, W = shape
    dt = (t1 - t0) / H
    dx = (x1 - x0) / W
    ts = t0 + (np.arange(H) + 0.5) * dt
    xs = x0 + (np.arange(W) + 0.5) * dx
    T, X = np.meshgrid(ts, xs, indexing="ij")

    if mask_fn is None:
        mask = np.ones((H, W), dtype=bool)
    else:
        mask = np.asarray(mask_fn(T, X), dtype=bool)

    pts = np.column_stack([T[mask], X[mask]])
    g_live = np.asarray(metric.evaluate(pts), dtype=float)
    or_live = np.asarray(metric.orientation_at(pts), dtype=float)

    det = g_live[:, 0, 0] * g_live[:, 1, 1] - g_live[:, 0, 1] ** 2
    if det.size and det.max() >= 0.0:
        bad = int(np.argmax(det))
        raise ValueError(
            "metric cone degenerates at (%.6g, %.6g): det = %.3g"
            % (pts[bad, 0], pts[bad, 1], det[bad])
        )
    onorm = np.einsum("ni,nij,nj->n", or_live, g_live, or_live)
    if onorm.size and onorm.min() <= 0.0:
        bad = int(np.argmin(onorm))
        raise ValueError(
            "orientation fails to be timelike at (%.6g, %.6g)"
            % (pts[bad, 0], pts[bad, 1])
        )

    # Scatter live-node data; dead nodes keep a harmless filler.
    g = np.zeros((H, W, 2, 2))
    g[..., 0, 0], g[..., 1, 1] = 1.0, -1.0
    g[mask] = g_live
    orient = np.zeros((H, W, 2))
    orient[..., 0] = 1.0
    orient[mask] = or_live

    angles = np.full((H, W, 2), np.nan)
    if pts.size:
        evals, evecs = np.linalg.eigh(g_live)
        e_minus = evecs[:, :, 0]
        e_plus = evecs[:, :, 1]
        a = np.sqrt(-evals[:, 0])[:, None] * e_plus
        b = np.sqrt(evals[:, 1])[:, None] * e_minus
        pair = np.empty((len(pts), 2))
        for s, n in enumerate((a + b, a - b)):
            sgn = np.einsum("ni,nij,nj->n", n, g_live, or_live)
            n = np.where(sgn[:, None] < 0, -n, n)
            pair[:, s] = np.arctan2(n[:, 1], n[:, 0])
        pair.sort(axis=1)
        angles[mask] = pair

    edges = np.zeros((K, H, W), dtype=bool)
    interior = np.zeros((K, H, W), dtype=bool)
    gnorm = np.abs(g).sum(axis=(2, 3))
    for k in range(K):
        di, dj = (int(v) for v in OFFSETS[k])
        w0, w1 = di * dt, dj * dx
        q = g[..., 0, 0] * w0 * w0 + 2 * g[..., 0, 1] * w0 * w1 + g[..., 1, 1] * w1 * w1
        gwo = (
            g[..., 0, 0] * w0 * orient[..., 0]
            + g[..., 0, 1] * (w0 * orient[..., 1] + w1 * orient[..., 0])
            + g[..., 1, 1] * w1 * orient[..., 1]
        )
        scale = gnorm * (w0 * w0 + w1 * w1)
        causal_here = (q >= -rtol * scale) & (gwo > 0) & mask
        timelike_here = (q > rtol * scale) & (gwo > 0) & mask

        ok = mask & shift(mask, -di, -dj, wrap)
        if abs(di) == 2:
            mi = di // 2
            ok &= shift(mask, -mi, 0, wrap) & shift(mask, -mi, -dj, wrap)
        elif abs(dj) == 2:
            mj = dj // 2
            ok &= shift(mask, 0, -mj, wrap) & shift(mask, -di, -mj, wrap)
        edges[k] = ok & causal_here & shift(causal_here, -di, -dj, wrap)
        interior[k] = ok & timelike_here & shift(timelike_here, -di, -dj, wrap)

    return CausalGrid(
        ts=ts, xs=xs, dt=dt, dx=dx, wrap=wrap,
        mask=mask, edges=edges, interior=interior, angles=angles,
    )


def node_index(grid, point):
    """Nearest node (i, j) to a physical point (t, x)."""
    t, x = point
    i = int(round((t - grid.ts[0]) / grid.dt))
    j = int(round((x - grid.xs[0]) / grid.dx))
    H, W = grid.shape
    i = min(max(i, 0), H - 1)
    if grid.wrap:
        j %= W
    else:
        j = min(max(j, 0), W - 1)
    return i, j


def node_point(grid, node):
    i, j = node
    return float(grid.ts[i]), float(grid.xs[j])


def _seed_mask(grid, source):
    if isinstance(source, np.ndarray) and source.dtype == bool:
        return source
    seeds = np.zeros(grid.shape, dtype=bool)
    arr = np.asarray(source, dtype=int)
    if arr.ndim == 1:
        arr = arr[None, :]
    seeds[arr[:, 0], arr[:, 1]] = True
    return seeds


def _chrono(grid, seeds, past=False):
    """Chronological reach of the seed set, excluding trivial rest.

    A node enters I when some lattice path from a seed contains a
    strictly timelike edge or changes direction between two null
    offsets; pure single-offset null rays stay out.
    """
    edge_stack = grid.redges if past else grid.edges
    int_stack = grid.rinterior if past else grid.interior
    boundary = edge_stack & ~int_stack

    rays = []
    for k in range(K):
        di, dj = (int(v) for v in OFFSETS[k])
        first = shift(seeds & boundary[k], di, dj, grid.wrap)
        rays.append(ray_closure(boundary[k], first, di, dj, grid.wrap))

    ray_union = np.zeros(grid.shape, dtype=bool)
    for r in rays:
        ray_union |= r
    src = seeds | ray_union

    seeds_i = np.zeros(grid.shape, dtype=bool)
    for k2 in range(K):
        di2, dj2 = (int(v) for v in OFFSETS[k2])
        seeds_i |= shift(src & int_stack[k2], di2, dj2, grid.wrap)
        corner_src = np.zeros(grid.shape, dtype=bool)
        for k, r in enumerate(rays):
            if k != k2:
                corner_src |= r
        seeds_i |= shift(corner_src & boundary[k2], di2, dj2, grid.wrap)

    if not seeds_i.any():
        return seeds_i
    return reach(edge_stack, seeds_i, grid.wrap)


def future_set(grid, source, kind="J"):
    """Grid future of a node, node list, or seed mask.

    kind "J" returns causal reachability (source included); kind "I"
    returns the chronological set (source excluded unless re-entered,
    which only happens on closed timelike lattice loops).
    """
    seeds = _seed_mask(grid, source)
    if kind == "J":
        return reach(grid.edges, seeds, grid.wrap)
    if kind == "I":
        return _chrono(grid, seeds, past=False)
    raise ValueError("kind must be 'J' or 'I'")


def past_set(grid, source, kind="J"):
    seeds = _seed_mask(grid, source)
    if kind == "J":
        return reach(grid.redges, seeds, grid.wrap)
    if kind == "I":
        return _chrono(grid, seeds, past=True)
    raise ValueError("kind must be 'J' or 'I'")


def _strict_future(grid, seeds):
    """J+ seeded one step out, so a set never trivially reaches itself."""
    succ = np.zeros(grid.shape, dtype=bool)
    for k in range(K):
        di, dj = (int(v) for v in OFFSETS[k])
        succ |= shift(seeds & grid.edges[k], di, dj, grid.wrap)
    if not succ.any():
        return succ
    return reach(grid.edges, succ, grid.wrap)


# ---------------------------------------------------------------------------
# curves


def diagonal_curve(grid, c, direction="right"):
    """Full-width null diagonal of a flat rectangle grid.

    The diagonal enters the bottom of the strip at first coordinate
    ``c`` (snapped to the cell-edge lattice so the nodes form an exact
    lattice diagonal), crossing the full second-coordinate width in one
    unit of the first.  direction "right" climbs columns upward,
    "left" starts at the last column.  Curves clipped by the window
    are returned as-is; probes then judge them on their merits.
    """
    H, W = grid.shape
    edge0 = grid.ts[0] - grid.dt / 2
    i0 = int(round((c - edge0) / grid.dt))
    nodes = []
    for s in range(W):
        i = i0 + s
        if 0 <= i < H:
            j = s if direction == "right" else W - 1 - s
            if grid.mask[i, j]:
                nodes.append((i, j))
    return np.array(nodes, dtype=int).reshape(-1, 2)


def helix_curve(grid, beta, phase=None):
    """Winding curve on a cylinder grid: one node per row, the column
    tracking physical slope ``beta`` (second coordinate gained per unit
    of the first), snapped to the nearest column."""
    if not grid.wrap:
        raise ValueError("helix curves need a wrapping grid")
    H, W = grid.shape
    if phase is None:
        phase = float(grid.xs[0])
    nodes = []
    for i in range(H):
        theta = phase + beta * (grid.ts[i] - grid.ts[0])
        j = int(round((theta - grid.xs[0]) / grid.dx)) % W
        if grid.mask[i, j]:
            nodes.append((i, j))
    return np.array(nodes, dtype=int).reshape(-1, 2)


# ---------------------------------------------------------------------------
# probes


@dataclass
class ChainReport:
    feasible: bool
    j: int
    starts: list
    uncovered: int
    chain_violations: int
    note: str


def chain_obstruction(grid, j):
    """Test whether j inextendible causal curves chain across the grid.

    Feasibility means each curve's causal past and future jointly cover
    every live node and each curve lies in the common past of the next
    one.  Candidates are full-width null diagonals with alternating
    winding, placed by a small search over starts and spacings; the
    common-past condition is checked against sampled nodes of the next
    curve (always including its earliest node) with one cell of
    tolerance.
    """
    if j < 1:
        raise ValueError("j must be positive")
    H, W = grid.shape
    height = H * grid.dt
    bases = [0.0, 2 * grid.dt, 5 * grid.dt]
    if j == 1:
        spacings = [0.0]
    else:
        spacings = [(height - 1.0) / (j - 1), 1.0 + 2 * grid.dt, 1.0 + 5 * grid.dt]

    edge0 = grid.ts[0] - grid.dt / 2
    best_unc, best_viol = None, None
    for s in spacings:
        for b in bases:
            curves = []
            for idx in range(j):
                c = edge0 + b + idx * s
                direction = "right" if idx % 2 == 0 else "left"
                curves.append(diagonal_curve(grid, c, direction))
            if any(len(c) == 0 for c in curves):
                continue

            unc_worst = 0
            for cnodes in curves:
                cmask = _seed_mask(grid, cnodes)
                cov = reach(grid.edges, cmask, grid.wrap)
                cov |= reach(grid.redges, cmask, grid.wrap)
                unc = int((grid.mask & ~dilate(cov, 2, grid.wrap)).sum())
                unc_worst = max(unc_worst, unc)

            viol_worst = 0
            for a in range(j - 1):
                nxt = curves[a + 1]
                order = np.argsort(nxt[:, 0])
                picks = [nxt[order[0]]]
                step = max(1, len(nxt) // 7)
                picks.extend(nxt[order[1::step]][:7])
                common = np.ones(grid.shape, dtype=bool)
                for node in picks:
                    common &= reach(grid.redges, _seed_mask(grid, node), grid.wrap)
                down = dilate(common, 1, grid.wrap)
                viol = int(sum(1 for node in curves[a] if not down[node[0], node[1]]))
                viol_worst = max(viol_worst, viol)

            if unc_worst == 0 and viol_worst == 0:
                starts = [float(edge0 + b + idx * s) for idx in range(j)]
                return ChainReport(True, j, starts, 0, 0, "alternating null diagonals")
            if best_unc is None or (unc_worst + viol_worst) < (best_unc + best_viol):
                best_unc, best_viol = unc_worst, viol_worst

    return ChainReport(
        False, j, [], int(best_unc or 0), int(best_viol or 0),
        "no placement of %d alternating diagonals covers and chains" % j,
    )


@dataclass
class HypersurfaceReport:
    acausal: bool
    achronal: bool
    covers: bool
    uncovered: int
    witness: tuple | None


def hypersurface_tests(grid, surface):
    """Acausality, achronality, and past-future coverage of a node set.

    Acausal: no node of the set causally reaches another (or itself
    around a loop).  Achronal: same with chronological reach.  Covers:
    every live node meets the set or its causal past or future, with
    one cell of tolerance; the witness is an uncovered point.
    """
    S = _seed_mask(grid, surface)
    strict = _strict_future(grid, S)
    acausal = not bool((strict & S).any())
    chrono = _chrono(grid, S, past=False)
    achronal = not bool((chrono & S).any())

    cov = reach(grid.edges, S, grid.wrap) | reach(grid.redges, S, grid.wrap)
    uncovered_mask = grid.mask & ~dilate(cov, 1, grid.wrap)
    uncovered = int(uncovered_mask.sum())
    witness = None
    if uncovered:
        ii, jj = np.nonzero(uncovered_mask)
        mid = len(ii) // 2
        witness = node_point(grid, (int(ii[mid]), int(jj[mid])))
    return HypersurfaceReport(acausal, achronal, uncovered == 0, uncovered, witness)


def joinability_matrix(grid, pieces):
    """Symmetric boolean matrix: entry (a, b) marks a causal curve
    meeting both piece a and piece b (diagonal: self-causality)."""
    masks = [_seed_mask(grid, p) for p in pieces]
    stricts = [_strict_future(grid, m) for m in masks]
    m = len(pieces)
    out = np.zeros((m, m), dtype=bool)
    for a in range(m):
        for b in range(m):
            if (stricts[a] & masks[b]).any():
                out[a, b] = True
                out[b, a] = True
    return out


@dataclass
class CoverageReport:
    kind: str
    coversJ: bool
    coversClosureJ: bool
    uncovered: int
    uncovered_closure: int
    verdict: str


def coverage_criterion(grid, curve, kind):
    """Does the causal past and future of a curve cover the grid?

    coversJ asks for every live node exactly; coversClosureJ allows one
    cell of slack, the grid stand-in for passing to closures.  kind
    simply labels the probe ("timelike" or "null") for reporting.
    """
    cmask = _seed_mask(grid, curve)
    cov = reach(grid.edges, cmask, grid.wrap)
    cov |= reach(grid.redges, cmask, grid.wrap)
    unc = int((grid.mask & ~cov).sum())
    unc_closure = int((grid.mask & ~dilate(cov, 1, grid.wrap)).sum())
    covers_j = unc == 0
    covers_closure = unc_closure == 0
    verdict = "covers" if covers_j else ("closure-covers" if covers_closure else "fails")
    return CoverageReport(kind, covers_j, covers_closure, unc, unc_closure, verdict)


def coverage_verdict(timelike_report, null_report):
    """Fold a timelike and a null coverage probe into one classifier."""
    if timelike_report.coversJ:
        return "timelike-covers"
    if null_report.coversClosureJ:
        return "lightlike-closure-covers-only"
    return "neither"


@dataclass
class ImprisonmentReport:
    imprisoned: bool
    membranes: list
    band: tuple | None
    max_reached_t: float | None


def imprisonment_probe(grid):
    """Detect rows that trap future-directed lattice curves.

    A membrane row has live nodes but no future edge gaining height.
    With two membrane clusters, curves released just above the lower
    cluster are followed; imprisonment means their whole future stays
    at or below the top of the upper cluster.
    """
    H, W = grid.shape
    up_ok = np.zeros(H, dtype=bool)
    for k in range(K):
        if OFFSETS[k][0] > 0:
            up_ok |= grid.edges[k].any(axis=1)
    live_rows = grid.mask.any(axis=1)
    membrane = live_rows & ~up_ok
    # the top row cannot have an up edge; that is truncation, not trapping
    membrane[H - 1] = False

    clusters = []
    i = 0
    while i < H:
        if membrane[i]:
            a = i
            while i + 1 < H and membrane[i + 1]:
                i += 1
            clusters.append((a, i))
        i += 1
    spans = [(float(grid.ts[a]), float(grid.ts[b])) for a, b in clusters]

    if len(clusters) < 2:
        return ImprisonmentReport(False, spans, None, None)

    lower_top = clusters[0][1]
    upper_top = clusters[-1][1]
    seed_row = lower_top + 1
    while seed_row < H and not grid.mask[seed_row].any():
        seed_row += 1
    if seed_row >= H:
        return ImprisonmentReport(False, spans, None, None)

    seeds = np.zeros((H, W), dtype=bool)
    seeds[seed_row] = grid.mask[seed_row]
    fut = reach(grid.edges, seeds, grid.wrap)
    escaped = fut[upper_top + 1 :].any() if upper_top + 1 < H else False
    rows = np.nonzero(fut.any(axis=1))[0]
    max_t = float(grid.ts[rows.max()]) if len(rows) else None
    band = (float(grid.ts[seed_row]), float(grid.ts[upper_top]))
    return ImprisonmentReport(not bool(escaped), spans, band, max_t)


@dataclass
class ClosednessReport:
    closed: bool
    gap_plus: float
    gap_minus: float
    jump_plus: float
    jump_minus: float
    point: tuple


def closedness_probe(grid, point, tol_fraction=0.005):
    """Probe outer continuity of the causal sets at a point.

    Two symptoms are checked in both time directions: the causal set
    leaking beyond the one-cell closure of the chronological set, and a
    jump under perturbation, where the causal set of an adjacent
    in-neighbour exceeds the two-cell closure of the causal set at the
    point by more than ``tol_fraction`` of the live nodes.  Verdict
    closed requires all four fractions under the tolerance.
    """
    p = node_index(grid, point)
    if not grid.mask[p]:
        raise ValueError("probe point (%.6g, %.6g) is not a live node" % point)
    live = grid.live_count()
    pmask = _seed_mask(grid, p)

    jp = reach(grid.edges, pmask, grid.wrap)
    jm = reach(grid.redges, pmask, grid.wrap)
    ip = _chrono(grid, pmask, past=False)
    im = _chrono(grid, pmask, past=True)
    gap_p = int((jp & ~dilate(ip, 1, grid.wrap) & ~pmask).sum()) / live
    gap_m = int((jm & ~dilate(im, 1, grid.wrap) & ~pmask).sum()) / live

    jp_fat = dilate(jp, 2, grid.wrap)
    jm_fat = dilate(jm, 2, grid.wrap)
    H, W = grid.shape
    jump_p = 0.0
    jump_m = 0.0
    for k in range(K):
        di, dj = (int(v) for v in OFFSETS[k])
        qi, qj = p[0] - di, p[1] - dj
        if grid.wrap:
            qj %= W
        if 0 <= qi < H and 0 <= qj < W and grid.edges[k][qi, qj]:
            excess = reach(grid.edges, _seed_mask(grid, (qi, qj)), grid.wrap) & ~jp_fat
            jump_p = max(jump_p, int(excess.sum()) / live)
        if grid.edges[k][p]:
            ri, rj = p[0] + di, p[1] + dj
            if grid.wrap:
                rj %= W
            if 0 <= ri < H and 0 <= rj < W:
                excess = reach(grid.redges, _seed_mask(grid, (ri, rj)), grid.wrap) & ~jm_fat
                jump_m = max(jump_m, int(excess.sum()) / live)

    closed = max(gap_p, gap_m, jump_p, jump_m) <= tol_fraction
    return ClosednessReport(
        closed, gap_p, gap_m, jump_p, jump_m, node_point(grid, p)
    )


def dump_csv(grid, path):
    """Write per-node records: indices, coordinates, liveness, and the
    two future null-cone angles (radians; nan on dead nodes)."""
    H, W = grid.shape
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "t", "x", "mask", "coneAngle1", "coneAngle2"])
        for i in range(H):
            for j in range(W):
                writer.writerow(
                    [
                        i,
                        j,
                        "%.9g" % grid.ts[i],
                        "%.9g" % grid.xs[j],
                        int(grid.mask[i, j]),
                        "%.9g" % grid.angles[i, j, 0],
                        "%.9g" % grid.angles[i, j, 1],
                    ]
                )
