"""Plane-fronted wave metrics: dominance checks, profiles, boundaries.

In adapted coordinates ``(u, v, x1..xd)`` the metrics handled here read

    2 du dv + H(x, u) du^2 - h[u](dx, dx)

with a positive-definite front metric ``h[u]``; the ray direction
``d/dv`` is lightlike.  ``mp_causal_check`` certifies that one such
metric causally dominates another by scanning the anisotropic scalings
``(u, v, x) -> (a k2 u, a k1 v, x)``.  Plane waves, where ``H`` is a
quadratic form with frequency matrix ``A(u)``, additionally get
eigenvalue comparison criteria, a conformal-flatness test, and a report
naming the known conformal-boundary shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import compile_fn, free_vars, parse
from .mapping import (
    Chart,
    ExprMap,
    MappingVerdict,
    MetricField,
    check_causal_mapping,
)

__all__ = [
    "MpWaveSpec",
    "PlaneWaveSpec",
    "FrequencyProfile",
    "MpCheckReport",
    "PolReport",
    "WeylReport",
    "BoundaryReport",
    "metric_field",
    "planewave_to_mp",
    "mp_causal_check",
    "planewave_profile",
    "pol_check",
    "weyl_flatness",
    "boundary_report",
]

# Ratio grid for the k2/k1 scan: dominance depends on the ratio only,
# and for profiles of fixed sign feasibility is monotone in it.
_RATIO_GRID = np.logspace(-6.0, 6.0, 121)

_PROFILE_SAMPLES = 33
_FRONT_SAMPLES = 15


@dataclass(frozen=True)
class MpWaveSpec:
    """Wave metric ``2 du dv + profile du^2 - h[u]`` on an explicit chart.

    ``profile`` is an expression in ``u`` and the front coordinates;
    ``fiber_metric`` holds the d x d entries of ``h`` as expressions in
    the same variables (``v`` never appears).
    """

    profile: str
    fiber_metric: tuple
    fiber_names: tuple = ("x",)
    u_bounds: tuple = (-5.0, 5.0)
    v_bounds: tuple = (-5.0, 5.0)
    fiber_bounds: tuple = ((-5.0, 5.0),)
    name: str = ""

    @property
    def fiber_dim(self) -> int:
        return len(self.fiber_names)

    @property
    def dim(self) -> int:
        return 2 + len(self.fiber_names)


@dataclass(frozen=True)
class PlaneWaveSpec:
    """Plane wave: quadratic profile ``A_ij(u) x^i x^j`` over a flat front.

    ``frequency`` holds the symmetric d x d matrix entries as
    expressions in ``u`` alone; ``h`` is a constant positive-definite
    front metric (identity when omitted).  ``locallySymmetric`` asserts
    the frequency entries are constant.
    """

    frequency: tuple
    h: tuple | None = None
    locallySymmetric: bool = False
    u_bounds: tuple = (-5.0, 5.0)
    name: str = ""

    @property
    def fiber_dim(self) -> int:
        return len(self.frequency)

    @property
    def dim(self) -> int:
        return 2 + len(self.frequency)


@dataclass(frozen=True)
class FrequencyProfile:
    """Eigenvalue summary of a frequency matrix family along ``u``.

    ``signature`` counts (positive, negative, zero) eigenvalues at the
    first sample; ``lam_abs_min``/``lam_abs_max`` hold per-sample
    absolute-eigenvalue extremes, and ``supRatio`` their global spread
    (nan unless the family is definite).  All values are grid estimates.
    """

    u_grid: np.ndarray
    signature: tuple
    signatureConstant: bool
    definiteness: str
    lam_abs_min: np.ndarray
    lam_abs_max: np.ndarray
    supRatio: float
    note: str = ""


@dataclass(frozen=True)
class MpCheckReport:
    """Outcome of a wave dominance check with its verified scaling map."""

    k1: float
    k2: float
    a: float
    ratio: float
    phi: ExprMap
    verdict: MappingVerdict
    note: str = ""


@dataclass(frozen=True)
class PolReport:
    """Two-sided plane-wave comparison through eigenvalue ratio bounds."""

    isocausal: bool
    ratio12: float
    ratio21: float
    forward: MpCheckReport
    reverse: MpCheckReport
    note: str = ""


@dataclass(frozen=True)
class WeylReport:
    """Conformal-curvature components of a constant-frequency plane wave.

    ``isFlat`` is None below dimension four, where the tensor vanishes
    identically and carries no flatness evidence either way.
    """

    components: np.ndarray
    isFlat: bool | None
    lam: float
    note: str = ""


@dataclass(frozen=True)
class BoundaryReport:
    """Conformal-boundary shape of a locally symmetric plane wave."""

    case: str
    isConformallyFlat: bool | None
    eigenvalues: np.ndarray
    lam: float
    chain: str


def metric_field(spec: MpWaveSpec) -> MetricField:
    """Assemble the full Lorentzian metric of ``spec`` on its chart.

    The ``u``/``v`` block is ``[[profile, 1], [1, 0]]`` and the front
    block is ``-h``; the declared future side is the timelike field
    ``d/du + (1 + |profile|) d/dv``, which has positive square at every
    point regardless of the profile's sign.
    """
    d = spec.fiber_dim
    names = ("u", "v") + tuple(spec.fiber_names)
    chart = Chart(names, (tuple(spec.u_bounds), tuple(spec.v_bounds)) + tuple(
        tuple(b) for b in spec.fiber_bounds))
    n = 2 + d
    entries = [["0"] * n for _ in range(n)]
    entries[0][0] = f"({spec.profile})"
    entries[0][1] = entries[1][0] = "1"
    for i in range(d):
        for j in range(d):
            entries[2 + i][2 + j] = f"-({spec.fiber_metric[i][j]})"
    orientation = ("1", f"1 + abs({spec.profile})") + ("0",) * d
    label = spec.name or "wave"
    return MetricField(chart, tuple(tuple(row) for row in entries),
                       orientation=orientation, name=label)


def _front_mesh(spec: MpWaveSpec, n_u: int, n_x: int):
    """Sample points: a u-line and a flattened front grid of shape (m, d)."""
    u = np.linspace(spec.u_bounds[0], spec.u_bounds[1], n_u)
    axes = [np.linspace(lo, hi, n_x) for lo, hi in spec.fiber_bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    front = np.stack([m.ravel() for m in mesh], axis=-1)
    return u, front


def _profile_table(spec: MpWaveSpec, u: np.ndarray, front: np.ndarray) -> np.ndarray:
    """Profile values on the (u, front) product, shape (len(u), len(front))."""
    fn = compile_fn(spec.profile, ("u",) + tuple(spec.fiber_names))
    cols = [front[:, i][None, :] for i in range(front.shape[1])]
    vals = np.asarray(fn(u[:, None], *cols), dtype=float)
    return np.broadcast_to(vals, (u.size, front.shape[0])).copy()


def _front_metric_table(spec: MpWaveSpec, u: np.ndarray, front: np.ndarray) -> np.ndarray:
    """Front metric h at every (u, front) sample, shape (nu, m, d, d)."""
    d = spec.fiber_dim
    names = ("u",) + tuple(spec.fiber_names)
    cols = [front[:, i][None, :] for i in range(d)]
    out = np.empty((u.size, front.shape[0], d, d))
    for i in range(d):
        for j in range(d):
            fn = compile_fn(spec.fiber_metric[i][j], names)
            vals = np.asarray(fn(u[:, None], *cols), dtype=float)
            out[:, :, i, j] = np.broadcast_to(vals, out.shape[:2])
    sym_err = np.max(np.abs(out - np.swapaxes(out, -1, -2)))
    if sym_err > 1e-9 * max(1.0, float(np.max(np.abs(out)))):
        raise ValueError("front metric entries are not symmetric")
    eig = np.linalg.eigvalsh(out.reshape(-1, d, d))
    if float(eig.min()) <= 0.0:
        raise ValueError("front metric must be positive definite at samples")
    return out


def _shared_chart(spec1: MpWaveSpec, spec2: MpWaveSpec) -> None:
    same = (tuple(spec1.fiber_names) == tuple(spec2.fiber_names)
            and tuple(spec1.u_bounds) == tuple(spec2.u_bounds)
            and tuple(spec1.v_bounds) == tuple(spec2.v_bounds)
            and tuple(tuple(b) for b in spec1.fiber_bounds)
            == tuple(tuple(b) for b in spec2.fiber_bounds))
    if not same:
        raise ValueError("the two wave specs must share a chart")


def mp_causal_check(spec1: MpWaveSpec, spec2: MpWaveSpec, grid: int | None = None,
                    tol: float = 1e-9) -> MpCheckReport:
    """Certify a causal map from the ``spec1`` wave into the ``spec2`` wave.

    Scans the ratio r = k2/k1 over a fixed log grid for the profile
    dominance ``r * inf_u H2 >= sup_u H1`` at every sampled front point
    (the two u arguments vary independently, so window extremes are the
    honest grid surrogate), normalizes ``k1 k2 = 1``, and sizes ``a`` by
    the largest generalized eigenvalue of the second front metric
    against the first.  The resulting scaling map is then verified
    sample-by-sample through the mapping engine; dominance failure on
    the grid raises rather than guessing.
    """
    _shared_chart(spec1, spec2)
    u, front = _front_mesh(spec1, _PROFILE_SAMPLES, _FRONT_SAMPLES)
    h1 = _profile_table(spec1, u, front)
    h2 = _profile_table(spec2, u, front)
    sup1 = h1.max(axis=0)
    inf2 = h2.min(axis=0)
    scale = max(1.0, float(np.max(np.abs(h1))), float(np.max(np.abs(h2))))
    slack = _RATIO_GRID[:, None] * inf2[None, :] - sup1[None, :]
    feasible = _RATIO_GRID[slack.min(axis=1) >= -tol * scale]
    if feasible.size == 0:
        raise ValueError(
            "no feasible ratio certifies profile dominance on the grid")
    ratio = float(feasible[np.argmin(np.abs(np.log(feasible)))])
    k2 = math.sqrt(ratio)
    k1 = 1.0 / k2

    g1 = _front_metric_table(spec1, u, front)
    g2 = _front_metric_table(spec2, u, front)
    d = spec1.fiber_dim
    endo = np.linalg.solve(g1.reshape(-1, d, d), g2.reshape(-1, d, d))
    radius = float(np.abs(np.linalg.eigvals(endo)).max())
    if not math.isfinite(radius) or radius <= 0.0:
        raise ValueError("front comparison endomorphism is unbounded on the grid")
    a = math.sqrt(radius)

    names = ("u", "v") + tuple(spec1.fiber_names)
    phi = ExprMap(names, (f"{a * k2!r} * u", f"{a * k1!r} * v")
                  + tuple(spec1.fiber_names))
    if grid is None:
        grid = 13 if spec1.dim <= 3 else 7
    verdict = check_causal_mapping(phi, metric_field(spec1),
                                   metric_field(spec2), grid=grid)
    note = (f"ratio scan over [{_RATIO_GRID[0]:.0e}, {_RATIO_GRID[-1]:.0e}], "
            f"window extremes on {u.size} x {front.shape[0]} samples")
    return MpCheckReport(k1=k1, k2=k2, a=a, ratio=ratio, phi=phi,
                         verdict=verdict, note=note)


def _frequency_table(spec: PlaneWaveSpec, u: np.ndarray) -> np.ndarray:
    d = spec.fiber_dim
    out = np.empty((u.size, d, d))
    for i in range(d):
        for j in range(d):
            fn = compile_fn(spec.frequency[i][j], ("u",))
            out[:, i, j] = np.broadcast_to(np.asarray(fn(u), dtype=float), u.shape)
    scale = max(1.0, float(np.max(np.abs(out))))
    if float(np.max(np.abs(out - np.swapaxes(out, -1, -2)))) > 1e-9 * scale:
        raise ValueError("frequency matrix must be symmetric")
    return out


def planewave_profile(spec: PlaneWaveSpec, u_grid=None) -> FrequencyProfile:
    """Eigenvalue survey of the frequency matrix along a ``u`` grid.

    Reports the signature at each sample (flagging any change), a
    definiteness label, and the per-sample absolute-eigenvalue extremes
    whose global spread bounds the comparison ratios.  Everything is an
    estimate on the grid, not a proof about all of ``u``.
    """
    if u_grid is None:
        u_grid = np.linspace(spec.u_bounds[0], spec.u_bounds[1], 201)
    u = np.asarray(u_grid, dtype=float)
    table = _frequency_table(spec, u)
    d = spec.fiber_dim
    w = np.linalg.eigvalsh(table)
    ztol = 1e-9 * max(1.0, float(np.max(np.abs(w))))
    pos = (w > ztol).sum(axis=1)
    neg = (w < -ztol).sum(axis=1)
    zero = d - pos - neg
    constant = bool(np.all(pos == pos[0]) and np.all(neg == neg[0]))
    signature = (int(pos[0]), int(neg[0]), int(zero[0]))
    if not constant:
        definiteness = "mixed"
    elif signature[0] == d:
        definiteness = "positive"
    elif signature[1] == d:
        definiteness = "negative"
    elif signature[2] > 0:
        definiteness = "degenerate"
    else:
        definiteness = "indefinite"
    absw = np.abs(w)
    lam_abs_min = absw.min(axis=1)
    lam_abs_max = absw.max(axis=1)
    if definiteness in ("positive", "negative"):
        sup_ratio = float(lam_abs_max.max() / lam_abs_min.min())
    else:
        sup_ratio = math.nan
    return FrequencyProfile(
        u_grid=u,
        signature=signature,
        signatureConstant=constant,
        definiteness=definiteness,
        lam_abs_min=lam_abs_min,
        lam_abs_max=lam_abs_max,
        supRatio=sup_ratio,
        note=f"estimated on {u.size} samples",
    )


def planewave_to_mp(spec: PlaneWaveSpec, fiber_halfwidth: float = 3.0,
                    v_bounds: tuple = (-5.0, 5.0)) -> MpWaveSpec:
    """Expand a plane wave into the general wave form on a boxed chart.

    The quadratic profile is written out as an expression; the box size
    is immaterial for dominance of quadratic forms but bounds the
    verification samples.
    """
    d = spec.fiber_dim
    names = tuple(f"x{i + 1}" for i in range(d))
    terms = [f"({spec.frequency[i][j]}) * {names[i]} * {names[j]}"
             for i in range(d) for j in range(d)]
    h = spec.h if spec.h is not None else tuple(
        tuple(float(i == j) for j in range(d)) for i in range(d))
    entries = tuple(tuple(repr(float(h[i][j])) for j in range(d)) for i in range(d))
    return MpWaveSpec(
        profile=" + ".join(terms),
        fiber_metric=entries,
        fiber_names=names,
        u_bounds=tuple(spec.u_bounds),
        v_bounds=tuple(v_bounds),
        fiber_bounds=((-fiber_halfwidth, fiber_halfwidth),) * d,
        name=spec.name or "planewave",
    )


def pol_check(spec1: PlaneWaveSpec, spec2: PlaneWaveSpec, u_grid=None,
              grid: int | None = None) -> PolReport:
    """Two-sided comparison of definite plane waves by eigenvalue ratios.

    Both frequency matrices must be definite with the same sign; the
    pointwise ratio suprema bound the admissible scaling constants, and
    the actual mappings are built and verified in both directions.
    """
    p1 = planewave_profile(spec1, u_grid)
    p2 = planewave_profile(spec2, u_grid)
    for label, prof in (("first", p1), ("second", p2)):
        if prof.definiteness not in ("positive", "negative"):
            raise ValueError(
                f"{label} frequency matrix is {prof.definiteness}; "
                "the ratio criterion needs a definite matrix")
    if p1.definiteness != p2.definiteness:
        raise ValueError("mixed definiteness: the ratio criterion needs "
                         "the same sign on both sides")
    ratio12 = float((p1.lam_abs_max / p2.lam_abs_min).max())
    ratio21 = float((p2.lam_abs_max / p1.lam_abs_min).max())
    forward = mp_causal_check(planewave_to_mp(spec1), planewave_to_mp(spec2),
                              grid=grid)
    reverse = mp_causal_check(planewave_to_mp(spec2), planewave_to_mp(spec1),
                              grid=grid)
    isocausal = (forward.verdict.outcome == "Causal"
                 and reverse.verdict.outcome == "Causal")
    return PolReport(
        isocausal=isocausal,
        ratio12=ratio12,
        ratio21=ratio21,
        forward=forward,
        reverse=reverse,
        note="ratio suprema estimated on the u grid",
    )


def weyl_flatness(Q, n: int) -> WeylReport:
    """Conformal-curvature components of a constant quadratic profile.

    For an n-dimensional wave the only surviving components are
    ``-Q_ij + delta_ij tr(Q) / (n - 2)``; they vanish exactly when Q is
    a multiple of the identity.  Below dimension four the tensor is
    identically zero, which decides nothing, so ``isFlat`` is None.
    """
    Q = np.asarray(Q, dtype=float)
    d = n - 2
    if Q.shape != (d, d):
        raise ValueError(f"Q must be {d} x {d} for dimension {n}")
    scale = max(1.0, float(np.max(np.abs(Q))))
    if float(np.max(np.abs(Q - Q.T))) > 1e-12 * scale:
        raise ValueError("Q must be symmetric")
    lam = float(np.trace(Q) / d)
    if n < 4:
        return WeylReport(
            components=np.zeros((d, d)),
            isFlat=None,
            lam=lam,
            note="conformal curvature vanishes identically below dimension four",
        )
    components = -Q + lam * np.eye(d)
    is_flat = bool(np.max(np.abs(components)) <= 1e-12 * scale)
    note = "proportional to the identity" if is_flat else "nonzero components"
    return WeylReport(components=components, isFlat=is_flat, lam=lam, note=note)


def _constant_frequency(spec: PlaneWaveSpec) -> np.ndarray:
    d = spec.fiber_dim
    Q = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            node = parse(spec.frequency[i][j])
            if free_vars(node):
                raise ValueError(
                    "locally symmetric waves need constant frequency entries; "
                    f"entry ({i}, {j}) depends on {sorted(free_vars(node))}")
            Q[i, j] = float(compile_fn(node, ())())
    return Q


def boundary_report(spec: PlaneWaveSpec) -> BoundaryReport:
    """Name the conformal-boundary shape of a locally symmetric plane wave.

    Negative-definite frequency comes first: such waves are causally
    equivalent to the sign-definite model whatever their conformal
    class, and inherit its completion between two lightlike planes.
    Definite-positive and conformally flat waves close up to a lightlike
    line; any remaining positive eigenvalue forces the one-dimensional
    lightlike boundary known for that family.  Degenerate frequency
    matrices are out of scope and rejected.
    """
    if not spec.locallySymmetric:
        raise ValueError("boundary classification requires a locally "
                         "symmetric wave (constant frequency matrix)")
    Q = _constant_frequency(spec)
    n = spec.dim
    if n < 4:
        raise ValueError("boundary classification needs dimension at least four")
    eig = np.linalg.eigvalsh(Q)
    scale = max(1.0, float(np.max(np.abs(eig))))
    if float(np.min(np.abs(eig))) <= 1e-9 * scale:
        raise ValueError("degenerate frequency matrix: zero eigenvalue")
    weyl = weyl_flatness(Q, n)
    flat = weyl.isFlat
    if bool(np.all(eig < 0.0)):
        case = "SandwichPlanes1B"
        chain = ("composition: isocausal identification with the "
                 "negative-definite model of the same signature, then the "
                 "model's completion bounded by two lightlike planes")
    elif bool(np.all(eig > 0.0)) and flat:
        case = "NullLine1A"
        chain = ("conformal embedding of the isotropic model; the boundary "
                 "degenerates to a lightlike line")
    elif bool(np.any(eig > 0.0)):
        case = "MarolfRossLine"
        chain = ("a positive frequency eigenvalue forces the one-dimensional "
                 "lightlike boundary")
    else:
        case = "Unknown"
        chain = "no classification available for this signature"
    return BoundaryReport(
        case=case,
        isConformallyFlat=flat,
        eigenvalues=eig,
        lam=weyl.lam,
        chain=chain,
    )
