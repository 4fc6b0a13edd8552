"""Linear algebra of Lorentzian scalar products on a single tangent space.

Conventions used throughout the package: signature (+, -, ..., -), so a
vector ``v`` is timelike when ``g(v, v) > 0``, and a causal vector is
future-directed when its product with the declared future orientation is
positive.  All routines act on plain numpy arrays representing the metric
at one point; field-level objects live in :mod:`isocausal.mapping`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "minkowski",
    "signature",
    "check_lorentzian",
    "causal_character",
    "is_future",
    "future_unit_timelike",
    "orthonormal_frame",
    "sample_null_cone",
    "ConeAngles",
    "cone_angles",
]


def minkowski(n: int) -> np.ndarray:
    """Flat metric diag(1, -1, ..., -1) in dimension ``n``."""
    if n < 2:
        raise ValueError("need dimension >= 2")
    eta = -np.eye(n)
    eta[0, 0] = 1.0
    return eta


def _as_symmetric(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"metric must be a square matrix, got shape {g.shape}")
    if not np.allclose(g, g.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise ValueError("metric matrix is not symmetric")
    return 0.5 * (g + g.T)


def signature(g: np.ndarray, tol: float = 1e-9) -> tuple[int, int, int]:
    """Counts (positive, negative, zero) of eigenvalues of a symmetric matrix.

    Eigenvalues within ``tol`` times the spectral radius of zero are counted
    as zero, so the threshold tracks the overall scale of the matrix.
    """
    g = _as_symmetric(g)
    vals = np.linalg.eigvalsh(g)
    scale = np.abs(vals).max()
    thr = tol * (scale if scale > 0.0 else 1.0)
    pos = int(np.sum(vals > thr))
    neg = int(np.sum(vals < -thr))
    zero = g.shape[0] - pos - neg
    return pos, neg, zero


def check_lorentzian(g: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Validate signature (1, n-1, 0) and return the symmetrized matrix."""
    g = _as_symmetric(g)
    sig = signature(g, tol=tol)
    n = g.shape[0]
    if sig != (1, n - 1, 0):
        raise ValueError(f"matrix has signature {sig}, expected (1, {n - 1}, 0)")
    return g


def _scales(g: np.ndarray, v: np.ndarray) -> float:
    # Relative scale for deciding when g(v, v) counts as zero.
    gn = np.abs(g).sum(axis=1).max()  # cheap upper bound on the 2-norm
    vn = float(v @ v)
    return gn * vn if gn * vn > 0.0 else 1.0


def causal_character(g: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> str:
    """Classify ``v`` as 'timelike', 'null' or 'spacelike' under ``g``."""
    g = np.asarray(g, dtype=float)
    v = np.asarray(v, dtype=float)
    q = float(v @ g @ v)
    thr = tol * _scales(g, v)
    if q > thr:
        return "timelike"
    if q < -thr:
        return "spacelike"
    return "null"


def is_future(g, v, orientation, tol: float = 1e-9) -> bool:
    """True when the causal vector ``v`` points to the same side as ``orientation``.

    Raises for spacelike ``v``: the question only makes sense on the causal
    cone.  ``orientation`` must be timelike.
    """
    g = np.asarray(g, dtype=float)
    v = np.asarray(v, dtype=float)
    orientation = np.asarray(orientation, dtype=float)
    if causal_character(g, orientation, tol=tol) != "timelike":
        raise ValueError("orientation vector is not timelike")
    if causal_character(g, v, tol=tol) == "spacelike":
        raise ValueError("cannot orient a spacelike vector")
    return float(v @ g @ orientation) > 0.0


def future_unit_timelike(g, orientation=None) -> np.ndarray:
    """Unit future timelike vector: ``orientation`` rescaled to g(u, u) = 1."""
    g = _as_symmetric(g)
    if orientation is None:
        return orthonormal_frame(g)[:, 0]
    u = np.asarray(orientation, dtype=float)
    q = float(u @ g @ u)
    if q <= 0.0:
        raise ValueError("orientation vector is not timelike")
    return u / math.sqrt(q)


def orthonormal_frame(g, orientation=None) -> np.ndarray:
    """Columns e0..e_{n-1} with g(e0,e0)=1, g(ei,ei)=-1, mixed products 0.

    e0 is future-directed with respect to ``orientation`` when one is given;
    otherwise its sign is fixed by making its largest component positive.
    """
    g = check_lorentzian(g)
    vals, vecs = np.linalg.eigh(g)
    # ascending order puts the single positive eigenvalue last
    cols = [vecs[:, -1] / math.sqrt(vals[-1])]
    for i in range(g.shape[0] - 1):
        cols.append(vecs[:, i] / math.sqrt(-vals[i]))
    frame = np.column_stack(cols)
    e0 = frame[:, 0]
    if orientation is not None:
        if float(e0 @ g @ np.asarray(orientation, dtype=float)) < 0.0:
            frame[:, 0] = -e0
    elif e0[np.argmax(np.abs(e0))] < 0.0:
        frame[:, 0] = -e0
    return frame


def sample_null_cone(g, count: int = 256, orientation=None, rng=None, seed=None) -> np.ndarray:
    """Rows are future null vectors k with g(k, u) = 1 for the unit future u.

    Built as k = u + w in an orthonormal frame with |w| = 1 on the spacelike
    sphere, so the null residual is at rounding level and the normalization
    g(k, u) = 1 holds by construction.
    """
    g = _as_symmetric(g)
    frame = orthonormal_frame(g, orientation=orientation)
    n = g.shape[0]
    if rng is None:
        rng = np.random.default_rng(seed)
    w = rng.normal(size=(count, n - 1))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    return frame[:, :1].T + w @ frame[:, 1:].T


@dataclass(frozen=True)
class ConeAngles:
    """Extreme Euclidean angles between the first coordinate axis and the future null cone."""

    theta_min: float
    theta_max: float
    dir_min: np.ndarray
    dir_max: np.ndarray


def _angle(v: np.ndarray) -> float:
    return math.acos(max(-1.0, min(1.0, v[0] / math.sqrt(float(v @ v)))))


def _futurized(v: np.ndarray, g: np.ndarray, orientation: np.ndarray) -> np.ndarray:
    return v if float(v @ g @ orientation) >= 0.0 else -v


def _diagonal_cone_angles(g: np.ndarray) -> ConeAngles:
    # Exact per-axis extrema: tan(theta_i)^2 = g00 / (-gii).
    n = g.shape[0]
    diag = np.diagonal(g)
    tans = np.sqrt(diag[0] / -diag[1:])
    lo = int(np.argmin(tans))
    hi = int(np.argmax(tans))

    def _dir(i: int, t: float) -> np.ndarray:
        v = np.zeros(n)
        v[0] = 1.0
        v[i + 1] = t
        return v

    return ConeAngles(
        theta_min=math.atan(float(tans[lo])),
        theta_max=math.atan(float(tans[hi])),
        dir_min=_dir(lo, float(tans[lo])),
        dir_max=_dir(hi, float(tans[hi])),
    )


def _secular_candidates(vals: np.ndarray, alpha: np.ndarray) -> list[np.ndarray]:
    """Stationary directions y of the axis angle on the null cone, eigenbasis coords.

    Stationarity forces y = (I + w D)^{-1} alpha up to scale, with w a root of
    h(w) = sum_i d_i alpha_i^2 / (1 + w d_i)^2.  Poles sit at w = -1/d_i; the
    root search samples a compactified w axis densely between poles.  When an
    eigenvalue cluster carries no alpha weight the pole itself yields a
    candidate family whose angle does not depend on the in-cluster direction.
    """
    n = vals.size
    weights = alpha**2

    def h(w: float) -> float:
        return float(np.sum(vals * weights / (1.0 + w * vals) ** 2))

    poles = sorted({-1.0 / d for d, a2 in zip(vals, weights) if a2 > 1e-24})
    cuts = [-math.pi / 2.0] + [math.atan(p) for p in poles] + [math.pi / 2.0]
    roots: list[float] = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        ss = np.linspace(a, b, 400)[1:-1]
        ws = np.tan(ss)
        hv = np.array([h(w) for w in ws])
        sign_flip = np.nonzero(np.diff(np.sign(hv)) != 0)[0]
        for j in sign_flip:
            try:
                roots.append(brentq(h, ws[j], ws[j + 1], xtol=1e-14, rtol=1e-15))
            except ValueError:
                pass

    out = []
    for w in roots:
        denom = 1.0 + w * vals
        if np.abs(denom).min() < 1e-12:
            continue
        out.append(alpha / denom)

    # Pole candidates: clusters of eigenvalue d with no alpha weight admit
    # stationary directions at w = -1/d with free in-cluster component z,
    # |z|^2 fixed by the null constraint and the angle independent of z.
    for d in np.unique(vals):
        cluster = np.abs(vals - d) < 1e-12 * max(1.0, np.abs(vals).max())
        if weights[cluster].max() > 1e-24:
            continue
        w = -1.0 / d
        denom = 1.0 + w * vals
        y = np.zeros(n)
        y[~cluster] = alpha[~cluster] / denom[~cluster]
        q = float(np.sum(vals[~cluster] * y[~cluster] ** 2))
        z2 = -q / d
        if z2 <= 0.0:
            continue
        z = np.zeros(n)
        z[np.nonzero(cluster)[0][0]] = math.sqrt(z2)
        out.append(y + z)

    # Limit w -> inf corresponds to y ~ D^{-1} alpha; valid when that vector is null.
    y_inf = alpha / vals
    if abs(float(np.sum(vals * y_inf**2))) <= 1e-10 * float(np.sum(np.abs(vals) * y_inf**2)):
        out.append(y_inf)
    return out


def cone_angles(g, orientation=None) -> ConeAngles:
    """Extreme angles the future null cone makes with the first coordinate axis.

    The first axis must be timelike.  Angles extremize the Euclidean angle
    between the axis and future null directions, which is equivalent to
    ranging over null vectors of the form (axis + e) with e g-orthogonal to
    the axis.  Exact closed form on diagonal metrics, otherwise a secular
    root search over stationary directions.
    """
    g = check_lorentzian(g)
    n = g.shape[0]
    if g[0, 0] <= 0.0:
        raise ValueError("first coordinate axis is not timelike")
    e0 = np.zeros(n)
    e0[0] = 1.0
    if orientation is None:
        orientation = e0
    else:
        orientation = np.asarray(orientation, dtype=float)
        if float(e0 @ g @ orientation) <= 0.0:
            raise ValueError("first coordinate axis is past-directed for this orientation")

    if np.allclose(g, np.diag(np.diagonal(g)), rtol=0.0, atol=0.0):
        return _diagonal_cone_angles(g)

    vals, vecs = np.linalg.eigh(g)
    alpha = vecs.T @ e0
    best: dict[str, tuple[float, np.ndarray]] = {}
    for y in _secular_candidates(vals, alpha):
        v = vecs @ y
        vn2 = float(v @ v)
        if vn2 <= 0.0:
            continue
        residual = abs(float(v @ g @ v))
        if residual > 1e-8 * float(np.abs(vals).max()) * vn2:
            continue
        v = _futurized(v, g, orientation)
        theta = _angle(v)
        if "min" not in best or theta < best["min"][0]:
            best["min"] = (theta, v / np.linalg.norm(v))
        if "max" not in best or theta > best["max"][0]:
            best["max"] = (theta, v / np.linalg.norm(v))
    if not best:
        raise RuntimeError("no stationary null directions found")
    return ConeAngles(
        theta_min=best["min"][0],
        theta_max=best["max"][0],
        dir_min=best["min"][1],
        dir_max=best["max"][1],
    )
