"""Dominant-energy classification of symmetric rank-2 tensors.

A symmetric tensor T on a Lorentzian space is called future here when
T(k1, k2) >= 0 for every pair of future null vectors, past when the
reversed inequality holds, and not causal otherwise.  The classifier
works on the associated endomorphism g^{-1} T: either it diagonalizes
with the timelike eigenvalue dominating the absolute values of the rest,
or it carries a double null eigenvector k and splits as A0 + lam * k (x) k
with A0 block-diagonalizable and lam > 0.  Everything else fails.

Margins quantify the slack.  In the diagonalizable case the margin equals
the true infimum of T(k1, k2) over null pairs normalized against the unit
future observer; in the null-eigenvector case it is the parameter distance
min(mu - max|lam_j|, lam); complex eigenvalues report minus the largest
imaginary part.  A sampling oracle measures the pair infimum directly and
is kept as an independent cross-check, never folded into the classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import backend
from .lorentz import check_lorentzian, minkowski, orthonormal_frame

__all__ = [
    "NullDirections",
    "DPReport",
    "OracleReport",
    "StabilityReport",
    "classify_dp",
    "canonical_null_directions",
    "null_oracle",
    "stability_constant",
]

# Eigenvalues closer than this (relative to the spectral scale) are treated
# as one cluster; rank decisions and null checks reuse the same threshold.
_STRUCT_RTOL = 1e-7


@dataclass(frozen=True)
class NullDirections:
    """Future null directions where T(k, k) = 0, normalized to g(k, u) = 1."""

    directions: tuple
    all_directions: bool = False
    continuum: bool = False


@dataclass(frozen=True)
class DPReport:
    classification: str  # "Future" | "Past" | "NotCausal"
    segre: str | None  # "Diagonalizable" | "NullEigenvector" | None
    eigenvalues: tuple
    lambda0: float | None
    null_lambda: float | None
    margin: float
    boundary: bool
    canonical: NullDirections
    witness: np.ndarray | None = None
    witness_value: float | None = None


@dataclass(frozen=True)
class OracleReport:
    min_pair_value: float
    pair: np.ndarray  # shape (2, n), rows normalized to g(k, u) = 1
    min_diag_value: float
    diag_direction: np.ndarray
    samples: int
    seed: int


@dataclass(frozen=True)
class StabilityReport:
    a_weak: float
    a_verified: float
    l1: float
    l2: float
    verified: bool
    samples: int


class _Side:
    """Outcome of the future-side structure analysis in frame coordinates."""

    def __init__(self, kind):
        self.kind = kind  # "diag" | "defective" | "complex" | "type"
        self.margin = None
        self.eigenvalues = ()
        self.lambda0 = None
        self.null_lambda = None
        self.canonical = ([], False, False)
        self.witness_pairs = []


def _eta_adjoint(tf: np.ndarray) -> np.ndarray:
    a = tf.copy()
    a[1:, :] *= -1.0
    return a


def _eta_dot(x: np.ndarray, y: np.ndarray) -> float:
    return float(x[0] * y[0] - x[1:] @ y[1:])


def _normalize_null(k: np.ndarray) -> np.ndarray | None:
    # future normalization eta(k, e0) = k0 = 1
    if abs(k[0]) < 1e-12 * np.abs(k).max():
        return None
    return k / k[0]


def _clusters(vals: np.ndarray, scale: float) -> list[list[int]]:
    order = np.argsort(vals)
    groups = [[int(order[0])]]
    for idx in order[1:]:
        if vals[idx] - vals[groups[-1][-1]] <= _STRUCT_RTOL * scale:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    return groups


def _complex_pair_candidates(vals, vecs):
    """Null directions of each invariant plane carrying complex eigenvalues."""
    out = []
    seen = set()
    for i, lam in enumerate(vals):
        if lam.imag <= 0 or round(lam.real, 9) in seen:
            continue
        seen.add(round(lam.real, 9))
        p = np.real(vecs[:, i])
        q = np.imag(vecs[:, i])
        app, apq, aqq = _eta_dot(p, p), _eta_dot(p, q), _eta_dot(q, q)
        dirs = []
        if abs(aqq) < 1e-12 * max(1.0, abs(app), abs(apq)):
            dirs.append(q)
            if abs(apq) > 1e-12:
                dirs.append(p - (app / (2.0 * apq)) * q)
        else:
            disc = apq * apq - app * aqq
            if disc < 0.0:
                continue
            for s in ((-apq + math.sqrt(disc)) / aqq, (-apq - math.sqrt(disc)) / aqq):
                dirs.append(p + s * q)
        dirs = [d for d in (_normalize_null(d) for d in dirs) if d is not None]
        out.extend((d1, d2) for d1 in dirs for d2 in dirs)
    return out


def _analyze_future(tf: np.ndarray) -> _Side:
    """Structure analysis of the future condition for tf in an orthonormal frame."""
    n = tf.shape[0]
    ahat = _eta_adjoint(tf)
    vals, vecs = np.linalg.eig(ahat)
    scale = max(1.0, float(np.abs(vals).max()))

    if np.abs(vals.imag).max() > _STRUCT_RTOL * scale:
        side = _Side("complex")
        side.margin = -float(np.abs(vals.imag).max())
        side.eigenvalues = tuple(sorted(vals, key=lambda z: (-z.real, -z.imag)))
        side.witness_pairs = _complex_pair_candidates(vals, vecs)
        return side

    rv = vals.real
    groups = _clusters(rv, scale)
    eta = minkowski(n)
    infos = []
    total_defect = 0
    for gidx in groups:
        mu = float(rv[gidx].mean())
        m_a = len(gidx)
        shifted = ahat - mu * np.eye(n)
        _, sv, vt = np.linalg.svd(shifted)
        m_g = int(np.sum(sv <= _STRUCT_RTOL * scale))
        m_g = min(max(m_g, 1), m_a)
        basis = vt[n - m_g:].T
        infos.append({"mu": mu, "m_a": m_a, "m_g": m_g, "basis": basis, "shifted": shifted})
        total_defect += m_a - m_g

    eigs_sorted = tuple(sorted((float(v) for v in rv), reverse=True))

    if total_defect == 0:
        side = _Side("diag")
        side.eigenvalues = eigs_sorted
        # the timelike direction lives in exactly one eigenvalue cluster
        best = None
        for info in infos:
            b = info["basis"]
            w, u = np.linalg.eigh(b.T @ eta @ b)
            if best is None or w[-1] > best[0]:
                best = (w[-1], info, b @ u, w)
        _, tinfo, cvecs, cw = best
        lam0 = tinfo["mu"]
        side.lambda0 = lam0
        spatial = []
        for info in infos:
            copies = info["m_a"] - (1 if info is tinfo else 0)
            spatial.extend([info["mu"]] * copies)
        side.margin = lam0 - max(abs(s) for s in spatial)

        v0 = cvecs[:, -1]
        q0 = _eta_dot(v0, v0)
        if q0 > 0.0:
            v0 = v0 / math.sqrt(q0)
            if v0[0] < 0.0:
                v0 = -v0
            # canonical null directions: spacelike eigendirections inside
            # the timelike cluster saturate T(k, k) = 0
            dirs = []
            d = tinfo["m_a"] - 1
            for j in range(tinfo["m_a"] - 1):
                s = cvecs[:, j]
                qs = _eta_dot(s, s)
                if qs >= 0.0:
                    continue
                s = s / math.sqrt(-qs)
                for sign in (1.0, -1.0):
                    k = _normalize_null(v0 + sign * s)
                    if k is not None:
                        dirs.append(k)
            side.canonical = (dirs, d == n - 1, d >= 2)

            # structural witness pairs against the worst spatial eigenvalue
            if side.margin < 0.0:
                worst = None
                for info in infos:
                    b = info["basis"]
                    w, u = np.linalg.eigh(b.T @ eta @ b)
                    sv = b @ u
                    start = 1 if info is tinfo else 0
                    for j in range(sv.shape[1] - start):
                        s = sv[:, j]
                        qs = _eta_dot(s, s)
                        if qs >= 0.0:
                            continue
                        if worst is None or abs(info["mu"]) > worst[0]:
                            worst = (abs(info["mu"]), s / math.sqrt(-qs))
                if worst is not None:
                    kp = _normalize_null(v0 + worst[1])
                    km = _normalize_null(v0 - worst[1])
                    pairs = []
                    if kp is not None and km is not None:
                        pairs = [(kp, km), (kp, kp), (km, km)]
                    side.witness_pairs = pairs
        return side

    single = [i for i in infos if i["m_a"] - i["m_g"] == 1]
    if total_defect != 1 or len(single) != 1:
        return _Side("type")

    info = single[0]
    mu = info["mu"]
    shifted = info["shifted"]
    # double eigenvector: image of the generalized eigenspace under (A - mu I)
    _, sv2, vt2 = np.linalg.svd(shifted @ shifted)
    w = vt2[n - (info["m_g"] + 1):].T
    img = shifted @ w
    uu, ss, _ = np.linalg.svd(img)
    k = uu[:, 0]
    if abs(_eta_dot(k, k)) > _STRUCT_RTOL * float(k @ k) * scale:
        return _Side("type")
    k = _normalize_null(k if k[0] > 0 else -k)
    if k is None:
        return _Side("type")
    m, *_ = np.linalg.lstsq(shifted, k, rcond=None)
    if np.linalg.norm(shifted @ m - k) > 1e-6 * np.linalg.norm(k):
        return _Side("type")
    c = _eta_dot(k, m)
    if abs(c) < 1e-9:
        return _Side("type")
    lam = (float(m @ tf @ m) - mu * _eta_dot(m, m)) / (c * c)

    side = _Side("defective")
    side.eigenvalues = eigs_sorted
    side.lambda0 = mu
    side.null_lambda = lam
    spatial = []
    for other in infos:
        copies = other["m_a"] - (2 if other is info else 0)
        spatial.extend([other["mu"]] * copies)
    head = mu - max(abs(s) for s in spatial) if spatial else mu
    side.margin = min(head, lam)
    side.canonical = ([k], False, False)
    if lam < 0.0:
        # the opposite null direction of the k plane sees lam directly
        nn = m - (_eta_dot(m, m) / (2.0 * c)) * k
        nn = _normalize_null(nn if nn[0] > 0 else -nn)
        if nn is not None:
            side.witness_pairs = [(nn, nn)]
    return side


# ---------------------------------------------------------------------------
# sampling oracle over null pairs


def _pair_min_exact2(tf: np.ndarray):
    a, b, c = tf[0, 0], tf[0, 1], tf[1, 1]
    best = None
    for w1 in (1.0, -1.0):
        for w2 in (1.0, -1.0):
            val = a + b * (w1 + w2) + c * w1 * w2
            if best is None or val < best[0]:
                best = (val, np.array([w1]), np.array([w2]))
    return best


def _pattern_search(f, w0, step=0.5, min_step=1e-11, max_eval=4000):
    w = w0 / np.linalg.norm(w0)
    fw = f(w)
    evals = 0
    while step > min_step and evals < max_eval:
        improved = False
        for i in range(w.size):
            for s in (step, -step):
                cand = w.copy()
                cand[i] += s
                cand /= np.linalg.norm(cand)
                fc = f(cand)
                evals += 1
                if fc < fw:
                    w, fw = cand, fc
                    improved = True
        if not improved:
            step *= 0.5
    return w, fw


_NUMBA_REFINE = None


def _get_numba_refine():
    global _NUMBA_REFINE
    if _NUMBA_REFINE is None:
        from numba import njit

        @njit(cache=True)
        def _objective(a, b, c, w, mode):
            m = w.shape[0]
            if mode == 0:
                # pair objective: a + b.w - |b + c w|
                lin = a
                for i in range(m):
                    lin += b[i] * w[i]
                s = 0.0
                for i in range(m):
                    gi = b[i]
                    for j in range(m):
                        gi += c[i, j] * w[j]
                    s += gi * gi
                return lin - math.sqrt(s)
            # diag objective: a + 2 b.w + w.c w
            val = a
            for i in range(m):
                val += 2.0 * b[i] * w[i]
                ci = 0.0
                for j in range(m):
                    ci += c[i, j] * w[j]
                val += w[i] * ci
            return val

        @njit(cache=True)
        def _refine(a, b, c, w0, step, min_step, max_eval, mode):
            m = w0.shape[0]
            w = w0.copy()
            nrm = 0.0
            for i in range(m):
                nrm += w[i] * w[i]
            nrm = math.sqrt(nrm)
            for i in range(m):
                w[i] /= nrm
            fw = _objective(a, b, c, w, mode)
            cand = np.empty(m)
            evals = 0
            while step > min_step and evals < max_eval:
                improved = False
                for i in range(m):
                    for s in (step, -step):
                        for j in range(m):
                            cand[j] = w[j]
                        cand[i] += s
                        nrm = 0.0
                        for j in range(m):
                            nrm += cand[j] * cand[j]
                        nrm = math.sqrt(nrm)
                        for j in range(m):
                            cand[j] /= nrm
                        fc = _objective(a, b, c, cand, mode)
                        evals += 1
                        if fc < fw:
                            for j in range(m):
                                w[j] = cand[j]
                            fw = fc
                            improved = True
                if not improved:
                    step *= 0.5
            return w, fw

        _NUMBA_REFINE = _refine
    return _NUMBA_REFINE


def _refine_start(a, b, c, w0, mode):
    """One pattern-search descent; compiled when the backend allows it."""
    if backend() == "numba":
        refine = _get_numba_refine()
        return refine(float(a), np.ascontiguousarray(b), np.ascontiguousarray(c),
                      np.ascontiguousarray(w0), 0.5, 1e-11, 4000, mode)
    if mode == 0:
        def f(w):
            return a + b @ w - np.linalg.norm(b + c @ w)
    else:
        def f(w):
            return a + 2.0 * (b @ w) + w @ c @ w
    return _pattern_search(f, w0)


def _sphere_samples(rng, count, dim):
    w = rng.normal(size=(count, dim))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    return np.vstack([axes, w])


def _pair_min(tf: np.ndarray, samples: int, seed: int, starts: int = 12):
    """(min T(k1,k2), w1, w2) over null pairs k = (1, w), |w| = 1, by exact
    inner minimization over k2 and sampled + refined search over k1."""
    n = tf.shape[0]
    if n == 2:
        return _pair_min_exact2(tf)
    a, b, c = tf[0, 0], tf[0, 1:], tf[1:, 1:]
    rng = np.random.default_rng(seed)
    ws = _sphere_samples(rng, samples, n - 1)
    vals = a + ws @ b - np.linalg.norm(b + ws @ c, axis=1)
    order = np.argsort(vals)[:starts]
    best = (float(vals[order[0]]), ws[order[0]])
    for i in order:
        w, fw = _refine_start(a, b, c, ws[i], 0)
        if fw < best[0]:
            best = (fw, w)
    w1 = best[1]
    grad = b + c @ w1
    gn = np.linalg.norm(grad)
    w2 = -grad / gn if gn > 1e-300 else -w1
    return best[0], w1, w2


def _diag_min(tf: np.ndarray, samples: int, seed: int, starts: int = 12):
    n = tf.shape[0]
    a, b, c = tf[0, 0], tf[0, 1:], tf[1:, 1:]
    if n == 2:
        cands = [np.array([1.0]), np.array([-1.0])]
        vals = [a + 2 * b @ w + w @ c @ w for w in cands]
        i = int(np.argmin(vals))
        return float(vals[i]), cands[i]
    rng = np.random.default_rng(seed + 1)
    ws = _sphere_samples(rng, samples, n - 1)
    vals = a + 2.0 * ws @ b + np.einsum("ij,jk,ik->i", ws, c, ws)
    order = np.argsort(vals)[:starts]
    best = (float(vals[order[0]]), ws[order[0]])
    for i in order:
        w, fw = _refine_start(a, b, c, ws[i], 1)
        if fw < best[0]:
            best = (fw, w)
    return best[0], best[1]


def _lift(frame: np.ndarray, w: np.ndarray) -> np.ndarray:
    k = np.concatenate(([1.0], w))
    return frame @ k


def null_oracle(g, T, orientation=None, samples: int = 4096, seed: int = 42) -> OracleReport:
    """Measured infimum of T(k1, k2) over future null pairs with g(k, u) = 1.

    Independent of :func:`classify_dp`: pure sampling plus deterministic
    refinement, with the minimization over the second leg done in closed
    form.  A future tensor must keep the reported minimum at rounding level
    or above.  The refinement descends on the compiled backend when
    ISOCAUSAL_NUMBA allows it and falls back to the numpy search otherwise;
    the two backends agree to refinement accuracy, not bitwise.
    """
    g = check_lorentzian(g)
    T = np.asarray(T, dtype=float)
    frame = orthonormal_frame(g, orientation=orientation)
    tf = frame.T @ T @ frame
    pv, w1, w2 = _pair_min(tf, samples, seed)
    dv, wd = _diag_min(tf, samples, seed)
    return OracleReport(
        min_pair_value=float(pv),
        pair=np.stack([_lift(frame, w1), _lift(frame, w2)]),
        min_diag_value=float(dv),
        diag_direction=_lift(frame, wd),
        samples=samples,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# classifier


def _map_dirs(frame, canonical) -> NullDirections:
    dirs, all_d, cont = canonical
    return NullDirections(
        directions=tuple(frame @ d for d in dirs),
        all_directions=all_d,
        continuum=cont,
    )


def _tf_value(tf, pair) -> float:
    return float(pair[0] @ tf @ pair[1])


def _pick_witness(tf, side, samples=1024, seed=42):
    best = None
    for k1, k2 in side.witness_pairs:
        val = _tf_value(tf, (k1, k2))
        if best is None or val < best[0]:
            best = (val, k1, k2)
    if best is None or best[0] >= 0.0:
        pv, w1, w2 = _pair_min(tf, samples, seed)
        k1 = np.concatenate(([1.0], w1))
        k2 = np.concatenate(([1.0], w2))
        best = (pv, k1, k2)
    return best


def classify_dp(g, T, orientation=None, tol: float = 1e-9, boundary_tol: float = 1e-6) -> DPReport:
    """Classify a symmetric tensor as Future, Past or NotCausal under g.

    The report carries the algebraic type, the eigenvalues with the timelike
    one identified, the slack margin, a boundary flag when the margin sits
    within ``boundary_tol`` of zero, the canonical null directions for causal
    tensors and a verified violating null pair otherwise.
    """
    g = check_lorentzian(g, tol=tol)
    T = np.asarray(T, dtype=float)
    if not np.allclose(T, T.T, rtol=0.0, atol=1e-10 * max(1.0, np.abs(T).max())):
        raise ValueError("tensor matrix is not symmetric")
    T = 0.5 * (T + T.T)
    frame = orthonormal_frame(g, orientation=orientation)
    tf = frame.T @ T @ frame

    side_f = _analyze_future(tf)
    if side_f.kind == "complex":
        margin = side_f.margin
        val, k1, k2 = _pick_witness(tf, side_f)
        return DPReport(
            classification="NotCausal",
            segre=None,
            eigenvalues=side_f.eigenvalues,
            lambda0=None,
            null_lambda=None,
            margin=margin,
            boundary=abs(margin) <= boundary_tol,
            canonical=NullDirections(()),
            witness=np.stack([frame @ k1, frame @ k2]),
            witness_value=val,
        )

    side_p = _analyze_future(-tf)
    margin_f = side_f.margin if side_f.kind != "type" else _pair_min(tf, 2048, 42)[0]
    margin_p = side_p.margin if side_p.kind != "type" else _pair_min(-tf, 2048, 42)[0]
    segre = {"diag": "Diagonalizable", "defective": "NullEigenvector", "type": None}[side_f.kind]
    eigenvalues = side_f.eigenvalues if side_f.kind != "type" else tuple(
        sorted((float(v) for v in np.linalg.eigvals(_eta_adjoint(tf)).real), reverse=True)
    )

    common = dict(
        segre=segre,
        eigenvalues=eigenvalues,
        lambda0=side_f.lambda0,
        null_lambda=side_f.null_lambda,
    )
    if margin_f >= 0.0:
        return DPReport(
            classification="Future",
            margin=margin_f,
            boundary=abs(margin_f) <= boundary_tol,
            canonical=_map_dirs(frame, side_f.canonical),
            **common,
        )
    if margin_p >= 0.0:
        return DPReport(
            classification="Past",
            margin=margin_p,
            boundary=abs(margin_p) <= boundary_tol,
            canonical=_map_dirs(frame, side_p.canonical),
            **common,
        )
    margin = max(margin_f, margin_p)
    val, k1, k2 = _pick_witness(tf, side_f)
    return DPReport(
        classification="NotCausal",
        margin=margin,
        boundary=abs(margin) <= boundary_tol,
        canonical=NullDirections(()),
        witness=np.stack([frame @ k1, frame @ k2]),
        witness_value=val,
        **common,
    )


def canonical_null_directions(g, T, orientation=None) -> NullDirections:
    """Future null directions k with T(k, k) = 0, for a causal tensor T."""
    return classify_dp(g, T, orientation=orientation).canonical


def stability_constant(
    g,
    omega,
    T,
    orientation=None,
    samples: int = 512,
    nu_steps: int = 21,
    seed: int = 42,
    max_iter: int = 60,
) -> StabilityReport:
    """Constant A making A*omega + T future, for omega positive on the causal cone.

    Causal vectors are scanned as u + nu*e with nu in [0, 1] and e unit
    spacelike; with L1 = inf omega(v, v) > 0 and L2 = inf T(v, v) the value
    A = 2|L2|/L1 guarantees the weak condition, and the returned verified
    constant escalates from there until the dominant classification holds.
    """
    g = check_lorentzian(g)
    frame = orthonormal_frame(g, orientation=orientation)
    of = frame.T @ np.asarray(omega, dtype=float) @ frame
    tf = frame.T @ np.asarray(T, dtype=float) @ frame
    n = g.shape[0]

    rng = np.random.default_rng(seed)
    ws = _sphere_samples(rng, samples, n - 1)
    nus = np.linspace(0.0, 1.0, nu_steps)

    def causal_inf(m):
        a, b, c = m[0, 0], m[0, 1:], m[1:, 1:]
        lin = 2.0 * ws @ b
        quad = np.einsum("ij,jk,ik->i", ws, c, ws)
        vals = a + nus[:, None] * lin[None, :] + (nus**2)[:, None] * quad[None, :]
        return float(vals.min())

    l1 = causal_inf(of)
    l2 = causal_inf(tf)
    if l2 >= 0.0:
        a0 = 0.0
    else:
        if l1 <= 1e-12:
            raise ValueError(
                "reference tensor vanishes somewhere on the causal cone; "
                "a dominating constant does not exist"
            )
        a0 = 2.0 * (-l2) / l1
    a = a0
    verified = False
    for _ in range(max_iter):
        rep = classify_dp(g, a * np.asarray(omega, dtype=float) + np.asarray(T, dtype=float),
                          orientation=orientation)
        if rep.classification == "Future":
            verified = True
            break
        a = a * 1.25 if a > 0.0 else 1e-3
    return StabilityReport(
        a_weak=a0,
        a_verified=a,
        l1=l1,
        l2=l2,
        verified=verified,
        samples=ws.shape[0] * nu_steps,
    )
