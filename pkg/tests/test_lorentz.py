"""Pointwise Lorentzian linear algebra: signatures, frames, cone angles."""

import math

import numpy as np
import pytest

from isocausal.lorentz import (
    ConeAngles,
    causal_character,
    check_lorentzian,
    cone_angles,
    future_unit_timelike,
    is_future,
    minkowski,
    orthonormal_frame,
    sample_null_cone,
    signature,
)


def random_lorentzian(rng, n, spacelike_slice=True):
    """Random metric A eta A^T with a timelike first axis."""
    while True:
        a = rng.normal(size=(n, n))
        g = a @ minkowski(n) @ a.T
        if g[0, 0] <= 0.1:
            continue
        if spacelike_slice and n > 1 and np.linalg.eigvalsh(g[1:, 1:]).max() >= -0.05:
            continue
        return g


def test_signature_examples():
    assert signature(np.diag([1.0, -1.0, -1.0, -1.0])) == (1, 3, 0)
    assert signature(np.array([[0.0, 1.0], [1.0, 0.0]])) == (1, 1, 0)
    # threshold scales with the spectral radius, so 1e-15 counts as zero
    assert signature(np.diag([1.0, 1e-15])) == (1, 0, 1)
    assert signature(np.diag([-2.0, -3.0])) == (0, 2, 0)


def test_check_lorentzian():
    check_lorentzian(minkowski(3))
    with pytest.raises(ValueError):
        check_lorentzian(np.diag([1.0, 1.0]))
    with pytest.raises(ValueError):
        check_lorentzian(np.array([[1.0, 2.0], [0.0, -1.0]]))


def test_causal_character():
    eta = minkowski(2)
    assert causal_character(eta, [1.0, 0.0]) == "timelike"
    assert causal_character(eta, [1.0, 1.0]) == "null"
    assert causal_character(eta, [0.0, 1.0]) == "spacelike"
    assert causal_character(eta, [1e6, 1e6]) == "null"


def test_is_future():
    eta = minkowski(2)
    up = [1.0, 0.0]
    assert is_future(eta, [1.0, 0.5], up)
    assert not is_future(eta, [-1.0, 0.2], up)
    with pytest.raises(ValueError):
        is_future(eta, [0.0, 1.0], up)
    with pytest.raises(ValueError):
        is_future(eta, [1.0, 0.0], [0.0, 1.0])


def test_orthonormal_frame_reconstructs_eta():
    rng = np.random.default_rng(7)
    for n in (2, 3, 4):
        for _ in range(5):
            g = random_lorentzian(rng, n, spacelike_slice=False)
            orient = None
            frame = orthonormal_frame(g, orientation=orient)
            assert np.allclose(frame.T @ g @ frame, minkowski(n), atol=1e-9)
    g = random_lorentzian(rng, 3, spacelike_slice=False)
    orient = orthonormal_frame(g)[:, 0]
    frame = orthonormal_frame(g, orientation=-orient)
    assert float(frame[:, 0] @ g @ -orient) > 0.0


def test_future_unit_timelike_normalization():
    rng = np.random.default_rng(11)
    g = random_lorentzian(rng, 3, spacelike_slice=False)
    u = orthonormal_frame(g)[:, 0] * 3.7
    uu = future_unit_timelike(g, u)
    assert abs(float(uu @ g @ uu) - 1.0) < 1e-12
    with pytest.raises(ValueError):
        future_unit_timelike(minkowski(2), [0.0, 1.0])


def test_sample_null_cone_residuals_and_orientation():
    rng = np.random.default_rng(3)
    for n in (2, 3, 4):
        g = random_lorentzian(rng, n, spacelike_slice=False)
        u = orthonormal_frame(g)[:, 0]
        ks = sample_null_cone(g, count=128, orientation=u, seed=42)
        scale = np.abs(g).max()
        assert np.abs(np.einsum("ki,ij,kj->k", ks, g, ks)).max() < 1e-11 * scale
        assert np.allclose(ks @ g @ u, 1.0, atol=1e-10)


def test_sample_null_cone_deterministic():
    g = minkowski(3)
    a = sample_null_cone(g, count=16, seed=5)
    b = sample_null_cone(g, count=16, seed=5)
    assert np.array_equal(a, b)


def test_cone_angles_minkowski_exact():
    res = cone_angles(minkowski(2))
    assert res.theta_min == math.pi / 4.0
    assert res.theta_max == math.pi / 4.0
    res3 = cone_angles(minkowski(4))
    assert res3.theta_min == math.pi / 4.0 == res3.theta_max


def test_cone_angles_diagonal():
    res = cone_angles(np.diag([4.0, -1.0]))
    assert res.theta_min == pytest.approx(math.atan(2.0), abs=1e-15)
    res = cone_angles(np.diag([1.0, -4.0]))
    assert res.theta_max == pytest.approx(math.atan(0.5), abs=1e-15)
    res = cone_angles(np.diag([1.0, -1.0, -4.0]))
    assert res.theta_min == pytest.approx(math.atan(0.5), abs=1e-15)
    assert res.theta_max == pytest.approx(math.pi / 4.0, abs=1e-15)
    # extremal directions are null and hit the reported angles
    for v, theta in ((res.dir_min, res.theta_min), (res.dir_max, res.theta_max)):
        assert abs(v @ np.diag([1.0, -1.0, -4.0]) @ v) < 1e-12
        assert math.acos(v[0] / np.linalg.norm(v)) == pytest.approx(theta, abs=1e-12)


def test_cone_angles_cross_term():
    g = np.array([[1.0, 0.5], [0.5, -1.0]])
    res = cone_angles(g)
    lo = math.atan((math.sqrt(5.0) - 1.0) / 2.0)
    hi = math.atan((math.sqrt(5.0) + 1.0) / 2.0)
    assert res.theta_min == pytest.approx(lo, abs=1e-10)
    assert res.theta_max == pytest.approx(hi, abs=1e-10)


def _scan_cone_angles(g, m=200001):
    """Dense-sampling oracle for the extreme axis angles of the null cone."""
    n = g.shape[0]
    frame = orthonormal_frame(g)
    e0 = np.zeros(n)
    e0[0] = 1.0
    if n == 2:
        ks = np.stack([frame[:, 0] + frame[:, 1], frame[:, 0] - frame[:, 1]])
    else:
        phi = np.linspace(0.0, 2.0 * math.pi, m, endpoint=False)
        ks = frame[:, 0] + np.cos(phi)[:, None] * frame[:, 1] + np.sin(phi)[:, None] * frame[:, 2]
    sgn = np.sign(ks @ g @ e0)
    ks = ks * sgn[:, None]
    cosang = ks[:, 0] / np.linalg.norm(ks, axis=1)
    ang = np.arccos(np.clip(cosang, -1.0, 1.0))
    return float(ang.min()), float(ang.max())


def test_cone_angles_match_dense_scan():
    rng = np.random.default_rng(20)
    for n in (2, 3):
        for _ in range(12):
            g = random_lorentzian(rng, n)
            res = cone_angles(g)
            lo, hi = _scan_cone_angles(g)
            assert res.theta_min == pytest.approx(lo, abs=5e-7)
            assert res.theta_max == pytest.approx(hi, abs=5e-7)


def test_cone_angles_scale_invariance():
    rng = np.random.default_rng(4)
    g = random_lorentzian(rng, 3)
    base = cone_angles(g)
    for lam in (0.5, 3.0):
        res = cone_angles(lam * g)
        assert res.theta_min == pytest.approx(base.theta_min, abs=1e-9)
        assert res.theta_max == pytest.approx(base.theta_max, abs=1e-9)


def test_cone_angles_rejects_spacelike_axis():
    with pytest.raises(ValueError):
        cone_angles(np.diag([-1.0, 1.0]))


def test_cone_angles_returns_type():
    assert isinstance(cone_angles(minkowski(2)), ConeAngles)
