import numpy as np
import pytest

from crosslab.errors import NumericsError
from crosslab.linalg import least_squares, procrustes, svd


def test_svd_identity():
    u, s, v = svd(np.eye(2))
    np.testing.assert_allclose(s, [1.0, 1.0])
    np.testing.assert_allclose(u @ np.diag(s) @ v.T, np.eye(2), atol=1e-14)


def test_svd_permuted_diagonal():
    _, s, _ = svd(np.array([[0.0, 2.0], [1.0, 0.0]]))
    np.testing.assert_allclose(s, [2.0, 1.0], atol=1e-14)


def test_svd_reconstruction_4x3():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(4, 3))
    u, s, v = svd(a)
    assert np.abs(u @ np.diag(s) @ v.T - a).max() <= 1e-10


def test_svd_properties_random():
    rng = np.random.default_rng(1)
    for _ in range(100):
        m = int(rng.integers(1, 17))
        n = int(rng.integers(1, 17))
        a = rng.normal(size=(m, n))
        u, s, v = svd(a)
        r = min(m, n)
        assert u.shape == (m, r) and v.shape == (n, r)
        assert np.abs(u @ np.diag(s) @ v.T - a).max() <= 1e-10
        assert np.abs(u.T @ u - np.eye(r)).max() <= 1e-10
        assert np.abs(v.T @ v - np.eye(r)).max() <= 1e-10
        assert np.all(np.diff(s) <= 1e-12)
        # agree with the reference implementation up to sign conventions
        s_ref = np.linalg.svd(a, compute_uv=False)
        np.testing.assert_allclose(np.sort(s), np.sort(s_ref), atol=1e-10)


def test_svd_rank_deficient_columns_orthonormal():
    a = np.ones((4, 3))
    u, s, v = svd(a)
    assert np.abs(u @ np.diag(s) @ v.T - a).max() <= 1e-10
    assert np.abs(u.T @ u - np.eye(3)).max() <= 1e-10
    assert s[1] == 0.0 and s[2] == 0.0


def test_svd_rejects_nonfinite():
    with pytest.raises(NumericsError):
        svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_least_squares_identity():
    b = np.random.default_rng(2).normal(size=(4, 3))
    res = least_squares(np.eye(3), b)
    np.testing.assert_allclose(res.x, b, atol=1e-12)
    assert not res.rank_deficient


def test_least_squares_invertible_matches_inverse():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(5, 5)) + 5 * np.eye(5)
    b = rng.normal(size=(4, 5))
    res = least_squares(a, b)
    np.testing.assert_allclose(res.x, b @ np.linalg.inv(a), atol=1e-9)


def test_least_squares_rank_deficient_flagged():
    a = np.zeros((3, 2))
    a[:, 0] = [1.0, 2.0, 3.0]
    a[:, 1] = [1.0, 2.0, 3.0]  # duplicate pair columns: rank 1 < 3 rows
    b = np.random.default_rng(4).normal(size=(2, 2))
    res = least_squares(a, b)
    assert res.rank_deficient
    assert np.abs((res.x @ a - b) @ a.T).max() <= 1e-8


def test_least_squares_stationarity_random():
    rng = np.random.default_rng(5)
    for _ in range(100):
        d_s = int(rng.integers(1, 9))
        d_t = int(rng.integers(1, 9))
        p = int(rng.integers(1, 13))
        a = rng.normal(size=(d_s, p))
        b = rng.normal(size=(d_t, p))
        res = least_squares(a, b)
        assert np.abs((res.x @ a - b) @ a.T).max() <= 1e-8


def test_least_squares_column_mismatch():
    with pytest.raises(NumericsError):
        least_squares(np.ones((2, 3)), np.ones((2, 4)))


def test_procrustes_recovers_rotation():
    rng = np.random.default_rng(6)
    dim, pairs = 8, 30
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    h_src = rng.normal(size=(dim, pairs))
    w = procrustes(h_src, q @ h_src)
    assert np.abs(w - q).max() <= 1e-8
    assert np.abs(w.T @ w - np.eye(dim)).max() <= 1e-10
