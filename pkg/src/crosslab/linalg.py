"""Dense linear algebra for the alignment solve: SVD and least squares.

The SVD is a one-sided Jacobi iteration implemented here in double precision.
Matrices in this repository stay small (anchor dimensions are a few hundred
at most), where Jacobi is both simple and accurate to near machine epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericsError

_MAX_SWEEPS = 60


def _check_matrix(a: np.ndarray, what: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise NumericsError(f"{what} must be a nonempty 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise NumericsError(f"{what} contains non-finite entries")
    return a


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD: returns (U, S, V) with A = U @ diag(S) @ V.T.

    U is (m, r) and V is (n, r) with orthonormal columns, r = min(m, n),
    and S is sorted descending.
    """
    a = _check_matrix(a, "svd input")
    m, n = a.shape
    if m < n:
        v, s, u = svd(a.T)
        return u, s, v

    b = a.copy()
    v = np.eye(n)
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = b[:, p] @ b[:, p]
                beta = b[:, q] @ b[:, q]
                gamma = b[:, p] @ b[:, q]
                if abs(gamma) <= 1e-300 + 5e-16 * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta == 0.0:
                    t = 1.0
                elif abs(zeta) > 1e150:  # avoid zeta*zeta overflow
                    t = 0.5 / zeta
                else:
                    t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                bp = b[:, p].copy()
                b[:, p] = c * bp - s * b[:, q]
                b[:, q] = s * bp + c * b[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break

    sigma = np.sqrt((b * b).sum(axis=0))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    b = b[:, order]
    v = v[:, order]

    u = np.zeros((m, n))
    tiny = max(m, n) * np.finfo(np.float64).eps * (sigma[0] if sigma[0] > 0 else 1.0)
    for j in range(n):
        if sigma[j] > tiny:
            u[:, j] = b[:, j] / sigma[j]
        else:
            sigma[j] = 0.0
            u[:, j] = _orthonormal_completion(u[:, :j], m)
    return u, sigma, v


def _orthonormal_completion(u: np.ndarray, m: int) -> np.ndarray:
    """A unit vector orthogonal to the columns of u (for null singular values)."""
    for k in range(m):
        cand = np.zeros(m)
        cand[k] = 1.0
        if u.shape[1]:
            cand -= u @ (u.T @ cand)
            cand -= u @ (u.T @ cand)  # second pass for orthogonality
        norm = np.sqrt(cand @ cand)
        if norm > 1e-8:
            return cand / norm
    raise NumericsError("failed to complete orthonormal basis")


@dataclass
class LstsqResult:
    x: np.ndarray
    rank: int
    rank_deficient: bool
    max_stationarity: float


def least_squares(a, b) -> LstsqResult:
    """Minimize ||X A - B||_F over X.

    A is (d_s, p), B is (d_t, p) with paired columns. When A has rank below
    its row count the minimum-norm solution is returned and flagged.
    """
    a = _check_matrix(a, "least_squares A")
    b = _check_matrix(b, "least_squares B")
    if a.shape[1] != b.shape[1]:
        raise NumericsError(
            f"column count mismatch: A has {a.shape[1]}, B has {b.shape[1]}")

    u, s, v = svd(a)
    rcond = max(a.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    rank = int((s > rcond).sum())
    s_inv = np.where(s > rcond, 1.0 / np.where(s > 0, s, 1.0), 0.0)
    # X = B V S^+ U^T  (pseudo-inverse of A applied on the right)
    x = (b @ v) * s_inv @ u.T
    residual = x @ a - b
    stationarity = float(np.abs(residual @ a.T).max()) if residual.size else 0.0
    return LstsqResult(x=x, rank=rank, rank_deficient=rank < a.shape[0],
                       max_stationarity=stationarity)


def procrustes(h_src, h_tgt) -> np.ndarray:
    """Orthogonal map W minimizing ||W H_src - H_tgt||_F.

    Both inputs are (dim, pairs) with paired columns; the solution is
    U @ V.T from the SVD of H_tgt @ H_src.T.
    """
    h_src = _check_matrix(h_src, "procrustes H_src")
    h_tgt = _check_matrix(h_tgt, "procrustes H_tgt")
    if h_src.shape != h_tgt.shape:
        raise NumericsError("procrustes inputs must have identical shape")
    u, _, v = svd(h_tgt @ h_src.T)
    return u @ v.T
