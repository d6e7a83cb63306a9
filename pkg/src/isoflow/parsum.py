"""Parallel sums (quasi-projections) of positive semi-definite operators.

For PSD ``A`` and ``B`` the quasi-projection equations

    u - A lam = A c
    (A + B) lam = (B - A) c

determine ``u`` uniquely, and ``u = !(A, B) c`` with

    !(A, B) = 2 A (A + B)^+ B = 2 B (A + B)^+ A.

This is twice the Anderson-Duffin parallel sum ``A:B``; the factor-2 form is
the only one exposed here. ``!(A, B)`` is PSD, its range is
``Range A & Range B`` and its kernel is ``Kernel A + Kernel B``.

Operators may be given as :class:`~isoflow.symspace.SymOperator` or as plain
square arrays (e.g. projectors on R^N); results come back in the same form
as the first operand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, NotProjectorError, SingularError
from .symspace import SymOperator, _pinv_psd, smat, svec


def _coeffs(A) -> np.ndarray:
    C = np.asarray(A, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DimensionError(f"expected a square operator, got shape {C.shape}")
    return C


def _pair(A, B) -> tuple[np.ndarray, np.ndarray]:
    a, b = _coeffs(A), _coeffs(B)
    if a.shape != b.shape:
        raise DimensionError(f"operator size mismatch: {a.shape} vs {b.shape}")
    return a, b


def _like(A, C: np.ndarray):
    return SymOperator(C) if isinstance(A, SymOperator) else C


def parallel_sum(A, B, rank_tol: float | None = None):
    """2 A (A+B)^+ B for PSD ``A``, ``B``."""
    a, b = _pair(A, B)
    S, _ = _pinv_psd(a + b, rank_tol)
    return _like(A, 2.0 * a @ S @ b)


def psd_rank(A, tol: float = 1e-8) -> int:
    """Number of eigenvalues above ``tol * lambda_max``."""
    C = _coeffs(A)
    if C.size == 0:
        return 0
    w = np.linalg.eigvalsh(0.5 * (C + C.T))
    top = max(float(w[-1]), 0.0)
    if top == 0.0:
        return 0
    return int(np.sum(w > tol * top))


def range_projector(A, tol: float = 1e-10):
    """Orthogonal projector onto the span of eigenvectors with eigenvalue above ``tol * lambda_max``."""
    a = _coeffs(A)
    w, V = np.linalg.eigh(0.5 * (a + a.T))
    top = max(float(w[-1]), 0.0) if w.size else 0.0
    Vk = V[:, w > tol * top] if top > 0 else V[:, :0]
    return _like(A, Vk @ Vk.T)


@dataclass(frozen=True)
class QuasiProjectionSolution:
    u: np.ndarray
    lam: np.ndarray
    residual_q1: float
    residual_q2: float


def quasi_project(A, B, c, method: str = "formula",
                  rank_tol: float | None = None) -> QuasiProjectionSolution:
    """Solve the quasi-projection equations for ``u`` and a multiplier ``lam``.

    ``method="formula"`` takes the minimum-norm multiplier
    ``lam = (A+B)^+ (B-A) c`` from the eigendecomposition pseudo-inverse;
    ``method="lstsq"`` solves ``(A+B) lam = (B-A) c`` with an SVD-based
    least-squares routine instead. Both give the same ``u``.

    ``c`` is a symmetric matrix when ``A`` is a :class:`SymOperator`, a
    coordinate vector otherwise; ``u`` and ``lam`` are returned in that form.
    """
    a, b = _pair(A, B)
    as_matrix = isinstance(A, SymOperator) and np.ndim(c) == 2
    cv = svec(c) if as_matrix else np.asarray(c, dtype=float)
    if cv.shape != (a.shape[0],):
        raise DimensionError(f"vector of length {cv.shape} for operator size {a.shape[0]}")

    rhs = (b - a) @ cv
    if method == "formula":
        S, _ = _pinv_psd(a + b, rank_tol)
        lam = S @ rhs
    elif method == "lstsq":
        lam = scipy.linalg.lstsq(a + b, rhs, lapack_driver="gelsd")[0]
    else:
        raise ValueError(f"unknown method {method!r}")
    u = a @ (lam + cv)

    r1 = float(np.linalg.norm(u - a @ lam - a @ cv))
    r2 = float(np.linalg.norm((a + b) @ lam - rhs))
    if as_matrix:
        return QuasiProjectionSolution(smat(u), smat(lam), r1, r2)
    return QuasiProjectionSolution(u, lam, r1, r2)


def harmonic_mean_invertible(A, B):
    """2 (A^-1 + B^-1)^-1 for positive definite ``A``, ``B``."""
    a, b = _pair(A, B)

    def inv(C):
        if np.linalg.cond(C) > 1.0 / np.finfo(float).eps:
            raise SingularError("operator is singular")
        return np.linalg.inv(C)

    H = 2.0 * inv(inv(a) + inv(b))
    return _like(A, 0.5 * (H + H.T))


def congruence_transform(A, M):
    """M A M^T; ``M`` must be invertible."""
    a = _coeffs(A)
    m = _coeffs(M)
    if m.shape != a.shape:
        raise DimensionError(f"congruence matrix {m.shape} vs operator {a.shape}")
    if np.linalg.cond(m) > 1.0 / np.finfo(float).eps:
        raise SingularError("congruence matrix is singular")
    return _like(A, m @ a @ m.T)


def projector_of_map(L, rank_tol: float | None = None) -> np.ndarray:
    """Orthogonal projector L L^+ onto Range L, with L^+ = (L^T L)^+ L^T."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    if L.shape[1] == 0:
        return np.zeros((L.shape[0], L.shape[0]))
    S, _ = _pinv_psd(L.T @ L, rank_tol)
    P = L @ S @ L.T
    return 0.5 * (P + P.T)


def quasi_projector_of_map(L) -> np.ndarray:
    """The PSD map L L^T; same range and kernel as :func:`projector_of_map`."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    return L @ L.T


def check_projector(P, tol: float = 1e-10) -> np.ndarray:
    p = _coeffs(P)
    scale = max(1.0, float(np.max(np.abs(p)))) if p.size else 1.0
    if np.max(np.abs(p - p.T), initial=0.0) > tol * scale:
        raise NotProjectorError("projector is not self-adjoint")
    if np.max(np.abs(p @ p - p), initial=0.0) > tol * scale:
        raise NotProjectorError("projector is not idempotent")
    return p


def intersection_projector(P, Q, rank_tol: float | None = None):
    """!(P, Q) for orthogonal projectors: the projector onto Range P & Range Q."""
    check_projector(P)
    check_projector(Q)
    return parallel_sum(P, Q, rank_tol)


def subspace_intersection_basis(P, Q, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (as columns) of Range P & Range Q.

    Computed as the null space of the stacked matrix ``[I - P; I - Q]``:
    right singular vectors whose singular value is at most ``tol``. The
    cutoff is absolute because projectors have unit scale.
    """
    p, q = check_projector(P), check_projector(Q)
    N = p.shape[0]
    eye = np.eye(N)
    _, s, Vt = np.linalg.svd(np.vstack([eye - p, eye - q]))
    Z = Vt[s <= tol].T
    if Z.shape[1] == 0:
        return Z
    Q_, _ = np.linalg.qr(Z)
    return Q_
