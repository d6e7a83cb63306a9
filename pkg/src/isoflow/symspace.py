"""Linear algebra on the space of real symmetric matrices.

A symmetric matrix is carried around as a plain ``numpy.ndarray`` of shape
``(n, n)``. Functions that build one mirror the lower triangle so that
``X[i, j] == X[j, i]`` holds bit-for-bit.

Linear maps on Sym(n) are represented as :class:`SymOperator`, an ``N x N``
coefficient matrix (``N = n(n+1)/2``) acting on orthonormal coordinates::

    E_ii                      (i = 1..n)
    (E_ij + E_ji) / sqrt(2)   (i < j)

ordered by diagonal offset: ``(1,1), ..., (n,n), (1,2), (2,3), ..., (1,n)``.
In these coordinates the Frobenius inner product is the dot product, so a
self-adjoint operator has a symmetric coefficient matrix and a PSD operator
has a PSD coefficient matrix.

Indices are 0-based in code; 1-based only in :class:`SparsityPattern`
entries and in text files.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .errors import DimensionError, NotPSDError

SQRT2 = math.sqrt(2.0)
EPS = np.finfo(float).eps


def tri_dim(n: int) -> int:
    """Dimension ``n(n+1)/2`` of Sym(n)."""
    return n * (n + 1) // 2


def order_from_dim(N: int) -> int:
    n = int(round((math.sqrt(8 * N + 1) - 1) / 2))
    if tri_dim(n) != N:
        raise DimensionError(f"{N} is not a triangular number")
    return n


@functools.lru_cache(maxsize=None)
def _index(n: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = [], []
    for k in range(n):
        for i in range(n - k):
            rows.append(i)
            cols.append(i + k)
    r, c = np.array(rows), np.array(cols)
    r.flags.writeable = False
    c.flags.writeable = False
    return r, c


@functools.lru_cache(maxsize=None)
def _weights(n: int) -> np.ndarray:
    r, c = _index(n)
    w = np.where(r == c, 1.0, SQRT2)
    w.flags.writeable = False
    return w


@functools.lru_cache(maxsize=None)
def svec_basis(n: int) -> np.ndarray:
    """Matrix ``U`` (n^2 x N) with orthonormal columns, ``X.ravel() == U @ svec(X)``."""
    r, c = _index(n)
    U = np.zeros((n * n, len(r)))
    for k, (i, j) in enumerate(zip(r, c)):
        if i == j:
            U[i * n + i, k] = 1.0
        else:
            U[i * n + j, k] = U[j * n + i, k] = 1.0 / SQRT2
    U.flags.writeable = False
    return U


def _check_square(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {X.shape}")
    return X


def _check_same(X: np.ndarray, Y: np.ndarray) -> None:
    if X.shape != Y.shape:
        raise DimensionError(f"order mismatch: {X.shape} vs {Y.shape}")


def from_lower(X: np.ndarray) -> np.ndarray:
    """Symmetric matrix whose entries are read from the lower triangle of ``X``."""
    X = _check_square(X)
    L = np.tril(X)
    return L + np.tril(X, -1).T


def as_sym(X, tol: float = 1e-12) -> np.ndarray:
    """Validate near-symmetry (relative ``tol``) and return ``(X + X^T)/2`` mirrored exactly."""
    X = _check_square(X)
    scale = max(1.0, float(np.max(np.abs(X)))) if X.size else 1.0
    if X.size and np.max(np.abs(X - X.T)) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return from_lower(0.5 * (X + X.T))


def random_sym(n: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.standard_normal((n, n))
    return from_lower(G + G.T)


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class SparsityPattern:
    """Symmetric set of 1-based index pairs containing the whole diagonal."""

    n: int
    entries: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("pattern order must be positive")
        entries = frozenset((int(i), int(j)) for i, j in self.entries)
        for i, j in entries:
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"index pair {(i, j)} out of range for n={self.n}")
            if (j, i) not in entries:
                raise ValueError(f"pattern is not symmetric: {(i, j)} without {(j, i)}")
        missing = [i for i in range(1, self.n + 1) if (i, i) not in entries]
        if missing:
            raise ValueError(f"pattern lacks diagonal entries {missing}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_mask(cls, mask) -> "SparsityPattern":
        mask = np.asarray(mask, dtype=bool)
        n = mask.shape[0]
        mask = mask | mask.T | np.eye(n, dtype=bool)
        ii, jj = np.nonzero(mask)
        return cls(n, frozenset(zip((ii + 1).tolist(), (jj + 1).tolist())))

    @classmethod
    def from_matrix(cls, X) -> "SparsityPattern":
        """Nonzero pattern of ``X`` (plus the diagonal)."""
        return cls.from_mask(_check_square(X) != 0)

    @classmethod
    def full(cls, n: int) -> "SparsityPattern":
        return cls.from_mask(np.ones((n, n), dtype=bool))

    @classmethod
    def diagonal(cls, n: int) -> "SparsityPattern":
        return cls.from_mask(np.eye(n, dtype=bool))

    @classmethod
    def banded(cls, n: int, bandwidth: int) -> "SparsityPattern":
        i, j = np.indices((n, n))
        return cls.from_mask(np.abs(i - j) <= bandwidth)

    @classmethod
    def tridiagonal(cls, n: int) -> "SparsityPattern":
        return cls.banded(n, 1)

    @functools.cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.entries:
            m[i - 1, j - 1] = True
        m.flags.writeable = False
        return m

    def contains(self, X) -> bool:
        """True if ``X`` vanishes exactly outside the pattern."""
        X = np.asarray(X)
        return not np.any(X[~self.mask])

    def __len__(self):
        return len(self.entries)


# ---------------------------------------------------------------------------
# matrix operations


def frobenius_inner(X, Y) -> float:
    """Trace(X Y^T)."""
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    _check_same(X, Y)
    return float(np.sum(X * Y))


def commutator(X, Y) -> np.ndarray:
    """XY - YX."""
    X, Y = _check_square(X), _check_square(Y)
    _check_same(X, Y)
    return X @ Y - Y @ X


def svec(X) -> np.ndarray:
    """Orthonormal coordinates of a symmetric matrix (off-diagonals scaled by sqrt 2)."""
    X = _check_square(X)
    r, c = _index(X.shape[0])
    return X[c, r] * _weights(X.shape[0])


def smat(v) -> np.ndarray:
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionError("coordinate vector must be one-dimensional")
    n = order_from_dim(v.size)
    r, c = _index(n)
    X = np.zeros((n, n))
    vals = v / _weights(n)
    X[c, r] = vals
    X[r, c] = vals
    return X


def vech(X) -> np.ndarray:
    """Lower-triangle entries (unscaled), in the same order as :func:`svec`."""
    X = _check_square(X)
    r, c = _index(X.shape[0])
    return X[c, r].copy()


def unvech(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = order_from_dim(v.size)
    r, c = _index(n)
    X = np.zeros((n, n))
    X[c, r] = v
    X[r, c] = v
    return X


def pattern_project(pattern: SparsityPattern, Y) -> np.ndarray:
    """Orthogonal projection of Sym(n) onto Sym(pattern): zero every entry outside it."""
    Y = _check_square(Y)
    if Y.shape[0] != pattern.n:
        raise DimensionError(f"pattern order {pattern.n} vs matrix order {Y.shape[0]}")
    return np.where(pattern.mask, Y, 0.0)


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True, eq=False)
class SymOperator:
    """Linear operator on Sym(n) in orthonormal svec coordinates."""

    coeffs: np.ndarray

    def __post_init__(self):
        C = np.array(self.coeffs, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise DimensionError(f"operator coefficients must be square, got {C.shape}")
        order_from_dim(C.shape[0])
        C.flags.writeable = False
        object.__setattr__(self, "coeffs", C)

    @property
    def N(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n(self) -> int:
        return order_from_dim(self.N)

    def __call__(self, Y) -> np.ndarray:
        return smat(self.coeffs @ svec(Y))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coeffs, dtype=dtype)

    def __matmul__(self, other):
        if isinstance(other, SymOperator):
            return SymOperator(self.coeffs @ other.coeffs)
        return self.coeffs @ other

    def __add__(self, other):
        return SymOperator(self.coeffs + np.asarray(other))

    def __sub__(self, other):
        return SymOperator(self.coeffs - np.asarray(other))

    def __neg__(self):
        return SymOperator(-self.coeffs)

    def __mul__(self, scalar):
        return SymOperator(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    @property
    def T(self) -> "SymOperator":
        return SymOperator(self.coeffs.T)

    def is_self_adjoint(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.coeffs - self.coeffs.T), initial=0.0) <= tol)

    @classmethod
    def identity(cls, n: int) -> "SymOperator":
        return cls(np.eye(tri_dim(n)))

    @classmethod
    def zero(cls, n: int) -> "SymOperator":
        N = tri_dim(n)
        return cls(np.zeros((N, N)))


def operator_from_action(action: Callable[[np.ndarray], np.ndarray], n: int,
                         check: bool = False, rng=None) -> SymOperator:
    """Materialize a linear map on Sym(n) by applying it to every basis element.

    With ``check=True`` linearity is spot-checked on a random pair.
    """
    N = tri_dim(n)
    C = np.empty((N, N))
    for k in range(N):
        e = np.zeros(N)
        e[k] = 1.0
        C[:, k] = svec(action(smat(e)))
    op = SymOperator(C)
    if check:
        rng = np.random.default_rng(rng)
        Y, Z = random_sym(n, rng), random_sym(n, rng)
        a, b = rng.standard_normal(2)
        lhs = svec(action(a * Y + b * Z))
        scale = 1.0 + np.linalg.norm(lhs)
        if np.linalg.norm(lhs - op.coeffs @ svec(a * Y + b * Z)) > 1e-10 * scale:
            raise ValueError("action is not linear on Sym(n)")
    return op


def pattern_operator(pattern: SparsityPattern) -> SymOperator:
    """The masking projector m as a diagonal 0/1 operator."""
    r, c = _index(pattern.n)
    return SymOperator(np.diag(pattern.mask[r, c].astype(float)))


def double_bracket_operator(X) -> SymOperator:
    """The PSD operator Y -> [[Y, X], X] = Y X^2 - 2 X Y X + X^2 Y."""
    X = _check_square(X)
    n = X.shape[0]
    X2 = X @ X
    eye = np.eye(n)
    K = np.kron(X2, eye) + np.kron(eye, X2) - 2.0 * np.kron(X, X)
    U = svec_basis(n)
    C = U.T @ K @ U
    return SymOperator(0.5 * (C + C.T))


# ---------------------------------------------------------------------------
# eigen / pseudo-inverse


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


def sym_eigen(X) -> EigenDecomposition:
    """Eigenvalues in ascending order and orthonormal eigenvectors (LAPACK syevd)."""
    X = _check_square(np.asarray(X))
    try:
        w, V = np.linalg.eigh(X)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"symmetric eigensolver did not converge: {exc}") from exc
    return EigenDecomposition(w, V)


def default_rank_tol(N: int) -> float:
    return N * EPS


def _pinv_psd(C: np.ndarray, rank_tol: float | None = None,
              psd_tol: float = 1e-8) -> tuple[np.ndarray, int]:
    N = C.shape[0]
    if rank_tol is None:
        rank_tol = default_rank_tol(N)
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    lam_max = max(float(w[-1]), 0.0) if N else 0.0
    cutoff = rank_tol * max(1.0, lam_max)
    # tiny negative eigenvalues are rounding noise and get clamped
    if N and w[0] < -psd_tol * lam_max and w[0] < -cutoff:
        raise NotPSDError(f"operator has eigenvalue {w[0]:.3e} (largest {lam_max:.3e})")
    keep = w > cutoff
    Vk = V[:, keep]
    P = (Vk / w[keep]) @ Vk.T
    return 0.5 * (P + P.T), int(keep.sum())


def psd_pseudo_inverse(A, rank_tol: float | None = None):
    """Moore-Penrose inverse of a self-adjoint PSD operator via its eigendecomposition.

    Eigenvalues above ``rank_tol * max(1, lambda_max)`` are inverted, the rest
    are zeroed. ``rank_tol`` defaults to ``N * eps``. Accepts a
    :class:`SymOperator` or a plain square array and returns the same kind.
    """
    C = np.asarray(A, dtype=float)
    P, _ = _pinv_psd(C, rank_tol)
    return SymOperator(P) if isinstance(A, SymOperator) else P


# ---------------------------------------------------------------------------
# text format


def read_matrix(path) -> np.ndarray:
    """Read ``n`` followed by n rows of n numbers; the matrix must be symmetric to 1e-12."""
    tokens = Path(path).read_text().split()
    if not tokens:
        raise ValueError(f"{path}: empty matrix file")
    try:
        n = int(tokens[0])
        vals = [float(t) for t in tokens[1:]]
    except ValueError as exc:
        raise ValueError(f"{path}: malformed matrix file ({exc})") from exc
    if n < 1 or len(vals) != n * n:
        raise ValueError(f"{path}: expected {n}x{n} entries, got {len(vals)}")
    return as_sym(np.array(vals).reshape(n, n))


def format_matrix(X) -> str:
    X = _check_square(X)
    lines = [str(X.shape[0])]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in X]
    return "\n".join(lines) + "\n"


def write_matrix(path, X) -> None:
    Path(path).write_text(format_matrix(X))
