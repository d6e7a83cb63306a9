"""Iso-spectral vector fields on Sym(n) and the algebra around their equilibria.

Three flows are provided, all with target ``D`` (``diag(1, ..., n)`` unless
given):

* zero flow   ``X' = 2 m (A.X + m)^+ A.X (D - X)``, where ``A.X`` is the
  double-bracket operator ``Y -> [[Y, X], X]`` and ``m`` masks to the pattern;
* double-bracket flow ``X' = [[D, X], X]``;
* Toda flow ``X' = [X, X_l - X_l^T]``.

The zero flow is the parallel sum ``!(A.X, m)`` applied to ``D - X``, so it
stays tangent to the iso-spectral surface and inside Sym(pattern), and it
does not increase ``f(X) = |X - D|^2 / 2``.

Sign note: with ``[X, Y] = XY - YX`` and ``D = diag(1, ..., n)`` a tridiagonal
``X`` has ``[D, X] = X_l - X_l^T``, hence ``[[D, X], X] = -[X, X_l - X_l^T]``.
The double-bracket field is the *negative* of the Toda field on tridiagonal
matrices under these conventions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import DimensionError
from .symspace import (
    EPS,
    SparsityPattern,
    SymOperator,
    _check_same,
    _check_square,
    _pinv_psd,
    commutator,
    double_bracket_operator,
    from_lower,
    pattern_operator,
    pattern_project,
    smat,
    svec,
    svec_basis,
    sym_eigen,
    tri_dim,
)

FLOW_KINDS = ("zero", "double_bracket", "toda")


def default_target(n: int) -> np.ndarray:
    return np.diag(np.arange(1.0, n + 1.0))


def objective_f(X, D) -> float:
    """(1/2) |X - D|_F^2; its gradient is ``X - D``."""
    X, D = _check_square(X), _check_square(D)
    _check_same(X, D)
    R = X - D
    return 0.5 * float(np.sum(R * R))


def _check_pattern(X: np.ndarray, pattern: SparsityPattern) -> None:
    if pattern.n != X.shape[0]:
        raise DimensionError(f"pattern order {pattern.n} vs matrix order {X.shape[0]}")


def zero_flow_field(X, D, pattern: SparsityPattern, rank_tol: float | None = None,
                    full_output: bool = False):
    """Evaluate the zero flow field ``2 m (A.X + m)^+ A.X (D - X)``.

    Entries outside ``pattern`` are set to exactly zero. When ``A.X + m`` is
    rank deficient the pseudo-inverse truncates; with ``full_output=True``
    the return value is ``(G, singular)`` so the caller can see that.
    """
    X, D = _check_square(X), _check_square(D)
    _check_same(X, D)
    _check_pattern(X, pattern)
    A = double_bracket_operator(X).coeffs
    mvec = np.diag(pattern_operator(pattern).coeffs)
    S, rank = _pinv_psd(A + np.diag(mvec), rank_tol)
    g = 2.0 * mvec * (S @ (A @ svec(D - X)))
    G = pattern_project(pattern, smat(g))
    if full_output:
        return G, rank < A.shape[0]
    return G


def zero_flow_field_dae(X, D, pattern: SparsityPattern) -> np.ndarray:
    """Zero flow through its differential-algebraic form.

    Solves ``(A.X + m) lam = (m - A.X)(D - X)`` by SVD least squares and
    returns ``A.X (lam + D - X)``. Independent of :func:`zero_flow_field`'s
    pseudo-inverse path; used to cross-check it.
    """
    X, D = _check_square(X), _check_square(D)
    _check_same(X, D)
    _check_pattern(X, pattern)
    A = double_bracket_operator(X).coeffs
    M = pattern_operator(pattern).coeffs
    c = svec(D - X)
    lam = scipy.linalg.lstsq(A + M, (M - A) @ c, lapack_driver="gelsd")[0]
    return smat(A @ (lam + c))


def double_bracket_field(X, D) -> np.ndarray:
    """[[D, X], X]."""
    X, D = _check_square(X), _check_square(D)
    _check_same(X, D)
    return from_lower(commutator(commutator(D, X), X))


def strict_lower(X) -> np.ndarray:
    return np.tril(_check_square(X), -1)


def toda_field(X) -> np.ndarray:
    """[X, X_l - X_l^T] with X_l the strictly lower triangle."""
    X = _check_square(X)
    L = strict_lower(X)
    return from_lower(commutator(X, L - L.T))


def sigma_project(X) -> np.ndarray:
    """X_l + X_d + X_l^T: projection onto Sym(n) along strictly upper triangular matrices."""
    return from_lower(_check_square(X))


def staircase_check(pattern: SparsityPattern) -> bool:
    """True if every off-diagonal entry (i, j), i < j, has (i, j-1) and (i+1, j) as well."""
    for i, j in pattern.entries:
        if i < j and ((i, j - 1) not in pattern.entries or (i + 1, j) not in pattern.entries):
            return False
    return True


# ---------------------------------------------------------------------------
# equilibria


@dataclass(frozen=True)
class EquilibriumReport:
    residual: float
    lambda_star: np.ndarray
    commute_norm: float
    pattern_norm: float

    def certified(self, E, D) -> bool:
        """Residual below ``1e-9 (1 + |D| + |E|)``."""
        return self.residual <= equilibrium_threshold(E, D)


def equilibrium_threshold(E, D) -> float:
    return 1e-9 * (1.0 + np.linalg.norm(E) + np.linalg.norm(D))


def equilibrium_residual(E, D, pattern: SparsityPattern) -> EquilibriumReport:
    """Least-squares test of the equilibrium conditions.

    Minimizes ``|[lam + D, E]|^2 + |m(lam + E - D)|^2`` over symmetric ``lam``
    and reports the minimum-norm minimizer. ``E`` is an equilibrium of the
    zero flow iff the minimum is zero.
    """
    E, D = _check_square(E), _check_square(D)
    _check_same(E, D)
    _check_pattern(E, pattern)
    n = E.shape[0]
    eye = np.eye(n)
    U = svec_basis(n)
    mvec = np.diag(pattern_operator(pattern).coeffs)
    # lam -> (vec [lam, E], svec m lam)
    M = np.vstack([(np.kron(eye, E) - np.kron(E, eye)) @ U, np.diag(mvec)])
    b = np.concatenate([commutator(D, E).ravel(), mvec * svec(E - D)])
    lam = scipy.linalg.lstsq(M, -b, lapack_driver="gelsd")[0]
    L = smat(lam)
    cn = float(np.linalg.norm(commutator(L + D, E)))
    pn = float(np.linalg.norm(pattern_project(pattern, L + E - D)))
    return EquilibriumReport(float(np.hypot(cn, pn)), L, cn, pn)


def shader_counterexample(a: float = 1.0, b: float = 2.0, z: float = 2.0):
    """Non-diagonal equilibrium ``E`` of the zero flow with its target and multiplier.

    ``E`` is tridiagonal 3x3 with off-diagonals ``a``, ``b`` and zero
    diagonal; ``D = (z/2) diag(E^2)`` and ``lam = -E + z E^2 - D``.
    Returns ``(E, D, lam)``.
    """
    if a == 0 or b == 0 or z == 0:
        raise ValueError("a, b and z must be nonzero")
    if abs(a) == abs(b):
        raise ValueError("|a| == |b| gives a target with repeated diagonal entries")
    E = np.array([[0.0, a, 0.0], [a, 0.0, b], [0.0, b, 0.0]])
    E2 = E @ E
    D = 0.5 * z * np.diag(np.diag(E2))
    lam = from_lower(-E + z * E2 - D)
    return E, D, lam


def circulant(first_row) -> np.ndarray:
    return scipy.linalg.circulant(first_row).T.copy()


def circulant_kernel_witness() -> tuple[np.ndarray, np.ndarray]:
    """``X = circ(-2, 1, 0, 1)`` and ``Y = circ(0, 0, 1, 0)`` with ``(A.X + m) Y = 0``."""
    X = circulant([-2.0, 1.0, 0.0, 1.0])
    Y = circulant([0.0, 0.0, 1.0, 0.0])
    return X, Y


def genericity_check(D, pattern: SparsityPattern) -> tuple[float, bool]:
    """Smallest eigenvalue of ``A.D + m`` and whether the operator is invertible."""
    D = _check_square(D)
    _check_pattern(D, pattern)
    C = double_bracket_operator(D).coeffs + pattern_operator(pattern).coeffs
    w = sym_eigen(C).values
    N = tri_dim(D.shape[0])
    return float(w[0]), bool(w[0] > N * EPS * max(float(w[-1]), 0.0))


# ---------------------------------------------------------------------------
# flow objects


class ZeroFlow:
    """Callable zero-flow field; counts evaluations that hit a singular ``A.X + m``."""

    def __init__(self, D, pattern: SparsityPattern, rank_tol: float | None = None):
        self.D = _check_square(D)
        self.pattern = pattern
        self.rank_tol = rank_tol
        self.singular_count = 0

    def __call__(self, X) -> np.ndarray:
        G, singular = zero_flow_field(X, self.D, self.pattern, self.rank_tol, full_output=True)
        self.singular_count += singular
        return G


@dataclass
class FlowProblem:
    kind: str
    X0: np.ndarray
    D: np.ndarray | None = None
    pattern: SparsityPattern | None = None
    rank_tol: float | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in FLOW_KINDS:
            raise ValueError(f"unknown flow kind {self.kind!r}; expected one of {FLOW_KINDS}")
        self.X0 = _check_square(self.X0)
        n = self.X0.shape[0]
        self.D = default_target(n) if self.D is None else _check_square(self.D)
        _check_same(self.X0, self.D)
        if self.pattern is None:
            self.pattern = SparsityPattern.from_matrix(self.X0)
        _check_pattern(self.X0, self.pattern)
        if self.kind == "zero" and not self.pattern.contains(self.X0):
            raise ValueError("initial matrix has nonzeros outside the pattern")

    def field(self) -> Callable[[np.ndarray], np.ndarray]:
        if self.kind == "zero":
            return ZeroFlow(self.D, self.pattern, self.rank_tol)
        if self.kind == "double_bracket":
            D = self.D
            return lambda X: double_bracket_field(X, D)
        return toda_field
