"""Seeded property suites for parallel sums and flow identities.

Each suite returns a list of :class:`Check` records (largest observed error
against a fixed tolerance). ``isoflow selftest`` runs all of them.

Random PSD operators are ``F diag(s) F^T`` with ``F`` an orthonormal frame
and ``s`` uniform in [0.5, 1.5]; ranges of a pair share a random common
subspace, so intersections of every dimension occur. Keeping the operators
well conditioned on their ranges means the tolerances measure the
identities, not the conditioning of a random draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import parsum
from .parsum import parallel_sum
from .flows import (
    default_target,
    double_bracket_field,
    strict_lower,
    toda_field,
    zero_flow_field,
    zero_flow_field_dae,
)
from .integrate import IntegratorConfig, rk45_integrate
from .symspace import (
    SparsityPattern,
    commutator,
    frobenius_inner,
    psd_pseudo_inverse,
    random_sym,
)

SYM_DIMS = (1, 3, 6, 10, 15, 21)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    count: int = 1

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3e} <= {self.tol:.1e} ({self.count} cases)"


def random_orthogonal(rng: np.random.Generator, N: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((N, N)))
    return Q * np.sign(np.diag(R))


def random_psd(rng: np.random.Generator, G: np.ndarray) -> np.ndarray:
    """PSD operator with range span(G) and nonzero eigenvalues in [0.5, 1.5]."""
    N = G.shape[0]
    if G.shape[1] == 0:
        return np.zeros((N, N))
    F, _ = np.linalg.qr(G)
    s = rng.uniform(0.5, 1.5, F.shape[1])
    return (F * s) @ F.T


def random_psd_pair(rng: np.random.Generator, N: int):
    """PSD pair sharing a random subspace; returns ``(A, B, shared_dim)``."""
    s = int(rng.integers(0, N + 1))
    ka = int(rng.integers(s, N + 1))
    kb = int(rng.integers(s, N + 1))
    S = random_orthogonal(rng, N)[:, :s]
    A = random_psd(rng, np.hstack([S, rng.standard_normal((N, ka - s))]))
    B = random_psd(rng, np.hstack([S, rng.standard_normal((N, kb - s))]))
    return A, B, s


def random_congruence(rng: np.random.Generator, N: int) -> np.ndarray:
    """Invertible matrix with singular values in [0.5, 2]."""
    s = rng.uniform(0.5, 2.0, N)
    return random_orthogonal(rng, N) @ np.diag(s) @ random_orthogonal(rng, N)


def parallel_sum_suite(n_pairs: int = 200, seed: int = 20011, tol: float = 1e-9,
                       harmonic_tol: float = 1e-10) -> list[Check]:
    rng = np.random.default_rng(seed)
    sym = psd = cong = harm = lem2 = 0.0
    rank_mismatch = 0
    for _ in range(n_pairs):
        N = SYM_DIMS[rng.integers(len(SYM_DIMS))]
        A, B, _ = random_psd_pair(rng, N)
        H = parallel_sum(A, B)
        Ht = 2.0 * B @ psd_pseudo_inverse(A + B) @ A
        scale = 1.0 + np.linalg.norm(A, 2) * np.linalg.norm(B, 2)
        sym = max(sym, np.linalg.norm(H - Ht, 2) / scale)

        lam_ref = max(np.linalg.eigvalsh(A + B)[-1], 1.0)
        w = np.linalg.eigvalsh(0.5 * (H + H.T))
        psd = max(psd, -w[0] / lam_ref)

        basis = parsum.subspace_intersection_basis(parsum.range_projector(A),
                                                   parsum.range_projector(B))
        if int(np.sum(w > 1e-8 * lam_ref)) != basis.shape[1]:
            rank_mismatch += 1

        M = random_congruence(rng, N)
        lhs = M @ H @ M.T
        rhs = parallel_sum(M @ A @ M.T, M @ B @ M.T)
        cong = max(cong, np.linalg.norm(lhs - rhs, 2) / (1.0 + np.linalg.norm(lhs, 2)))

        S = psd_pseudo_inverse(A + B)
        lem2 = max(lem2, np.linalg.norm(A - A @ (A + B) @ S, 2))

        A2 = random_psd(rng, rng.standard_normal((N, N)))
        B2 = random_psd(rng, rng.standard_normal((N, N)))
        harm = max(harm, np.linalg.norm(parsum.harmonic_mean_invertible(A2, B2)
                                        - parallel_sum(A2, B2), 2))
    return [
        Check("parallel-sum formula symmetry", sym, tol, n_pairs),
        Check("parallel-sum PSD (negative eigenvalue / lambda_max)", psd, tol, n_pairs),
        Check("range law rank mismatches", float(rank_mismatch), 0.0, n_pairs),
        Check("congruence identity", cong, tol, n_pairs),
        Check("harmonic mean on SPD pairs", harm, harmonic_tol, n_pairs),
        Check("range identity A = A(A+B)(A+B)^+", lem2, tol, n_pairs),
    ]


def _random_map(rng: np.random.Generator, F: np.ndarray, k: int) -> np.ndarray:
    """Map with ``k`` columns spanning span(F); rank deficient when k > dim F."""
    r = F.shape[1]
    if r == 0:
        return np.zeros((F.shape[0], k))
    C = rng.standard_normal((r, k))
    if k >= r:
        U, _, Vt = np.linalg.svd(C, full_matrices=False)
        C = U @ np.diag(rng.uniform(0.5, 2.0, r)) @ Vt
    return F @ C


def projector_suite(n_pairs: int = 100, seed: int = 20012, tol: float = 1e-9) -> list[Check]:
    rng = np.random.default_rng(seed)
    idem = selfadj = oracle = kernel = 0.0
    rank_mismatch = 0
    for _ in range(n_pairs):
        N = SYM_DIMS[rng.integers(1, len(SYM_DIMS))]
        s = int(rng.integers(0, N + 1))
        ra = int(rng.integers(s, N + 1))
        rb = int(rng.integers(s, N + 1))
        S = random_orthogonal(rng, N)[:, :s]
        Fa, _ = np.linalg.qr(np.hstack([S, rng.standard_normal((N, ra - s))]))
        Fb, _ = np.linalg.qr(np.hstack([S, rng.standard_normal((N, rb - s))]))
        L = _random_map(rng, Fa[:, :ra], ra + int(rng.integers(0, 3)))
        M = _random_map(rng, Fb[:, :rb], rb + int(rng.integers(0, 3)))
        P, Q = parsum.projector_of_map(L), parsum.projector_of_map(M)
        H = parsum.intersection_projector(P, Q)
        idem = max(idem, np.linalg.norm(H @ H - H, 2))
        selfadj = max(selfadj, np.linalg.norm(H - H.T, 2))
        Z = parsum.subspace_intersection_basis(P, Q)
        oracle = max(oracle, np.linalg.norm(H - Z @ Z.T, 2))

        for F in (L, M):
            LL = parsum.quasi_projector_of_map(F)
            PP = parsum.projector_of_map(F)
            if parsum.psd_rank(LL) != parsum.psd_rank(PP):
                rank_mismatch += 1
            # kernel of each is annihilated by the other
            for X, Y in ((LL, PP), (PP, LL)):
                w, V = np.linalg.eigh(X)
                null = V[:, w <= 1e-8 * max(w[-1], 1.0)]
                if null.size:
                    kernel = max(kernel, np.linalg.norm(Y @ null, 2) / max(np.linalg.norm(Y, 2), 1.0))
    return [
        Check("!(P,Q) idempotent", idem, tol, n_pairs),
        Check("!(P,Q) self-adjoint", selfadj, tol, n_pairs),
        Check("!(P,Q) equals intersection projector oracle", oracle, tol, n_pairs),
        Check("rank(LL*) vs rank(LL+) mismatches", float(rank_mismatch), 0.0, 2 * n_pairs),
        Check("kernel(LL*) = kernel(LL+) residual", kernel, tol, 2 * n_pairs),
    ]


def staircase_matrix(rng: np.random.Generator, pattern: SparsityPattern) -> np.ndarray:
    X = np.where(pattern.mask, rng.uniform(0.5, 1.5, pattern.mask.shape), 0.0)
    return np.tril(X) + np.tril(X, -1).T


def staircase_drift(X0: np.ndarray, pattern: SparsityPattern, t_final: float = 10.0) -> float:
    """Largest off-pattern entry along a Toda trajectory sampled on [0, t_final]."""
    cfg = IntegratorConfig(t_final=t_final, sample_interval=t_final / 200)
    log = rk45_integrate(toda_field, X0, cfg, keep_states=True)
    return max(float(np.max(np.abs(X[~pattern.mask]), initial=0.0)) for X in log.states)


def example_staircase() -> SparsityPattern:
    """Order-6 staircase whose rows end at columns 3, 4, 4, 6, 6, 6."""
    mask = np.zeros((6, 6), dtype=bool)
    for i, last in enumerate([3, 4, 4, 6, 6, 6]):
        mask[i, i:last] = True
    return SparsityPattern.from_mask(mask)


def flow_identity_suite(n_cases: int = 50, seed: int = 20013) -> list[Check]:
    rng = np.random.default_rng(seed)
    toda_id = band = descent_zero = descent_db = tangency = dae = 0.0
    for _ in range(n_cases):
        n = int(rng.integers(2, 9))
        X = random_sym(n, rng)
        L = strict_lower(X)
        lhs = commutator(X, L - L.T)
        rhs = -commutator(X, np.diag(np.diag(X)) + 2.0 * L.T)
        toda_id = max(toda_id, float(np.max(np.abs(lhs - rhs))))

        T = np.diag(np.diag(X)) + np.diag(np.diag(X, -1), -1) + np.diag(np.diag(X, -1), 1)
        D = default_target(n)
        Lt = strict_lower(T)
        band = max(band, float(np.max(np.abs(commutator(D, T) - (Lt - Lt.T)))))

        pattern = SparsityPattern.from_mask(rng.random((n, n)) < 0.5)
        Xp = np.where(pattern.mask, X, 0.0)
        G = zero_flow_field(Xp, D, pattern)
        scale = 1.0 + np.linalg.norm(Xp - D) * np.linalg.norm(G)
        descent_zero = max(descent_zero, frobenius_inner(Xp - D, G) / scale)
        h = double_bracket_field(X, D)
        CX = commutator(D, X)
        db_gap = abs(frobenius_inner(X - D, h) + frobenius_inner(CX, CX))
        descent_db = max(descent_db, db_gap / (1.0 + frobenius_inner(CX, CX)))

        tangency = max(tangency, _tangent_residual(Xp, G) / (1.0 + np.linalg.norm(G)))
        dae = max(dae, np.linalg.norm(G - zero_flow_field_dae(Xp, D, pattern)) / (1.0 + np.linalg.norm(G)))

    tri = SparsityPattern.tridiagonal(6)
    stair = example_staircase()
    drift = max(staircase_drift(staircase_matrix(rng, tri), tri),
                staircase_drift(staircase_matrix(rng, stair), stair))
    return [
        Check("[X, X_l - X_l^T] = -[X, X_d + 2 X_l^T]", toda_id, 1e-12, n_cases),
        Check("tridiagonal [D, X] = X_l - X_l^T", band, 1e-14, n_cases),
        Check("zero-flow descent <X - D, g(X)> <= 0", max(descent_zero, 0.0), 1e-10, n_cases),
        Check("double-bracket descent = -|[D, X]|^2", descent_db, 1e-10, n_cases),
        Check("zero flow tangent to the iso-spectral surface", tangency, 1e-9, n_cases),
        Check("zero flow equals its algebraic form", dae, 1e-9, n_cases),
        Check("Toda keeps staircase zeros on [0, 10]", drift, 1e-10, 2),
    ]


def _tangent_residual(X: np.ndarray, G: np.ndarray) -> float:
    """Distance from G to span{[K, X] : K skew}, by brute force over a skew basis."""
    n = X.shape[0]
    cols = []
    for i in range(n):
        for j in range(i + 1, n):
            K = np.zeros((n, n))
            K[i, j], K[j, i] = 1.0, -1.0
            cols.append(commutator(K, X).ravel())
    if not cols:
        return float(np.linalg.norm(G))
    T = np.array(cols).T
    coef = np.linalg.lstsq(T, G.ravel(), rcond=None)[0]
    return float(np.linalg.norm(T @ coef - G.ravel()))


def run_all() -> list[Check]:
    return parallel_sum_suite() + projector_suite() + flow_identity_suite()
