"""Spectral computations for non-negative sparse matrices.

Power iteration with 1-norm normalization gives the spectral radius together
with the right and left Perron vectors.  Bipartite-like structures make plain
power iteration oscillate with period 2; a combined-vector candidate built
from two successive iterates handles that case.  Matrices that collapse a
positive vector to exact zero (nilpotent structure, e.g. the non-backtracking
matrix of a tree) converge to rho = 0 with a certified zero residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp


class SpectralConvergenceError(RuntimeError):
    """Power iteration failed to reach the requested residual."""


class CostBudgetError(RuntimeError):
    """Requested computation exceeds the configured cost budget."""


DEFAULT_TOL = 1e-10
WALK_BUDGET = 500_000_000  # nnz * steps * vectors


@dataclass(frozen=True)
class PerronResult:
    """Spectral radius and Perron vectors of a non-negative matrix.

    right_vec / left_vec are non-negative and 1-normalized.  gamma_R / gamma_L
    are the height ratios max_i xi_i / min_j xi_j; they are +inf when the
    vector has an exactly-zero component (reducible support), in which case
    gamma_R_support / gamma_L_support hold the ratio over the strictly
    positive support.  residual is the max-norm of (M v - rho v), maximized
    over the two directions.
    """

    rho: float
    right_vec: np.ndarray
    left_vec: np.ndarray
    gamma_R: float
    gamma_L: float
    gamma_R_support: float
    gamma_L_support: float
    right_zero_support: bool
    left_zero_support: bool
    iterations: int
    residual: float
    converged: bool


def height_ratio(v: np.ndarray, positive_support_only: bool = False) -> float:
    """Height ratio max_i v_i / min_j v_j of a non-negative vector.

    Any exactly-zero entry makes the ratio +inf unless positive_support_only
    is set, in which case the ratio is taken over the positive entries.
    Raises on the all-zero vector.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        return 1.0
    if v.min() < 0.0:
        raise ValueError("height ratio requires a non-negative vector")
    vmax = v.max()
    if vmax == 0.0:
        raise ValueError("height ratio of the zero vector is undefined")
    vmin = v.min()
    if vmin > 0.0:
        return float(vmax / vmin)
    if positive_support_only:
        pos = v[v > 0.0]
        return float(pos.max() / pos.min())
    return float("inf")


def _iterate(M: sp.csr_matrix, tol: float, max_iter: int):
    """One-directional power iteration with a positive diagonal shift.

    Iterating on M + cI instead of M makes the iteration aperiodic (a plain
    power iteration never settles on matrices whose dominant eigenvalues sit
    on a circle, such as weighted cycles).  For a non-negative matrix the
    shift moves the spectral radius by exactly c and keeps its eigenvector,
    and the residual of the shifted pair equals the residual of the
    unshifted one.

    Returns (rho, vec, iterations, residual, converged).  The residual is
    always the max-norm of (M vec - rho vec) for the returned pair.
    """
    dim = M.shape[0]
    if dim == 0:
        return 0.0, np.empty(0), 0, 0.0, True
    v = np.full(dim, 1.0 / dim)
    row_max = float(np.asarray(M.sum(axis=1)).ravel().max(initial=0.0))
    if row_max == 0.0:
        return 0.0, v, 0, 0.0, True
    best = (np.inf, 0.0, v)  # (residual, rho, vec)

    # phase 1: plain iteration; converges fast in the aperiodic case and
    # detects exact collapse (nilpotent part) where the shifted form cannot
    phase1 = min(max_iter, max(64, 2 * dim + 16))
    for it in range(1, phase1 + 1):
        w = M @ v
        lam = float(w.sum())
        if lam == 0.0:
            # exact collapse: M v = 0, so v is an eigenvector for rho = 0
            return 0.0, v, it, 0.0, True
        res = float(np.abs(w - lam * v).max())
        if res < best[0]:
            best = (res, lam, v)
        if res <= tol:
            return lam, v, it, res, True
        v = w / lam

    # phase 2: damped update v <- (M + shift I) v, normalized.  The shift
    # adds a self-loop weight, which breaks periodicity without moving the
    # eigenvectors; the estimate and residual stay those of the plain pair.
    shift = 0.5 * row_max
    for it in range(phase1 + 1, max_iter + 1):
        u = M @ v
        rho = float(u.sum())
        res = float(np.abs(u - rho * v).max())
        if res < best[0]:
            best = (res, rho, v)
        if res <= tol:
            return rho, v, it, res, True
        v = (u + shift * v) / (rho + shift)
    res, rho, vec = best
    return rho, vec, max_iter, res, False


def _gamma_fields(vec: np.ndarray):
    if vec.size == 0:
        return 1.0, 1.0, False
    vmax = vec.max()
    if vmax <= 0.0:
        return float("inf"), float("inf"), True
    zero = bool((vec == 0.0).any())
    pos = vec[vec > 0.0]
    support_ratio = float(pos.max() / pos.min())
    return (float("inf") if zero else support_ratio), support_ratio, zero


def spectral_radius(
    M: sp.spmatrix,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
) -> PerronResult:
    """Spectral radius and both Perron vectors of a square non-negative matrix.

    Runs power iteration on M and on M^T, then refines rho with the
    two-sided Rayleigh quotient when both vectors overlap.  Non-convergence
    is reported in the result, never silently hidden.
    """
    M = M.tocsr() if sp.issparse(M) else sp.csr_matrix(np.asarray(M))
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if M.nnz and M.data.min() < 0.0:
        raise ValueError("matrix must be non-negative")
    dim = M.shape[0]
    if max_iter is None:
        max_iter = max(1000, 100 * dim)

    Mt = M.T.tocsr()
    rho_r, rvec, it_r, res_r, ok_r = _iterate(M, tol, max_iter)
    rho_l, lvec, it_l, res_l, ok_l = _iterate(Mt, tol, max_iter)

    # choose the rho that best certifies both vectors; include the two-sided
    # Rayleigh quotient as a candidate (it squares the eigenvalue error)
    candidates = {rho_r, rho_l}
    if dim:
        Mr = M @ rvec
        Ml = Mt @ lvec
        overlap = float(lvec @ rvec)
        if overlap > 0.0:
            candidates.add(float(lvec @ Mr) / overlap)
        best_rho, best_res = rho_r, np.inf
        for c in candidates:
            res = max(float(np.abs(Mr - c * rvec).max()), float(np.abs(Ml - c * lvec).max()))
            if res < best_res:
                best_rho, best_res = c, res
    else:
        best_rho, best_res = 0.0, 0.0

    gamma_R, gamma_R_support, zero_r = _gamma_fields(rvec)
    gamma_L, gamma_L_support, zero_l = _gamma_fields(lvec)
    return PerronResult(
        rho=float(best_rho),
        right_vec=rvec,
        left_vec=lvec,
        gamma_R=gamma_R,
        gamma_L=gamma_L,
        gamma_R_support=gamma_R_support,
        gamma_L_support=gamma_L_support,
        right_zero_support=zero_r,
        left_zero_support=zero_l,
        iterations=max(it_r, it_l),
        residual=float(best_res),
        converged=bool(ok_r and ok_l),
    )


def induced_norm(M: sp.spmatrix, which: Union[int, float, str]) -> float:
    """Induced q-norm of a non-negative matrix for q in {1, 2, inf}.

    norm-1 is the maximum column sum, norm-inf the maximum row sum, and
    norm-2 is sqrt(rho(M^T M)) computed by power iteration (raises
    SpectralConvergenceError if that iteration does not converge).
    """
    M = M.tocsr() if sp.issparse(M) else sp.csr_matrix(np.asarray(M))
    key = str(which).lower()
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if M.shape[0] == 0:
        return 0.0
    if key == "1":
        return float(np.asarray(M.sum(axis=0)).ravel().max(initial=0.0))
    if key == "inf":
        return float(np.asarray(M.sum(axis=1)).ravel().max(initial=0.0))
    if key in ("2", "2.0"):
        G = (M.T @ M).tocsr()
        res = spectral_radius(G)
        if not res.converged:
            raise SpectralConvergenceError(
                f"2-norm power iteration did not converge (residual {res.residual:.3e})"
            )
        return float(np.sqrt(max(res.rho, 0.0)))
    raise ValueError(f"unknown norm {which!r}; expected 1, 2, or inf")


@dataclass(frozen=True)
class WalkProfile:
    """Finite-m growth profile of a non-negative matrix.

    sup_row_sum[k] = sup_u sum_v [M^(k+1)]_{uv}, growth[k] its (k+1)-th root.
    When the transpose term is requested, sym_sup_row_sum[k] =
    sup_u sum_v ([M^(k+1)]_{uv} + [M^k]_{vu}).  diag[k, i] = [M^(k+1)]_{aa}
    for the i-th requested index a.
    """

    m_max: int
    sup_row_sum: np.ndarray
    growth: np.ndarray
    row_sums: Optional[np.ndarray]
    start: Optional[np.ndarray]
    sym_sup_row_sum: Optional[np.ndarray]
    sym_growth: Optional[np.ndarray]
    diag: Optional[np.ndarray]
    diag_indices: Optional[np.ndarray]


def walk_profile(
    M: sp.spmatrix,
    m_max: int,
    start: Optional[Sequence[int]] = None,
    include_transpose: bool = False,
    diag_indices: Optional[Sequence[int]] = None,
    budget: int = WALK_BUDGET,
) -> WalkProfile:
    """Row-sum growth profile s_m(u) = sum_v [M^m]_{uv} for m = 1..m_max.

    Everything is computed by repeated matrix-vector products; M^m is never
    materialized.  Requests whose estimated cost nnz * m_max * (#vectors)
    exceeds the budget are refused with CostBudgetError.
    """
    M = M.tocsr() if sp.issparse(M) else sp.csr_matrix(np.asarray(M))
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    dim = M.shape[0]
    n_diag = 0 if diag_indices is None else len(diag_indices)
    vectors = 1 + (1 if include_transpose else 0) + n_diag
    cost = max(M.nnz, 1) * m_max * vectors
    if cost > budget:
        raise CostBudgetError(
            f"walk profile cost {cost:.3e} exceeds budget {budget:.3e}; "
            "reduce m_max or the number of tracked indices"
        )

    start_arr = None if start is None else np.asarray(start, dtype=np.int64)
    sup = np.zeros(m_max)
    rows = None if start_arr is None else np.zeros((m_max, start_arr.size))
    r = np.ones(dim)
    sym_sup = np.zeros(m_max) if include_transpose else None
    c_prev = np.ones(dim) if include_transpose else None
    c = np.ones(dim) if include_transpose else None
    Mt = M.T.tocsr() if include_transpose else None

    diag_vals = np.zeros((m_max, n_diag)) if n_diag else None
    diag_vecs = None
    if n_diag:
        diag_arr = np.asarray(diag_indices, dtype=np.int64)
        diag_vecs = np.zeros((n_diag, dim))
        diag_vecs[np.arange(n_diag), diag_arr] = 1.0
    else:
        diag_arr = None

    for k in range(m_max):
        r = M @ r
        sup[k] = r.max(initial=0.0)
        if rows is not None:
            rows[k] = r[start_arr]
        if include_transpose:
            c_prev, c = c, Mt @ c
            sym_sup[k] = float((r + c_prev).max(initial=0.0))
        if n_diag:
            diag_vecs = (M @ diag_vecs.T).T
            diag_vals[k] = diag_vecs[np.arange(n_diag), diag_arr]

    powers = 1.0 / np.arange(1, m_max + 1)
    growth = sup**powers
    sym_growth = sym_sup**powers if include_transpose else None
    return WalkProfile(
        m_max=m_max,
        sup_row_sum=sup,
        growth=growth,
        row_sums=rows,
        start=start_arr,
        sym_sup_row_sum=sym_sup,
        sym_growth=sym_growth,
        diag=diag_vals,
        diag_indices=diag_arr,
    )
