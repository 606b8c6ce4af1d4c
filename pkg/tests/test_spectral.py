"""Power iteration, induced norms, height ratios, and walk profiles."""

import math

import numpy as np
import pytest
import scipy.sparse as sp

from nbperc import (
    CostBudgetError,
    Digraph,
    complete,
    height_ratio,
    induced_norm,
    spectral_radius,
    two_region,
    walk_profile,
    weighted_adjacency,
    weighted_hashimoto,
)


def dense_rho(M):
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(M)))))


def test_spectral_radius_matches_dense_eigenvalues():
    rng = np.random.default_rng(42)
    for _ in range(20):
        n = int(rng.integers(2, 12))
        M = rng.random((n, n)) * (rng.random((n, n)) < 0.6)
        res = spectral_radius(sp.csr_matrix(M))
        if res.converged:
            assert abs(res.rho - dense_rho(M)) <= 1e-7 * max(1.0, dense_rho(M))


def test_nilpotent_is_exactly_zero():
    # directed chain: A^3 = 0, power iteration must report 0.0 exactly
    chain = Digraph(4, [0, 1, 2], [1, 2, 3])
    res = spectral_radius(weighted_adjacency(chain, 0.7))
    assert res.converged
    assert res.rho == 0.0


def test_heterogeneous_directed_cycle():
    # rho(A_p)^3 = p0 p1 p2 for a directed 3-cycle
    d = Digraph(3, [0, 1, 2], [1, 2, 0])
    p = np.array([0.2, 0.5, 0.8])
    res = spectral_radius(weighted_adjacency(d, p))
    assert res.converged
    assert abs(res.rho - (0.2 * 0.5 * 0.8) ** (1.0 / 3.0)) <= 1e-8
    res_h = spectral_radius(weighted_hashimoto(d, p))
    assert abs(res_h.rho - res.rho) <= 1e-8


def test_defective_matrix_reports_nonconvergence():
    # two equal-rate directed triangles joined by a bridge arc: the dominant
    # eigenvalue is defective (Jordan block across the bridge), so the
    # iteration must report non-convergence rather than a false certificate
    d = Digraph(6, [0, 1, 2, 2, 3, 4, 5], [1, 2, 0, 3, 4, 5, 3])
    res = spectral_radius(weighted_adjacency(d, 0.5))
    assert not res.converged
    assert res.residual > 0.0
    # the estimate itself is still approximately the true value 0.5
    assert abs(res.rho - 0.5) <= 1e-3


def test_perron_vectors_and_gamma_on_regular_graph():
    res = spectral_radius(weighted_adjacency(complete(5), 1.0))
    assert res.converged
    assert abs(res.rho - 4.0) <= 1e-8
    # regular graph: flat Perron vectors, height ratio exactly 1
    assert abs(res.gamma_R - 1.0) <= 1e-8
    assert abs(res.gamma_L - 1.0) <= 1e-8


def test_gamma_on_two_region_graph_exceeds_one():
    d = two_region(10, 3, 2, seed=0)
    res = spectral_radius(weighted_adjacency(d, 1.0))
    assert res.converged
    assert res.gamma_R > 1.0 + 1e-6
    assert res.gamma_L > 1.0 + 1e-6


def test_height_ratio():
    assert height_ratio(np.array([1.0, 2.0, 4.0])) == 4.0
    assert height_ratio(np.array([3.0, 3.0])) == 1.0
    assert math.isinf(height_ratio(np.array([0.0, 1.0])))
    assert height_ratio(np.array([0.0, 2.0, 1.0]), positive_support_only=True) == 2.0
    with pytest.raises(ValueError):
        height_ratio(np.zeros(3))


def test_induced_norms_against_direct_computation():
    rng = np.random.default_rng(7)
    M = rng.random((6, 6)) * (rng.random((6, 6)) < 0.5)
    S = sp.csr_matrix(M)
    assert abs(induced_norm(S, 1) - M.sum(axis=0).max()) <= 1e-12
    assert abs(induced_norm(S, np.inf) - M.sum(axis=1).max()) <= 1e-12
    assert abs(induced_norm(S, 2) - np.linalg.norm(M, 2)) <= 1e-8


def test_induced_norm_rejects_unknown_order():
    with pytest.raises(ValueError):
        induced_norm(sp.eye(3, format="csr"), 3)


def test_walk_profile_matches_matrix_powers():
    rng = np.random.default_rng(3)
    M = rng.random((5, 5)) * (rng.random((5, 5)) < 0.7)
    prof = walk_profile(sp.csr_matrix(M), 6, start=range(5), diag_indices=[0, 3])
    P = np.eye(5)
    for k in range(6):
        P = P @ M
        assert np.allclose(prof.row_sums[k], P.sum(axis=1))
        # diag[k, i] = [M^(k+1)]_{aa} for the requested indices
        assert np.isclose(prof.diag[k, 0], P[0, 0])
        assert np.isclose(prof.diag[k, 1], P[3, 3])
    assert prof.sup_row_sum[-1] == pytest.approx(P.sum(axis=1).max())


def test_walk_profile_start_subset():
    chain = Digraph(4, [0, 1, 2], [1, 2, 3])
    A = weighted_adjacency(chain, 1.0)
    prof = walk_profile(A, 3, start=[0])
    # from vertex 0 there is exactly one walk of each length along the chain
    assert np.allclose(prof.row_sums[:, 0], [1.0, 1.0, 1.0])


def test_walk_profile_budget_refusal():
    d = two_region(10, 3, 2, seed=0)
    A = weighted_adjacency(d, 1.0)
    with pytest.raises(CostBudgetError):
        walk_profile(A, 10_000_000, budget=1000)


def test_walk_profile_transpose_side():
    M = sp.csr_matrix(np.array([[0.0, 2.0], [0.0, 0.0]]))
    prof = walk_profile(M, 2, include_transpose=True)
    assert prof.sym_sup_row_sum is not None
    # symmetric profile bounds column sums too: max col sum of M is 2
    assert prof.sym_sup_row_sum[0] >= 2.0
