"""Property-based invariants over randomly generated digraphs."""

import numpy as np
from hypothesis import given, settings, strategies as st

from nbperc import (
    Digraph,
    as_probabilities,
    count_sacs,
    exact_observables,
    induced_norm,
    realization_stats,
    sample_open,
    spectral_radius,
    weighted_adjacency,
    weighted_hashimoto,
    weighted_line_adjacency,
)


@st.composite
def digraphs(draw, n_min=2, n_max=8):
    n = draw(st.integers(n_min, n_max))
    possible = [(u, v) for u in range(n) for v in range(n) if u != v]
    arcs = draw(
        st.lists(st.sampled_from(possible), min_size=1, max_size=len(possible),
                 unique=True)
    )
    return Digraph(n, [a for a, _ in arcs], [b for _, b in arcs])


@st.composite
def digraph_with_p(draw, n_min=2, n_max=8):
    d = draw(digraphs(n_min, n_max))
    p = draw(
        st.lists(
            st.floats(0.05, 0.95, allow_nan=False), min_size=d.n, max_size=d.n
        )
    )
    return d, np.asarray(p)


def symmetrize(d: Digraph) -> Digraph:
    codes = sorted(
        set(zip(d.tails.tolist(), d.heads.tolist()))
        | set(zip(d.heads.tolist(), d.tails.tolist()))
    )
    return Digraph(d.n, [a for a, _ in codes], [b for _, b in codes])


@given(digraph_with_p())
@settings(deadline=None)
def test_adjacency_and_line_spectra_agree(dp):
    d, p = dp
    res_a = spectral_radius(weighted_adjacency(d, p))
    res_l = spectral_radius(weighted_line_adjacency(d, p))
    if res_a.converged and res_l.converged:
        assert abs(res_a.rho - res_l.rho) <= 1e-8


@given(digraph_with_p())
@settings(deadline=None)
def test_hashimoto_spectrum_never_exceeds_adjacency(dp):
    d, p = dp
    res_a = spectral_radius(weighted_adjacency(d, p))
    res_h = spectral_radius(weighted_hashimoto(d, p))
    if res_a.converged and res_h.converged:
        assert res_h.rho <= res_a.rho + 1e-8
        if not d.has_symmetric_bond:
            assert abs(res_h.rho - res_a.rho) <= 1e-8


@given(digraphs())
@settings(deadline=None)
def test_hashimoto_norm_identity_on_symmetric_digraphs(d):
    ds = symmetrize(d)
    H = weighted_hashimoto(ds, 0.7)
    if H.nnz:
        assert abs(induced_norm(H, 1) - induced_norm(H, np.inf)) <= 1e-12


def test_hashimoto_norm_identity_fails_directed():
    # star digraph 0->1, 1->{2,3,4,5}: arc (0,1) has four continuations but
    # every column has at most one predecessor, so the two norms differ
    d = Digraph(6, [0, 1, 1, 1, 1], [1, 2, 3, 4, 5])
    H = weighted_hashimoto(d, 1.0)
    assert induced_norm(H, np.inf) == 4.0
    assert induced_norm(H, 1) == 1.0


@given(digraph_with_p())
@settings(deadline=None)
def test_weighted_adjacency_symmetry_matches_graph(dp):
    d, p = dp
    A = weighted_adjacency(d, p)
    gap = abs(A - A.T)
    if d.is_symmetric:
        assert gap.nnz == 0 or gap.max() <= 1e-15
    ds = symmetrize(d)
    As = weighted_adjacency(ds, p)
    gap_s = abs(As - As.T)
    assert gap_s.nnz == 0 or gap_s.max() <= 1e-15


@given(digraph_with_p(n_max=6))
@settings(deadline=None, max_examples=40)
def test_oracle_mode_containment_and_totals(dp):
    d, p = dp
    ex = exact_observables(d, p, probes=range(d.n), modes=("out", "str", "und"))
    # per-configuration cluster containment survives the expectation
    assert np.all(ex.chi["str"] <= ex.chi["out"] + 1e-12)
    assert np.all(ex.chi["out"] <= ex.chi["und"] + 1e-12)
    for mode in ("out", "str", "und"):
        dist = ex.largest_dist[mode]
        assert abs(dist.sum() - 1.0) <= 1e-10
        assert np.all(dist >= -1e-15)


@given(digraph_with_p(), st.integers(0, 2**32 - 1), st.integers(0, 50))
@settings(deadline=None, max_examples=40)
def test_realization_containment(dp, seed, index):
    d, p = dp
    mask = sample_open(d, p, seed=seed, index=index)
    stats = realization_stats(d, mask, probes=[0])
    assert stats.check_containment()
    for mode in ("out", "in"):
        assert stats.largest["str"] <= stats.largest[mode] <= stats.largest["und"]


@given(digraphs(n_min=3), st.integers(0, 2**32 - 1))
@settings(deadline=None, max_examples=40)
def test_sac_by_length_sums_to_total(d, seed):
    mask = sample_open(d, 0.8, seed=seed)
    for arc in range(min(d.m, 4)):
        total = count_sacs(d, mask, arc)
        by_len = count_sacs(d, mask, arc, by_length=True)
        assert by_len.sum() == total
        # a self-avoiding cycle visits at least three distinct vertices
        assert by_len[:3].sum() == 0


@given(st.floats(0.0, 1.0, allow_nan=False), st.integers(1, 12))
def test_probability_broadcast_equivalence(p, n):
    scalar = as_probabilities(p, n).values
    vector = as_probabilities([p] * n, n).values
    assert np.array_equal(scalar, vector)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_sample_open_extremes(seed):
    d = Digraph(4, [0, 1, 2], [1, 2, 3])
    p = np.array([0.0, 1.0, 0.0, 1.0])
    mask = sample_open(d, p, seed=seed)
    assert not mask[0] and mask[1] and not mask[2] and mask[3]


@given(st.floats(0.05, 0.3), st.floats(0.0, 0.6))
@settings(deadline=None, max_examples=30)
def test_uniform_adjacency_bound_monotone_in_homogeneous_p(p_lo, bump):
    from nbperc import complete, evaluate_bounds

    p_hi = min(p_lo + bump, 0.32)  # keep rho(A_p) = 3 p < 1 on K4
    lo = evaluate_bounds(complete(4), p_lo).record("chi-out-adjacency-uniform")
    hi = evaluate_bounds(complete(4), p_hi).record("chi-out-adjacency-uniform")
    assert lo.applicable and hi.applicable
    assert lo.value <= hi.value + 1e-9
