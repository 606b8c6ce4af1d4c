"""Exact enumeration oracle: hand-computed values and internal identities."""

import numpy as np
import pytest

from nbperc import (
    Digraph,
    corpus,
    exact_chi_identity_check,
    exact_observables,
)


def test_single_bond_hand_values():
    d = Digraph(2, [0, 1], [1, 0])
    p = np.array([0.36, 0.49])
    ex = exact_observables(d, p, probes=[0, 1], pairs=[(0, 1)])
    assert ex.n_configs == 4
    # chi(0) = p0 (1 + p1) for every cluster notion on a symmetric bond
    for mode in ("und", "out", "in", "str"):
        assert ex.chi[mode][0] == pytest.approx(0.36 * 1.49, abs=1e-12)
        assert ex.chi[mode][1] == pytest.approx(0.49 * 1.36, abs=1e-12)
    assert np.allclose(ex.tau[0], 0.36 * 0.49)
    dist = ex.largest_dist["und"]
    assert dist[0] == pytest.approx(0.64 * 0.51, abs=1e-12)
    assert dist[1] == pytest.approx(0.36 * 0.51 + 0.64 * 0.49, abs=1e-12)
    assert dist[2] == pytest.approx(0.36 * 0.49, abs=1e-12)
    assert dist.sum() == pytest.approx(1.0, abs=1e-12)


def test_directed_chain_hand_values():
    d = Digraph(3, [0, 1], [1, 2])
    ex = exact_observables(d, 0.5, probes=[0], pairs=[(0, 2)])
    assert ex.chi["out"][0] == pytest.approx(0.5 * (1 + 0.5 + 0.25), abs=1e-12)
    assert ex.chi["in"][0] == pytest.approx(0.5, abs=1e-12)
    assert ex.chi["str"][0] == pytest.approx(0.5, abs=1e-12)
    assert ex.chi["und"][0] == pytest.approx(0.5 * (1 + 0.5 + 0.25), abs=1e-12)
    # tau columns: P(u reaches v), P(v reaches u), P(two-sided)
    assert ex.tau[0, 0] == pytest.approx(0.125, abs=1e-12)
    assert ex.tau[0, 1] == 0.0
    assert ex.tau[0, 2] == 0.0


def test_triangle_sac_expectation():
    d = Digraph(3, [0, 1, 2], [1, 2, 0])
    p = np.array([0.2, 0.5, 0.9])
    ex = exact_observables(d, p, arcs=[0, 1, 2])
    assert np.allclose(ex.chi_sac, 0.2 * 0.5 * 0.9, atol=1e-12)


def test_largest_dist_is_probability_vector():
    for item in corpus(4, seed=30, n_max=8):
        ex = exact_observables(item.digraph, item.p)
        for mode, dist in ex.largest_dist.items():
            assert dist.shape == (item.digraph.n + 1,)
            assert np.all(dist >= -1e-15)
            assert dist.sum() == pytest.approx(1.0, abs=1e-10)


def test_enumeration_cap_refused():
    big = Digraph(16, list(range(15)), list(range(1, 16)))
    with pytest.raises(ValueError):
        exact_observables(big, 0.5)
    with pytest.raises(ValueError):
        exact_chi_identity_check(big, 0.5)
    # explicit smaller cap also refuses
    small = Digraph(5, [0, 1, 2, 3], [1, 2, 3, 4])
    with pytest.raises(ValueError):
        exact_observables(small, 0.5, cap=4)


def test_chi_identity_on_corpus():
    for item in corpus(6, seed=17, n_max=8):
        assert exact_chi_identity_check(item.digraph, item.p)


def test_oracle_worker_independence():
    item = corpus(1, seed=4, n_min=9, n_max=9)[0]
    d = item.digraph
    kw = dict(
        probes=range(d.n), pairs=[(0, 1), (2, 3)], arcs=[0], modes=("out", "str")
    )
    one = exact_observables(d, item.p, workers=1, **kw)
    four = exact_observables(d, item.p, workers=4, **kw)
    for mode in ("out", "str"):
        assert np.allclose(one.chi[mode], four.chi[mode], atol=1e-14)
        assert np.allclose(
            one.largest_dist[mode], four.largest_dist[mode], atol=1e-14
        )
    assert np.allclose(one.tau, four.tau, atol=1e-14)
    assert np.allclose(one.chi_sac, four.chi_sac, atol=1e-14)


def test_probability_extremes_are_deterministic():
    d = Digraph(3, [0, 1, 2], [1, 2, 0])
    ex = exact_observables(d, np.array([1.0, 1.0, 0.0]), probes=[0])
    # vertex 2 never opens: cluster of 0 is always {0, 1} in und mode
    assert ex.chi["und"][0] == pytest.approx(2.0, abs=1e-14)
    assert ex.chi["out"][0] == pytest.approx(2.0, abs=1e-14)
    assert ex.chi["str"][0] == pytest.approx(1.0, abs=1e-14)
