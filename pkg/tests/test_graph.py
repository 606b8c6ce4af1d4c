"""Digraph construction, weighted matrices, connectivity, and edge-list I/O."""

import io
import math

import numpy as np
import pytest

from nbperc import (
    Digraph,
    EdgeListError,
    as_probabilities,
    directed_distance,
    distances_from,
    hashimoto_structure,
    is_strongly_connected,
    olg_connectivity_report,
    olg_return_lengths,
    read_edge_list,
    strongly_connected_components,
    weighted_adjacency,
    weighted_hashimoto,
    weighted_line_adjacency,
    write_edge_list,
)


def directed_triangle():
    return Digraph(3, [0, 1, 2], [1, 2, 0])


def undirected_path(n):
    tails = list(range(n - 1)) + list(range(1, n))
    heads = list(range(1, n)) + list(range(n - 1))
    return Digraph(n, tails, heads)


def test_construction_basic():
    d = directed_triangle()
    assert d.n == 3
    assert d.m == 3
    assert list(d.out_degree) == [1, 1, 1]
    assert list(d.in_degree) == [1, 1, 1]
    assert not d.has_symmetric_bond
    assert not d.is_symmetric


def test_construction_rejects_bad_input():
    with pytest.raises(ValueError):
        Digraph(0, [], [])
    with pytest.raises(ValueError):
        Digraph(2, [0], [2])  # head out of range
    with pytest.raises(ValueError):
        Digraph(2, [-1], [0])  # tail out of range
    with pytest.raises(ValueError):
        Digraph(2, [0], [0])  # self-loop
    with pytest.raises(ValueError):
        Digraph(3, [0, 0], [1, 1])  # duplicate arc


def test_inverse_of_pairs_mutual_arcs():
    d = Digraph(3, [0, 1, 1, 2], [1, 0, 2, 0])
    inv = d.inverse_of
    # arcs 0<->1 between vertices 0 and 1; arcs 2 (1->2) and 3 (2->0) have none
    assert inv[0] >= 0 and inv[inv[0]] == 0
    assert d.tails[inv[0]] == d.heads[0] and d.heads[inv[0]] == d.tails[0]
    one_way = [a for a in range(d.m) if inv[a] < 0]
    assert len(one_way) == 2
    assert d.has_symmetric_bond and not d.is_symmetric


def test_arc_index_consistency():
    d = undirected_path(4)
    for v in range(d.n):
        for a in d.out_arc_ids(v):
            assert d.tails[a] == v
        for a in d.in_arc_ids(v):
            assert d.heads[a] == v
    assert d.is_symmetric


def test_as_probabilities_broadcast_and_validation():
    p = as_probabilities(0.3, 5)
    assert p.values.shape == (5,)
    assert np.all(p.values == 0.3)
    q = as_probabilities([0.1, 0.2, 0.3], 3)
    assert np.allclose(q.values, [0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        as_probabilities([0.1, 0.2], 3)  # wrong length
    with pytest.raises(ValueError):
        as_probabilities(1.5, 2)  # out of range
    with pytest.raises(ValueError):
        as_probabilities(-0.1, 2)


def test_weighted_adjacency_values():
    # single undirected bond: entries sqrt(p_i p_j)
    d = Digraph(2, [0, 1], [1, 0])
    A = weighted_adjacency(d, [0.36, 0.49]).toarray()
    expect = math.sqrt(0.36 * 0.49)
    assert np.allclose(A, [[0.0, expect], [expect, 0.0]])


def test_weighted_adjacency_heterogeneous_triangle():
    d = directed_triangle()
    p = np.array([0.2, 0.5, 0.9])
    A = weighted_adjacency(d, p).toarray()
    expect = np.zeros((3, 3))
    expect[0, 1] = math.sqrt(0.2 * 0.5)
    expect[1, 2] = math.sqrt(0.5 * 0.9)
    expect[2, 0] = math.sqrt(0.9 * 0.2)
    assert np.allclose(A, expect)


def test_hashimoto_structure_no_backtracking():
    # mutual bond plus a tail: transitions a->b need head(a)=tail(b), b != inverse(a)
    d = Digraph(3, [0, 1, 1, 2], [1, 0, 2, 1])
    H = hashimoto_structure(d).toarray()
    for a in range(d.m):
        for b in range(d.m):
            allowed = d.heads[a] == d.tails[b] and d.inverse_of[a] != b
            assert H[a, b] == (1.0 if allowed else 0.0)


def test_weighted_hashimoto_entry_scaling():
    # row convention: entry (a, b) = p_head(a) when b extends a
    d = Digraph(3, [0, 1, 2], [1, 2, 0])
    p = np.array([0.2, 0.5, 0.9])
    H = weighted_hashimoto(d, p).toarray()
    S = hashimoto_structure(d).toarray()
    for a in range(d.m):
        for b in range(d.m):
            assert np.isclose(H[a, b], S[a, b] * p[d.heads[a]])


def test_weighted_line_adjacency_shape_and_support():
    d = Digraph(3, [0, 1, 1, 2], [1, 0, 2, 1])
    L = weighted_line_adjacency(d, 0.5).toarray()
    assert L.shape == (d.m, d.m)
    # line digraph keeps backtracking transitions, so support is a superset
    H = hashimoto_structure(d).toarray()
    assert np.all((H > 0) <= (L > 0))
    assert (L > 0).sum() > (H > 0).sum()


def test_strongly_connected_components():
    d = directed_triangle()
    count, labels = strongly_connected_components(d)
    assert count == 1
    assert len(set(labels.tolist())) == 1
    assert is_strongly_connected(d)

    chain = Digraph(3, [0, 1], [1, 2])
    count, labels = strongly_connected_components(chain)
    assert count == 3
    assert not is_strongly_connected(chain)


def test_distances():
    chain = Digraph(4, [0, 1, 2], [1, 2, 3])
    dist = distances_from(chain, 0)
    assert np.allclose(dist, [0.0, 1.0, 2.0, 3.0])
    back = distances_from(chain, 3)
    assert back[3] == 0.0 and np.all(np.isinf(back[:3]))
    assert directed_distance(chain, 0, 3) == 3
    assert directed_distance(chain, 3, 0) is None
    assert directed_distance(chain, 2, 2) == 0


def test_olg_report_no_symmetric_bonds():
    rep = olg_connectivity_report(directed_triangle())
    assert rep.precondition_ok
    assert rep.lemma1_case == "a"
    assert rep.olg_strongly_connected
    # each arc has no inverse: return lengths all nan
    assert np.all(np.isnan(rep.return_lengths))


def test_olg_report_undirected_cycle():
    # the OLG of an undirected cycle splits into the two walk orientations:
    # the bond-removal diagnostic holds, but connectivity (computed directly)
    # does not, and no arc can reach its inverse
    n = 5
    tails = list(range(n)) + list(range(n))
    heads = [(v + 1) % n for v in range(n)] + [(v - 1) % n for v in range(n)]
    d = Digraph(n, tails, heads)
    rep = olg_connectivity_report(d)
    assert rep.precondition_ok
    assert rep.lemma1_case == "b"
    assert not rep.olg_strongly_connected
    assert np.all(np.isinf(rep.return_lengths))


def test_olg_report_complete_graph():
    from nbperc import complete

    rep = olg_connectivity_report(complete(4))
    assert rep.precondition_ok
    assert rep.lemma1_case == "b"
    assert rep.olg_strongly_connected
    # shortest arc-to-inverse route detours through two other vertices
    assert np.all(rep.return_lengths == 4.0)


def test_olg_single_bond_disconnected():
    d = Digraph(2, [0, 1], [1, 0])
    rep = olg_connectivity_report(d)
    assert rep.precondition_ok
    assert not rep.olg_strongly_connected
    assert rep.lemma1_case == "neither"
    assert np.all(np.isinf(rep.return_lengths))


def test_olg_return_lengths_cap():
    n = 6
    tails = list(range(n)) + list(range(n))
    heads = [(v + 1) % n for v in range(n)] + [(v - 1) % n for v in range(n)]
    d = Digraph(n, tails, heads)
    lengths = olg_return_lengths(d, cap=2)
    assert np.all(np.isinf(lengths))  # true length n-1=5 exceeds the cap
    rep = olg_connectivity_report(d, return_length_cap=2)
    assert rep.truncated


def test_edge_list_round_trip():
    d = Digraph(4, [0, 1, 1, 2, 3], [1, 0, 2, 3, 2])
    buf = io.StringIO()
    write_edge_list(d, buf, comments=["example"])
    text = buf.getvalue()
    assert text.splitlines()[0].startswith("#")
    back = read_edge_list(io.StringIO(text))
    assert back.n == d.n and back.m == d.m
    assert sorted(zip(back.tails.tolist(), back.heads.tolist())) == sorted(
        zip(d.tails.tolist(), d.heads.tolist())
    )


def test_edge_list_format_markers():
    # mutual pair collapses to one 'u' line; lone arc gets a 'd' line
    d = Digraph(3, [0, 1, 1], [1, 0, 2])
    buf = io.StringIO()
    write_edge_list(d, buf)
    body = [ln for ln in buf.getvalue().splitlines() if not ln.startswith("#")]
    assert body[0].split() == ["n", "3"]
    markers = sorted(ln.split()[2] for ln in body[1:])
    assert markers == ["d", "u"]


def test_read_edge_list_errors():
    with pytest.raises(EdgeListError):
        read_edge_list(io.StringIO("1 2 d\n"))  # missing header
    with pytest.raises(EdgeListError):
        read_edge_list(io.StringIO("n 2\n0 1 x\n"))  # bad marker
    with pytest.raises(EdgeListError):
        read_edge_list(io.StringIO("n 2\n0 5 d\n"))  # endpoint out of range
    with pytest.raises(EdgeListError):
        read_edge_list(io.StringIO(""))
