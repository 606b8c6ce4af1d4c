"""Digraph container, arc-level structure, and weighted percolation matrices.

A finite simple digraph is stored as parallel arrays of arc tails and heads.
Undirected graphs are represented as symmetric digraphs: each undirected edge
becomes a pair of mutually inverse arcs.  ``inverse_of[a]`` holds the index of
the reversed arc when it exists, else -1; a pair of mutually inverse arcs is a
symmetric bond.

Three sparse matrices drive all bound evaluations, for a digraph with vertex
probabilities p:

* weighted adjacency  (n x n):  entry (i, j) = sqrt(p_i p_j) on each arc i->j;
* weighted line-graph adjacency (m x m): entry (a, b) = p_j whenever arc b
  leaves the head j of arc a;
* weighted Hashimoto / non-backtracking matrix (m x m): the line-graph matrix
  with the backtracking transitions (b = inverse of a) removed.

The oriented line graph (OLG) is the directed graph on arcs whose edges are
exactly the nonzero positions of the Hashimoto matrix.
"""

from __future__ import annotations

import io
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph


class EdgeListError(ValueError):
    """Malformed edge-list input (bad entry, bad file line, bad header)."""


@dataclass(frozen=True, eq=False)
class SiteProbabilities:
    """Per-vertex open probabilities, each in the closed interval [0, 1].

    ``strictly_interior`` records whether every entry lies in the open
    interval (0, 1); boundary values are accepted but flagged, since several
    bounds assume interior probabilities.
    """

    values: np.ndarray
    strictly_interior: bool = field(init=False)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 1:
            raise ValueError("site probabilities must be a 1-D vector")
        if v.size == 0:
            raise ValueError("site probabilities must be non-empty")
        if not np.all(np.isfinite(v)):
            raise ValueError("site probabilities must be finite")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("site probabilities must lie in [0, 1]")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(
            self, "strictly_interior", bool((v > 0.0).all() and (v < 1.0).all())
        )

    @classmethod
    def uniform(cls, n: int, p: float) -> "SiteProbabilities":
        return cls(np.full(n, float(p)))

    def __len__(self) -> int:
        return int(self.values.size)


def as_probabilities(p, n: int) -> SiteProbabilities:
    """Coerce a scalar, vector, or SiteProbabilities to SiteProbabilities."""
    if isinstance(p, SiteProbabilities):
        if len(p) != n:
            raise ValueError(f"probability vector length {len(p)} != n = {n}")
        return p
    if np.isscalar(p):
        return SiteProbabilities.uniform(n, float(p))
    arr = np.asarray(p, dtype=np.float64)
    if arr.shape != (n,):
        raise ValueError(f"probability vector shape {arr.shape} != ({n},)")
    return SiteProbabilities(arr)


_DIRECTED_FLAGS = {"d", "directed"}
_UNDIRECTED_FLAGS = {"u", "undirected"}


class Digraph:
    """Immutable simple digraph with arc-indexed structure.

    Attributes
    ----------
    n : vertex count.
    tails, heads : int64 arrays of length m (arc count), in input order.
    inverse_of : int64 array; index of the reversed arc, or -1.
    out_ptr, out_arcs : CSR layout of arc ids grouped by tail.
    in_ptr, in_arcs : CSR layout of arc ids grouped by head.
    """

    __slots__ = (
        "n",
        "tails",
        "heads",
        "inverse_of",
        "out_ptr",
        "out_arcs",
        "in_ptr",
        "in_arcs",
        "out_degree",
        "in_degree",
    )

    def __init__(self, n: int, tails: np.ndarray, heads: np.ndarray):
        n = int(n)
        if n < 1:
            raise ValueError("vertex count must be >= 1")
        tails = np.asarray(tails, dtype=np.int64).copy()
        heads = np.asarray(heads, dtype=np.int64).copy()
        if tails.shape != heads.shape or tails.ndim != 1:
            raise ValueError("tails/heads must be 1-D arrays of equal length")
        m = tails.size
        if m:
            if tails.min() < 0 or tails.max() >= n or heads.min() < 0 or heads.max() >= n:
                bad = np.flatnonzero((tails < 0) | (tails >= n) | (heads < 0) | (heads >= n))[0]
                raise ValueError(
                    f"arc {bad} = ({tails[bad]} -> {heads[bad]}) has an endpoint outside [0, {n})"
                )
            loops = np.flatnonzero(tails == heads)
            if loops.size:
                raise ValueError(f"self-loop at vertex {tails[loops[0]]} (arc {loops[0]})")

        code = tails * n + heads
        order = np.argsort(code, kind="stable")
        sorted_code = code[order]
        if m > 1:
            dup = np.flatnonzero(sorted_code[1:] == sorted_code[:-1])
            if dup.size:
                a = order[dup[0] + 1]
                raise ValueError(f"duplicate arc ({tails[a]} -> {heads[a]}) at index {a}")

        inverse_of = np.full(m, -1, dtype=np.int64)
        if m:
            rev = heads * n + tails
            pos = np.searchsorted(sorted_code, rev)
            pos_c = np.minimum(pos, m - 1)
            cand = order[pos_c]
            matched = (pos < m) & (code[cand] == rev)
            inverse_of[matched] = cand[matched]

        out_counts = np.bincount(tails, minlength=n)
        in_counts = np.bincount(heads, minlength=n)
        out_ptr = np.zeros(n + 1, dtype=np.int64)
        in_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(out_counts, out=out_ptr[1:])
        np.cumsum(in_counts, out=in_ptr[1:])
        out_arcs = np.argsort(tails, kind="stable").astype(np.int64)
        in_arcs = np.argsort(heads, kind="stable").astype(np.int64)

        for name, value in (
            ("n", n),
            ("tails", tails),
            ("heads", heads),
            ("inverse_of", inverse_of),
            ("out_ptr", out_ptr),
            ("out_arcs", out_arcs),
            ("in_ptr", in_ptr),
            ("in_arcs", in_arcs),
            ("out_degree", out_counts.astype(np.int64)),
            ("in_degree", in_counts.astype(np.int64)),
        ):
            if isinstance(value, np.ndarray):
                value.flags.writeable = False
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("Digraph is immutable")

    @property
    def m(self) -> int:
        return int(self.tails.size)

    @property
    def has_symmetric_bond(self) -> bool:
        return bool((self.inverse_of >= 0).any())

    @property
    def is_symmetric(self) -> bool:
        """True when every arc has an inverse (the digraph of an undirected graph)."""
        return bool((self.inverse_of >= 0).all())

    def out_arc_ids(self, v: int) -> np.ndarray:
        return self.out_arcs[self.out_ptr[v] : self.out_ptr[v + 1]]

    def in_arc_ids(self, v: int) -> np.ndarray:
        return self.in_arcs[self.in_ptr[v] : self.in_ptr[v + 1]]

    def out_neighbors(self, v: int) -> np.ndarray:
        return self.heads[self.out_arc_ids(v)]

    def in_neighbors(self, v: int) -> np.ndarray:
        return self.tails[self.in_arc_ids(v)]

    def symmetric_bond_pairs(self) -> np.ndarray:
        """(k, 2) array of arc-index pairs (a, inverse_of[a]) with a < inverse."""
        a = np.flatnonzero(self.inverse_of > np.arange(self.m))
        return np.stack([a, self.inverse_of[a]], axis=1) if a.size else np.empty((0, 2), np.int64)

    def reversed(self) -> "Digraph":
        return Digraph(self.n, self.heads, self.tails)

    def __reduce__(self):
        return (Digraph, (self.n, self.tails, self.heads))

    def same_as(self, other: "Digraph") -> bool:
        return (
            self.n == other.n
            and self.m == other.m
            and bool(np.array_equal(self.tails, other.tails))
            and bool(np.array_equal(self.heads, other.heads))
        )

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, m={self.m})"

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple]) -> "Digraph":
        arr = np.asarray(list(arcs), dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        return cls(n, arr[:, 0], arr[:, 1])

    @classmethod
    def from_edge_list(cls, n: int, edges: Sequence[tuple]) -> "Digraph":
        """Build from (tail, head, flag) entries; flag 'd'/'u' for directed/undirected.

        Undirected entries expand to two consecutive mutually inverse arcs.
        Rejects self-loops, out-of-range endpoints, and duplicate arcs, naming
        the offending entry.
        """
        tails: list[int] = []
        heads: list[int] = []
        seen: dict = {}
        for k, entry in enumerate(edges):
            try:
                t, h, flag = entry
            except Exception as exc:
                raise EdgeListError(f"entry {k}: expected (tail, head, flag), got {entry!r}") from exc
            t, h = int(t), int(h)
            if not (0 <= t < n and 0 <= h < n):
                raise EdgeListError(f"entry {k}: endpoint outside [0, {n}): ({t}, {h})")
            if t == h:
                raise EdgeListError(f"entry {k}: self-loop at vertex {t}")
            flag = str(flag).lower()
            if flag in _DIRECTED_FLAGS:
                new = [(t, h)]
            elif flag in _UNDIRECTED_FLAGS:
                new = [(t, h), (h, t)]
            else:
                raise EdgeListError(f"entry {k}: unknown flag {flag!r} (expected 'd' or 'u')")
            for t2, h2 in new:
                if (t2, h2) in seen:
                    raise EdgeListError(
                        f"entry {k}: duplicate arc ({t2} -> {h2}), first added by entry {seen[(t2, h2)]}"
                    )
                seen[(t2, h2)] = k
                tails.append(t2)
                heads.append(h2)
        return cls(n, np.asarray(tails, dtype=np.int64), np.asarray(heads, dtype=np.int64))


# --- weighted matrices ---


def _check_p(d: Digraph, p) -> np.ndarray:
    p = as_probabilities(p, d.n)
    return p.values


def weighted_adjacency(d: Digraph, p) -> sp.csr_matrix:
    """n x n matrix with entry (i, j) = sqrt(p_i p_j) on every arc i->j."""
    pv = _check_p(d, p)
    data = np.sqrt(pv[d.tails] * pv[d.heads])
    mat = sp.csr_matrix((data, (d.tails, d.heads)), shape=(d.n, d.n))
    mat.eliminate_zeros()
    return mat


def _line_transition_arrays(d: Digraph):
    """Row/col/data layout of the line-graph transition structure.

    Row a (an arc i->j) has one entry per arc b leaving j, with value index j
    (the shared vertex); returns (rows, cols, shared_vertex).
    """
    counts = d.out_degree[d.heads]
    total = int(counts.sum())
    rows = np.repeat(np.arange(d.m, dtype=np.int64), counts)
    # within-row offsets into the out-arc block of each head vertex
    block_start = np.zeros(d.m, dtype=np.int64)
    np.cumsum(counts[:-1], out=block_start[1:])
    offsets = np.arange(total, dtype=np.int64) - np.repeat(block_start, counts)
    cols = d.out_arcs[np.repeat(d.out_ptr[d.heads], counts) + offsets]
    shared = d.heads[rows]
    return rows, cols, shared


def weighted_line_adjacency(d: Digraph, p) -> sp.csr_matrix:
    """m x m line-digraph matrix: entry (a, b) = p_j for a = i->j, b = j->l."""
    pv = _check_p(d, p)
    if d.m == 0:
        return sp.csr_matrix((0, 0))
    rows, cols, shared = _line_transition_arrays(d)
    mat = sp.csr_matrix((pv[shared], (rows, cols)), shape=(d.m, d.m))
    mat.eliminate_zeros()
    return mat


def weighted_hashimoto(d: Digraph, p) -> sp.csr_matrix:
    """m x m non-backtracking matrix: the line matrix minus backtracking entries.

    Entry (a, b) = p_j for a = i->j, b = j->l with l != i; transitions onto the
    inverse arc are removed.
    """
    pv = _check_p(d, p)
    if d.m == 0:
        return sp.csr_matrix((0, 0))
    rows, cols, shared = _line_transition_arrays(d)
    keep = cols != d.inverse_of[rows]
    mat = sp.csr_matrix((pv[shared[keep]], (rows[keep], cols[keep])), shape=(d.m, d.m))
    mat.eliminate_zeros()
    return mat


def hashimoto_structure(d: Digraph) -> sp.csr_matrix:
    """Unweighted (0/1) Hashimoto matrix: the OLG adjacency matrix."""
    return weighted_hashimoto(d, np.ones(d.n))


# --- connectivity ---


def _adjacency_bool(d: Digraph) -> sp.csr_matrix:
    data = np.ones(d.m, dtype=np.int8)
    return sp.csr_matrix((data, (d.tails, d.heads)), shape=(d.n, d.n))


def is_strongly_connected(d: Digraph) -> bool:
    if d.n == 1:
        return True
    ncomp = csgraph.connected_components(
        _adjacency_bool(d), directed=True, connection="strong", return_labels=False
    )
    return int(ncomp) == 1


def strongly_connected_components(d: Digraph):
    """(count, labels) of strongly connected components of the full digraph."""
    if d.m == 0:
        return d.n, np.arange(d.n)
    return csgraph.connected_components(
        _adjacency_bool(d), directed=True, connection="strong", return_labels=True
    )


def distances_from(d: Digraph, u: int) -> np.ndarray:
    """Directed BFS distances (in arcs) from u to every vertex; inf if unreachable."""
    dist = np.full(d.n, np.inf)
    dist[u] = 0.0
    queue = deque([u])
    out_ptr, out_arcs, heads = d.out_ptr, d.out_arcs, d.heads
    while queue:
        v = queue.popleft()
        dv = dist[v] + 1.0
        for a in out_arcs[out_ptr[v] : out_ptr[v + 1]]:
            w = heads[a]
            if dist[w] == np.inf:
                dist[w] = dv
                queue.append(w)
    return dist


def directed_distance(d: Digraph, u: int, v: int) -> Optional[int]:
    """Length of the shortest directed path u -> v, or None if unreachable."""
    if not (0 <= u < d.n and 0 <= v < d.n):
        raise ValueError("vertex index out of range")
    if u == v:
        return 0
    dist = distances_from(d, u)[v]
    return None if np.isinf(dist) else int(dist)


# --- oriented line graph report ---


@dataclass(frozen=True)
class OlgReport:
    """Connectivity structure of the oriented line graph.

    ``lemma1_case`` reports which sufficient condition for OLG strong
    connectivity holds: 'a' (no symmetric bonds), 'b' (the digraph stays
    strongly connected when any single symmetric bond is replaced by either
    of its arcs, checked bond-by-bond), or 'neither'.  It is a diagnostic;
    ``olg_strongly_connected`` is always computed directly from the OLG.

    ``return_lengths[a]`` is the shortest OLG path length from arc a to its
    inverse: nan when a has no inverse, inf when unreachable (exact when
    ``truncated`` is False, else only "not found within cap").
    """

    precondition_ok: bool
    olg_strongly_connected: Optional[bool] = None
    lemma1_case: Optional[str] = None
    return_lengths: Optional[np.ndarray] = None
    truncated: bool = False
    cap: Optional[int] = None


def _strong_after_removal(d: Digraph, drop_arc: int) -> bool:
    keep = np.ones(d.m, dtype=bool)
    keep[drop_arc] = False
    data = np.ones(d.m - 1, dtype=np.int8)
    mat = sp.csr_matrix((data, (d.tails[keep], d.heads[keep])), shape=(d.n, d.n))
    ncomp = csgraph.connected_components(
        mat, directed=True, connection="strong", return_labels=False
    )
    return int(ncomp) == 1


def olg_return_lengths(d: Digraph, cap: Optional[int] = None) -> np.ndarray:
    """Per-arc shortest OLG path length from each arc to its inverse.

    BFS in the OLG from every arc that has an inverse; entries are nan for
    arcs without an inverse and inf when the inverse was not reached (exact
    unreachability when cap is None).
    """
    lengths = np.full(d.m, np.nan)
    if d.m == 0:
        return lengths
    H = hashimoto_structure(d)
    indptr, indices = H.indptr, H.indices
    for a in range(d.m):
        target = d.inverse_of[a]
        if target < 0:
            continue
        dist = np.full(d.m, -1, dtype=np.int64)
        dist[a] = 0
        queue = deque([a])
        found = np.inf
        while queue:
            b = queue.popleft()
            if cap is not None and dist[b] >= cap:
                continue
            for c in indices[indptr[b] : indptr[b + 1]]:
                if dist[c] < 0:
                    dist[c] = dist[b] + 1
                    if c == target:
                        found = float(dist[c])
                        queue.clear()
                        break
                    queue.append(c)
        lengths[a] = found
    return lengths


def olg_connectivity_report(
    d: Digraph,
    compute_return_lengths: bool = True,
    return_length_cap: Optional[int] = None,
    check_lemma1: bool = True,
) -> OlgReport:
    """Strong connectivity of the OLG, the sufficient-condition case, and
    per-arc return lengths.

    The OLG connectivity itself is computed for any input; the lemma-case
    label is only meaningful (and only computed) when the digraph itself is
    strongly connected.
    """
    precondition_ok = is_strongly_connected(d)

    if d.m == 0:
        # empty OLG: vacuously strongly connected only in the trivial graph
        return OlgReport(precondition_ok, d.n <= 1, "a" if precondition_ok else None,
                         np.empty(0), False, return_length_cap)

    H = hashimoto_structure(d)
    ncomp = csgraph.connected_components(
        H, directed=True, connection="strong", return_labels=False
    )
    olg_strong = int(ncomp) == 1

    case: Optional[str] = None
    if check_lemma1 and precondition_ok:
        bonds = d.symmetric_bond_pairs()
        if bonds.shape[0] == 0:
            case = "a"
        else:
            case = "b"
            for a, abar in bonds:
                if not (_strong_after_removal(d, int(a)) and _strong_after_removal(d, int(abar))):
                    case = "neither"
                    break

    lengths = None
    truncated = False
    if compute_return_lengths:
        lengths = olg_return_lengths(d, cap=return_length_cap)
        truncated = return_length_cap is not None and bool(np.isinf(lengths).any())

    return OlgReport(precondition_ok, olg_strong, case, lengths, truncated,
                     return_length_cap)


# --- edge-list I/O ---


def write_edge_list(d: Digraph, target, comments: Optional[Sequence[str]] = None) -> None:
    """Write the text edge list: header ``n <count>``, then ``u v d|u`` lines.

    Mutually inverse arcs that are adjacent in arc order are written as a
    single undirected line, so graphs built from undirected edges round-trip
    with identical arc order.
    """
    own = isinstance(target, (str, os.PathLike))
    fh = open(target, "w") if own else target
    try:
        for line in comments or ():
            fh.write(f"# {line}\n")
        fh.write(f"n {d.n}\n")
        a = 0
        while a < d.m:
            if d.inverse_of[a] == a + 1:
                fh.write(f"{d.tails[a]} {d.heads[a]} u\n")
                a += 2
            else:
                fh.write(f"{d.tails[a]} {d.heads[a]} d\n")
                a += 1
    finally:
        if own:
            fh.close()


def read_edge_list(source) -> Digraph:
    """Parse the text edge-list format; raises EdgeListError with line numbers."""
    own = isinstance(source, (str, os.PathLike))
    fh = open(source, "r") if own else source
    try:
        n: Optional[int] = None
        edges: list[tuple] = []
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 2 or parts[0] != "n":
                    raise EdgeListError(f"line {lineno}: expected header 'n <count>', got {raw.rstrip()!r}")
                try:
                    n = int(parts[1])
                except ValueError as exc:
                    raise EdgeListError(f"line {lineno}: bad vertex count {parts[1]!r}") from exc
                if n < 1:
                    raise EdgeListError(f"line {lineno}: vertex count must be >= 1")
                continue
            if len(parts) != 3:
                raise EdgeListError(f"line {lineno}: expected 'tail head d|u', got {raw.rstrip()!r}")
            try:
                t, h = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise EdgeListError(f"line {lineno}: bad endpoints {raw.rstrip()!r}") from exc
            if parts[2] not in ("d", "u"):
                raise EdgeListError(f"line {lineno}: flag must be 'd' or 'u', got {parts[2]!r}")
            edges.append((t, h, parts[2]))
        if n is None:
            raise EdgeListError("missing header line 'n <count>'")
        try:
            return Digraph.from_edge_list(n, edges)
        except EdgeListError as exc:
            raise EdgeListError(str(exc)) from exc
    finally:
        if own:
            fh.close()
