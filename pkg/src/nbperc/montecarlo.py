"""Monte Carlo site-percolation sampling and threshold fitting.

Each realization opens every vertex v independently with probability p_v,
drawing from a counter-based Philox stream keyed by (seed, realization index),
so realizations are reproducible and order-independent under parallel
execution.  Cluster statistics cover four cluster notions on the open induced
subgraph:

* und: weakly-connected components,
* str: strongly-connected components,
* out/in: forward/backward reachability clusters.

Largest out-cluster sizes are exact: the strongly-connected condensation is
traversed once in reverse topological order, unioning reachable vertex SETS
as packed uint64 bitsets (popcounted at the end).  Accumulating set sizes
instead of sets would double-count overlapping reachable sets; the bitset
union avoids that while staying a single reverse pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .graph import Digraph, as_probabilities
from .spectral import CostBudgetError

MODES = ("und", "out", "in", "str")
RNG_SCHEME = "philox: key=(seed, realization_index), draws in vertex order"

SAC_NODE_BUDGET = 2_000_000


def sample_open(d: Digraph, p, seed: int, index: int = 0) -> np.ndarray:
    """Boolean open-vertex mask for one realization.

    Vertex v is open iff the v-th uniform draw of the stream keyed by
    (seed, index) is below p_v.
    """
    pv = as_probabilities(p, d.n).values
    key = np.array([int(seed), int(index)], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.random(d.n) < pv


# --- induced subgraph machinery ---


def _induced(d: Digraph, mask: np.ndarray):
    open_idx = np.flatnonzero(mask)
    sub_index = np.full(d.n, -1, dtype=np.int64)
    sub_index[open_idx] = np.arange(open_idx.size)
    keep = mask[d.tails] & mask[d.heads]
    st = sub_index[d.tails[keep]]
    sh = sub_index[d.heads[keep]]
    return open_idx, sub_index, st, sh


def _component_labels(k: int, st: np.ndarray, sh: np.ndarray, connection: str):
    if k == 0:
        return 0, np.empty(0, dtype=np.int64)
    if st.size == 0:
        return k, np.arange(k, dtype=np.int64)
    mat = sp.csr_matrix((np.ones(st.size, dtype=np.int8), (st, sh)), shape=(k, k))
    directed = connection == "strong"
    ncomp, labels = csgraph.connected_components(
        mat, directed=directed, connection=connection if directed else "weak",
        return_labels=True,
    )
    return int(ncomp), labels.astype(np.int64)


def _condensation_levels(ncomp: int, ct: np.ndarray, ch: np.ndarray) -> np.ndarray:
    """Longest-path levels of the condensation DAG: level 0 = sinks,
    level(c) = 1 + max level over successors.  Kahn peeling by rounds."""
    level = np.zeros(ncomp, dtype=np.int64)
    if ct.size == 0:
        return level
    remaining = np.bincount(ct, minlength=ncomp)
    order_h = np.argsort(ch, kind="stable")
    head_ptr = np.zeros(ncomp + 1, dtype=np.int64)
    np.cumsum(np.bincount(ch, minlength=ncomp), out=head_ptr[1:])
    level[:] = -1
    frontier = np.flatnonzero(remaining == 0)
    level[frontier] = 0
    lev = 0
    while frontier.size:
        cnt = head_ptr[frontier + 1] - head_ptr[frontier]
        tot = int(cnt.sum())
        if tot == 0:
            break
        starts = np.repeat(head_ptr[frontier], cnt)
        block = np.zeros(frontier.size, dtype=np.int64)
        np.cumsum(cnt[:-1], out=block[1:])
        offs = np.arange(tot, dtype=np.int64) - np.repeat(block, cnt)
        eidx = order_h[starts + offs]
        dec = np.bincount(ct[eidx], minlength=ncomp)
        remaining -= dec
        lev += 1
        frontier = np.flatnonzero((remaining == 0) & (level < 0))
        level[frontier] = lev
    return level


def _reach_closures(k: int, st: np.ndarray, sh: np.ndarray):
    """Exact reachability closures of the open induced digraph.

    Returns (labels, bits, words) where labels maps induced vertices to their
    strongly-connected component and bits[c] is the packed vertex set
    reachable from component c (including itself).
    """
    ncomp, labels = _component_labels(k, st, sh, "strong")
    W = max(1, (k + 63) >> 6)
    bits = np.zeros((ncomp, W), dtype=np.uint64)
    if k == 0:
        return labels, bits
    verts = np.arange(k, dtype=np.uint64)
    np.bitwise_or.at(
        bits,
        (labels, (verts >> np.uint64(6)).astype(np.int64)),
        np.uint64(1) << (verts & np.uint64(63)),
    )
    if st.size == 0 or ncomp == 1:
        return labels, bits
    ct, ch = labels[st], labels[sh]
    ne = ct != ch
    ct, ch = ct[ne], ch[ne]
    if ct.size == 0:
        return labels, bits
    codes = np.unique(ct.astype(np.int64) * ncomp + ch)
    ct = (codes // ncomp).astype(np.int64)
    ch = (codes % ncomp).astype(np.int64)

    level = _condensation_levels(ncomp, ct, ch)
    eorder = np.lexsort((ct, level[ct]))
    et, eh = ct[eorder], ch[eorder]
    lev_of_e = level[et]
    starts = np.flatnonzero(np.diff(lev_of_e, prepend=-1))
    bounds = np.append(starts, et.size)
    for b in range(starts.size):
        s, e = bounds[b], bounds[b + 1]
        t_slice = et[s:e]
        seg = np.flatnonzero(np.diff(t_slice, prepend=-1))
        reduced = np.bitwise_or.reduceat(bits[eh[s:e]], seg, axis=0)
        bits[t_slice[seg]] |= reduced
    return labels, bits


def _closure_sizes(bits: np.ndarray) -> np.ndarray:
    if bits.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    return np.bitwise_count(bits).sum(axis=1).astype(np.int64)


def _bit_test(bits: np.ndarray, comp: int, vertex: int) -> bool:
    return bool((bits[comp, vertex >> 6] >> np.uint64(vertex & 63)) & np.uint64(1))


# --- cluster statistics ---


@dataclass(frozen=True)
class ClusterSizes:
    """Largest/second-largest cluster size and per-probe cluster sizes for one mode."""

    mode: str
    largest: int
    second_largest: Optional[int]
    probe_sizes: np.ndarray


def cluster_stats(
    d: Digraph, open_mask: np.ndarray, probes: Sequence[int] = (), mode: str = "und"
) -> ClusterSizes:
    """Cluster sizes of the open induced subgraph for a single cluster notion.

    und/str partition the open vertices (union-find style components via
    sparse SCC/weak components); out/in are reachability clusters, computed
    exactly for every vertex via one reverse-topological bitset pass over the
    strongly-connected condensation (documented choice: reverse pass, not
    per-source BFS).  Closed probes report size 0.  second_largest is only
    defined for the partition modes.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    mask = np.asarray(open_mask, dtype=bool)
    if mask.shape != (d.n,):
        raise ValueError("open mask has wrong shape")
    probes = np.asarray(list(probes), dtype=np.int64)
    open_idx, sub_index, st, sh = _induced(d, mask)
    k = open_idx.size

    def probe_fill(values_per_open_vertex: np.ndarray) -> np.ndarray:
        out = np.zeros(probes.size, dtype=np.int64)
        for i, v in enumerate(probes):
            if mask[v]:
                out[i] = values_per_open_vertex[sub_index[v]]
        return out

    if mode in ("und", "str"):
        conn = "weak" if mode == "und" else "strong"
        ncomp, labels = _component_labels(k, st, sh, conn)
        sizes = np.bincount(labels, minlength=ncomp) if k else np.empty(0, np.int64)
        largest = int(sizes.max(initial=0))
        second = int(np.partition(sizes, -2)[-2]) if ncomp >= 2 else 0
        per_vertex = sizes[labels] if k else np.empty(0, np.int64)
        return ClusterSizes(mode, largest, second, probe_fill(per_vertex))

    if mode == "in":
        st, sh = sh, st
    labels, bits = _reach_closures(k, st, sh)
    closure = _closure_sizes(bits)
    largest = int(closure.max(initial=0))
    per_vertex = closure[labels] if k else np.empty(0, np.int64)
    return ClusterSizes(mode, largest, None, probe_fill(per_vertex))


# --- SAC counting ---


def _adjacency_lists(d: Digraph) -> List[np.ndarray]:
    return [d.out_neighbors(v) for v in range(d.n)]


def count_sacs(
    d: Digraph,
    open_mask: np.ndarray,
    arc: int,
    length_cap: Optional[int] = None,
    node_budget: int = SAC_NODE_BUDGET,
    by_length: bool = False,
    _adj: Optional[List[np.ndarray]] = None,
):
    """Number of self-avoiding directed cycles through an arc on the open subgraph.

    A self-avoiding cycle visits at least 3 distinct vertices (traversing a
    symmetric bond back and forth backtracks and is not counted).  Exact when
    length_cap >= n.  Enumeration work beyond node_budget neighbor expansions
    raises CostBudgetError; with by_length the return value is an array
    indexed by cycle length in arcs.
    """
    mask = np.asarray(open_mask, dtype=bool)
    cap = d.n if length_cap is None else min(int(length_cap), d.n)
    counts = np.zeros(cap + 1, dtype=np.int64)
    i, j = int(d.tails[arc]), int(d.heads[arc])
    if cap >= 3 and mask[i] and mask[j]:
        adj = _adj if _adj is not None else _adjacency_lists(d)
        visited = np.zeros(d.n, dtype=bool)
        visited[i] = visited[j] = True
        expansions = 0
        stack: List[Tuple[int, Iterable[int]]] = [(j, iter(adj[j]))]
        depth = 2  # vertices on the current path, including i and j
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                expansions += 1
                if expansions > node_budget:
                    raise CostBudgetError(
                        f"SAC enumeration through arc {arc} exceeded {node_budget} expansions"
                    )
                w = int(w)
                if w == i:
                    if depth >= 3:
                        counts[depth] += 1
                    continue
                if depth < cap and not visited[w] and mask[w]:
                    visited[w] = True
                    stack.append((w, iter(adj[w])))
                    depth += 1
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                visited[v] = False
                depth -= 1
        visited[i] = False  # tidy, not strictly needed
    if by_length:
        return counts
    return int(counts.sum())


# --- per-realization statistics ---


@dataclass(frozen=True)
class RealizationStats:
    """All statistics extracted from a single open-vertex realization."""

    seed: int
    index: int
    open_count: int
    largest: Dict[str, int]
    second_largest: Dict[str, int]
    probe_sizes: Optional[Dict[str, np.ndarray]] = None
    pair_connected: Optional[np.ndarray] = None  # (len(pairs), 3): u->v, v->u, two-sided
    sac_counts: Optional[np.ndarray] = None  # (len(arcs), cap+1)

    def check_containment(self) -> bool:
        """str <= out <= und largest-cluster containment."""
        g = self.largest
        ok = True
        if "str" in g and "out" in g:
            ok &= g["str"] <= g["out"]
        if "out" in g and "und" in g:
            ok &= g["out"] <= g["und"]
        return bool(ok)


def realization_stats(
    d: Digraph,
    open_mask: np.ndarray,
    probes: Sequence[int] = (),
    pairs: Sequence[Tuple[int, int]] = (),
    arcs: Sequence[int] = (),
    modes: Sequence[str] = MODES,
    sac_length_cap: Optional[int] = None,
    sac_node_budget: int = SAC_NODE_BUDGET,
    seed: int = 0,
    index: int = 0,
    _adj: Optional[List[np.ndarray]] = None,
) -> RealizationStats:
    """Compute all requested statistics for one realization in one pass."""
    mask = np.asarray(open_mask, dtype=bool)
    probes = list(probes)
    pairs = list(pairs)
    arcs = list(arcs)
    open_idx, sub_index, st, sh = _induced(d, mask)
    k = open_idx.size

    largest: Dict[str, int] = {}
    second: Dict[str, int] = {}
    probe_sizes: Dict[str, np.ndarray] = {}

    need_out = "out" in modes or pairs
    str_labels = None
    out_bits = None
    out_labels = None

    def fill(per_vertex: np.ndarray) -> np.ndarray:
        res = np.zeros(len(probes), dtype=np.int64)
        for idx_p, v in enumerate(probes):
            if mask[v]:
                res[idx_p] = per_vertex[sub_index[v]]
        return res

    for mode in modes:
        if mode in ("und", "str"):
            conn = "weak" if mode == "und" else "strong"
            ncomp, labels = _component_labels(k, st, sh, conn)
            sizes = np.bincount(labels, minlength=ncomp) if k else np.empty(0, np.int64)
            largest[mode] = int(sizes.max(initial=0))
            second[mode] = int(np.partition(sizes, -2)[-2]) if ncomp >= 2 else 0
            probe_sizes[mode] = fill(sizes[labels] if k else np.empty(0, np.int64))
            if mode == "str":
                str_labels = labels
        elif mode == "out":
            out_labels, out_bits = _reach_closures(k, st, sh)
            closure = _closure_sizes(out_bits)
            largest["out"] = int(closure.max(initial=0))
            probe_sizes["out"] = fill(closure[out_labels] if k else np.empty(0, np.int64))
        elif mode == "in":
            labels_in, bits_in = _reach_closures(k, sh, st)
            closure = _closure_sizes(bits_in)
            largest["in"] = int(closure.max(initial=0))
            probe_sizes["in"] = fill(closure[labels_in] if k else np.empty(0, np.int64))
        else:
            raise ValueError(f"unknown mode {mode!r}")

    pair_connected = None
    if pairs:
        if out_bits is None:
            out_labels, out_bits = _reach_closures(k, st, sh)
        if str_labels is None:
            _, str_labels = _component_labels(k, st, sh, "strong")
        pair_connected = np.zeros((len(pairs), 3), dtype=np.int8)
        for idx_pair, (u, v) in enumerate(pairs):
            if not (mask[u] and mask[v]):
                continue
            su, sv = int(sub_index[u]), int(sub_index[v])
            uv = _bit_test(out_bits, int(out_labels[su]), sv)
            vu = _bit_test(out_bits, int(out_labels[sv]), su)
            pair_connected[idx_pair, 0] = uv
            pair_connected[idx_pair, 1] = vu
            pair_connected[idx_pair, 2] = str_labels[su] == str_labels[sv]

    sac_counts = None
    if arcs:
        cap = d.n if sac_length_cap is None else int(sac_length_cap)
        adj = _adj if _adj is not None else _adjacency_lists(d)
        sac_counts = np.zeros((len(arcs), cap + 1), dtype=np.int64)
        for idx_arc, a in enumerate(arcs):
            # count_sacs clamps its array at n+1 entries; lengths beyond n
            # cannot occur, so the remaining columns stay zero
            counts = count_sacs(
                d, mask, int(a), length_cap=cap, node_budget=sac_node_budget,
                by_length=True, _adj=adj,
            )
            sac_counts[idx_arc, : counts.size] = counts

    return RealizationStats(
        seed=seed,
        index=index,
        open_count=int(k),
        largest=largest,
        second_largest=second,
        probe_sizes=probe_sizes or None,
        pair_connected=pair_connected,
        sac_counts=sac_counts,
    )


# --- parallel execution plumbing ---

_WORKER_PAYLOAD: dict = {}


def _init_worker(payload: dict) -> None:
    _WORKER_PAYLOAD.clear()
    _WORKER_PAYLOAD.update(payload)
    if payload.get("need_adj"):
        _WORKER_PAYLOAD["adj"] = _adjacency_lists(payload["digraph"])


def _map_indexed(fn, count: int, payload: dict, workers: int):
    """Apply fn(task_index) for 0..count-1, preserving index order.

    Results are identical for any worker count: tasks are independent and the
    reduction is by task index.
    """
    if workers <= 1 or count <= 1:
        _init_worker(payload)
        try:
            return [fn(i) for i in range(count)]
        finally:
            _WORKER_PAYLOAD.clear()
    import multiprocessing as mp

    ctx = mp.get_context("fork")
    chunk = max(1, count // (4 * workers))
    with ctx.Pool(workers, initializer=_init_worker, initargs=(payload,)) as pool:
        return pool.map(fn, range(count), chunksize=chunk)


def _estimate_task(r: int):
    pl = _WORKER_PAYLOAD
    d = pl["digraph"]
    mask = sample_open(d, pl["p"], pl["seed"], r)
    stats = realization_stats(
        d,
        mask,
        probes=pl["probes"],
        pairs=pl["pairs"],
        arcs=pl["arcs"],
        modes=pl["modes"],
        sac_length_cap=pl["sac_cap"],
        sac_node_budget=pl["sac_budget"],
        seed=pl["seed"],
        index=r,
        _adj=pl.get("adj"),
    )
    return (
        stats.open_count,
        [stats.largest[m] for m in pl["modes"]],
        [stats.probe_sizes[m] for m in pl["modes"]] if pl["probes"] else None,
        stats.pair_connected,
        stats.sac_counts,
    )


@dataclass(frozen=True)
class EstimateResult:
    """Monte Carlo means and standard errors from repeated realizations."""

    realizations: int
    seed: int
    modes: Tuple[str, ...]
    probes: Tuple[int, ...]
    pairs: Tuple[Tuple[int, int], ...]
    arcs: Tuple[int, ...]
    chi_mean: Dict[str, np.ndarray]  # per mode, per probe
    chi_se: Dict[str, np.ndarray]
    tau_mean: Optional[np.ndarray]  # (pairs, 3): u->v, v->u, two-sided
    tau_se: Optional[np.ndarray]
    sac_mean: Optional[np.ndarray]  # (arcs, cap+1) per-length means
    sac_se: Optional[np.ndarray]
    sac_total_mean: Optional[np.ndarray]
    sac_total_se: Optional[np.ndarray]
    open_fraction: float


def _mean_se(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=0)
    if values.shape[0] > 1:
        se = values.std(axis=0, ddof=1) / math.sqrt(values.shape[0])
    else:
        se = np.zeros_like(mean, dtype=np.float64)
    return mean, se


def estimate_observables(
    d: Digraph,
    p,
    probes: Sequence[int] = (),
    pairs: Sequence[Tuple[int, int]] = (),
    arcs: Sequence[int] = (),
    realizations: int = 100,
    seed: int = 0,
    modes: Sequence[str] = MODES,
    sac_length_cap: Optional[int] = None,
    sac_node_budget: int = SAC_NODE_BUDGET,
    workers: int = 1,
) -> EstimateResult:
    """Monte Carlo estimates: chi-hat per probe per mode, tau-hat per pair,
    and SAC-count means per arc, each with standard errors."""
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    pv = as_probabilities(p, d.n)
    modes = tuple(modes)
    payload = {
        "digraph": d,
        "p": pv,
        "seed": int(seed),
        "probes": tuple(int(v) for v in probes),
        "pairs": tuple((int(u), int(v)) for u, v in pairs),
        "arcs": tuple(int(a) for a in arcs),
        "modes": modes,
        "sac_cap": sac_length_cap,
        "sac_budget": sac_node_budget,
        "need_adj": bool(arcs),
    }
    rows = _map_indexed(_estimate_task, realizations, payload, workers)

    open_counts = np.array([r[0] for r in rows], dtype=np.float64)
    chi_mean: Dict[str, np.ndarray] = {}
    chi_se: Dict[str, np.ndarray] = {}
    if payload["probes"]:
        for mi, mode in enumerate(modes):
            sizes = np.array([r[2][mi] for r in rows], dtype=np.float64)
            chi_mean[mode], chi_se[mode] = _mean_se(sizes)
    tau_mean = tau_se = None
    if payload["pairs"]:
        ind = np.array([r[3] for r in rows], dtype=np.float64)
        tau_mean, tau_se = _mean_se(ind)
    sac_mean = sac_se = sac_total_mean = sac_total_se = None
    if payload["arcs"]:
        sc = np.array([r[4] for r in rows], dtype=np.float64)
        sac_mean, sac_se = _mean_se(sc)
        totals = sc.sum(axis=2)
        sac_total_mean, sac_total_se = _mean_se(totals)

    return EstimateResult(
        realizations=realizations,
        seed=int(seed),
        modes=modes,
        probes=payload["probes"],
        pairs=payload["pairs"],
        arcs=payload["arcs"],
        chi_mean=chi_mean,
        chi_se=chi_se,
        tau_mean=tau_mean,
        tau_se=tau_se,
        sac_mean=sac_mean,
        sac_se=sac_se,
        sac_total_mean=sac_total_mean,
        sac_total_se=sac_total_se,
        open_fraction=float(open_counts.mean() / d.n),
    )


# --- probability sweeps ---


def _sweep_task(t: int):
    pl = _WORKER_PAYLOAD
    d = pl["digraph"]
    R = pl["realizations"]
    gi, r = divmod(t, R)
    pvec = np.minimum(pl["profile"] * pl["grid"][gi], 1.0)
    mask = sample_open(d, pvec, pl["seed"], t)
    stats = realization_stats(
        d, mask, probes=pl["probes"], modes=pl["modes"], seed=pl["seed"], index=t
    )
    return (
        [stats.largest[m] for m in pl["modes"]],
        [stats.second_largest.get(m, 0) for m in pl["modes"]],
        stats.open_count,
        [stats.probe_sizes[m] for m in pl["modes"]] if pl["probes"] else None,
    )


@dataclass(frozen=True)
class SweepResult:
    """Largest-cluster statistics over a probability grid.

    largest_mean/se[mode] are arrays over the grid; std = se * sqrt(R).
    second_largest_max[mode] (partition modes only) is the max over
    realizations of the second-largest cluster size at each grid point.
    """

    p_values: np.ndarray
    modes: Tuple[str, ...]
    realizations: int
    seed: int
    rng_scheme: str
    largest_mean: Dict[str, np.ndarray]
    largest_se: Dict[str, np.ndarray]
    second_largest_max: Dict[str, np.ndarray]
    open_fraction: np.ndarray
    probes: Tuple[int, ...] = ()
    probe_mean: Optional[Dict[str, np.ndarray]] = None  # (grid, probes)
    probe_se: Optional[Dict[str, np.ndarray]] = None

    def largest_std(self, mode: str) -> np.ndarray:
        return self.largest_se[mode] * math.sqrt(self.realizations)

    def to_rows(self) -> List[dict]:
        rows = []
        for gi, p in enumerate(self.p_values):
            for mode in self.modes:
                row = {
                    "p": float(p),
                    "mode": mode,
                    "mean_largest": float(self.largest_mean[mode][gi]),
                    "se_largest": float(self.largest_se[mode][gi]),
                    "realizations": self.realizations,
                    "max_second_largest": (
                        int(self.second_largest_max[mode][gi])
                        if mode in self.second_largest_max
                        else ""
                    ),
                }
                for pi, v in enumerate(self.probes):
                    row[f"probe_{v}_mean"] = float(self.probe_mean[mode][gi, pi])
                    row[f"probe_{v}_se"] = float(self.probe_se[mode][gi, pi])
                rows.append(row)
        return rows

    @classmethod
    def from_rows(cls, rows: Sequence[dict], seed: int = -1) -> "SweepResult":
        modes = []
        probes: List[int] = []
        for row in rows:
            if row["mode"] not in modes:
                modes.append(row["mode"])
            for key in row:
                if key.startswith("probe_") and key.endswith("_mean"):
                    v = int(key[len("probe_") : -len("_mean")])
                    if v not in probes:
                        probes.append(v)
        p_values = sorted({float(row["p"]) for row in rows})
        index = {p: i for i, p in enumerate(p_values)}
        n_p = len(p_values)
        mean = {m: np.full(n_p, np.nan) for m in modes}
        se = {m: np.full(n_p, np.nan) for m in modes}
        pmean = {m: np.full((n_p, len(probes)), np.nan) for m in modes}
        pse = {m: np.full((n_p, len(probes)), np.nan) for m in modes}
        second: Dict[str, np.ndarray] = {}
        realizations = 0
        for row in rows:
            gi = index[float(row["p"])]
            m = row["mode"]
            mean[m][gi] = float(row["mean_largest"])
            se[m][gi] = float(row["se_largest"])
            realizations = int(row["realizations"])
            s2 = row.get("max_second_largest", "")
            if s2 != "" and s2 is not None:
                second.setdefault(m, np.zeros(n_p, dtype=np.int64))[gi] = int(s2)
            for pi, v in enumerate(probes):
                pmean[m][gi, pi] = float(row[f"probe_{v}_mean"])
                pse[m][gi, pi] = float(row[f"probe_{v}_se"])
        return cls(
            p_values=np.asarray(p_values),
            modes=tuple(modes),
            realizations=realizations,
            seed=seed,
            rng_scheme=RNG_SCHEME,
            largest_mean=mean,
            largest_se=se,
            second_largest_max=second,
            open_fraction=np.full(n_p, np.nan),
            probes=tuple(probes),
            probe_mean=pmean if probes else None,
            probe_se=pse if probes else None,
        )


def sweep(
    d: Digraph,
    p_grid: Sequence[float],
    realizations: int = 120,
    seed: int = 0,
    modes: Sequence[str] = ("out",),
    probes: Sequence[int] = (),
    profile=None,
    workers: int = 1,
) -> SweepResult:
    """Sweep the probability grid, averaging largest-cluster sizes per point.

    p_grid entries are homogeneous probabilities, or scale factors applied to
    the heterogeneous base profile when one is given (clipped at 1).  The
    realization stream index is global: grid point gi, repetition r uses
    stream (seed, gi * realizations + r), so results are deterministic and
    independent of worker count.
    """
    grid = np.asarray(list(p_grid), dtype=np.float64)
    if grid.size == 0:
        raise ValueError("p_grid must be non-empty")
    if realizations < 2:
        raise ValueError("sweep requires realizations >= 2")
    profile_vec = np.ones(d.n) if profile is None else as_probabilities(profile, d.n).values
    if np.any(grid < 0.0):
        raise ValueError("grid values must be >= 0")
    modes = tuple(modes)
    probes = tuple(int(v) for v in probes)
    payload = {
        "digraph": d,
        "grid": grid,
        "profile": profile_vec,
        "realizations": realizations,
        "seed": int(seed),
        "modes": modes,
        "probes": probes,
    }
    rows = _map_indexed(_sweep_task, grid.size * realizations, payload, workers)

    largest_mean: Dict[str, np.ndarray] = {}
    largest_se: Dict[str, np.ndarray] = {}
    second_max: Dict[str, np.ndarray] = {}
    largest = np.array([r[0] for r in rows], dtype=np.float64).reshape(
        grid.size, realizations, len(modes)
    )
    seconds = np.array([r[1] for r in rows], dtype=np.int64).reshape(
        grid.size, realizations, len(modes)
    )
    opens = np.array([r[2] for r in rows], dtype=np.float64).reshape(grid.size, realizations)
    probe_mean: Optional[Dict[str, np.ndarray]] = None
    probe_se: Optional[Dict[str, np.ndarray]] = None
    if probes:
        psizes = np.array([r[3] for r in rows], dtype=np.float64).reshape(
            grid.size, realizations, len(modes), len(probes)
        )
        probe_mean = {}
        probe_se = {}
        for mi, mode in enumerate(modes):
            vals = psizes[:, :, mi, :]
            probe_mean[mode] = vals.mean(axis=1)
            probe_se[mode] = vals.std(axis=1, ddof=1) / math.sqrt(realizations)
    for mi, mode in enumerate(modes):
        vals = largest[:, :, mi]
        largest_mean[mode] = vals.mean(axis=1)
        largest_se[mode] = vals.std(axis=1, ddof=1) / math.sqrt(realizations)
        if mode in ("und", "str"):
            second_max[mode] = seconds[:, :, mi].max(axis=1)
    return SweepResult(
        p_values=grid,
        modes=modes,
        realizations=realizations,
        seed=int(seed),
        rng_scheme=RNG_SCHEME,
        largest_mean=largest_mean,
        largest_se=largest_se,
        second_largest_max=second_max,
        open_fraction=opens.mean(axis=1) / d.n,
        probes=probes,
        probe_mean=probe_mean,
        probe_se=probe_se,
    )


# --- threshold fitting ---


def _weighted_line_fit(x: np.ndarray, y: np.ndarray, sigma: np.ndarray):
    """Weighted least squares y = a x + b; returns (a, b, cov) with cov the
    2x2 parameter covariance (X^T W X)^{-1} from the measurement errors."""
    sigma = np.where(sigma > 0, sigma, np.finfo(float).tiny ** 0.25)
    w = 1.0 / sigma**2
    X = np.stack([x, np.ones_like(x)], axis=1)
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    a, b = cov @ (XtW @ y)
    return float(a), float(b), cov


def _window_std_half_max(stat_std: np.ndarray) -> Tuple[int, int]:
    """Maximal contiguous index window, containing the std peak, where the
    sample std exceeds 50% of its grid maximum.  Returns [lo, hi] inclusive."""
    peak = int(np.argmax(stat_std))
    thresh = 0.5 * stat_std[peak]
    lo = peak
    while lo > 0 and stat_std[lo - 1] > thresh:
        lo -= 1
    hi = peak
    while hi + 1 < stat_std.size and stat_std[hi + 1] > thresh:
        hi += 1
    return lo, hi


WINDOW_RULES = {"std-half-max": _window_std_half_max}


@dataclass(frozen=True)
class SizeFit:
    """Linear fit of the largest-cluster mean within one size's window."""

    size: float
    window_lo: float
    window_hi: float
    n_points: int
    slope: float
    intercept: float
    p_intercept: float
    p_intercept_se: float


@dataclass(frozen=True)
class FitResult:
    """Finite-size threshold extrapolation from per-size pseudo-critical points."""

    mode: str
    window_rule: str
    per_size: Tuple[SizeFit, ...]
    p_c: float
    p_c_se: float
    p_c_quadratic: float  # 1/L^2 (inverse vertex count) extrapolation
    p_c_quadratic_se: float = float("nan")
    extrapolation: str = "linear in 1/L"

    def estimate(self, abscissa: str) -> Tuple[float, float]:
        """(value, se) of the extrapolated threshold on the given abscissa."""
        if abscissa in ("1/L", "linear"):
            return self.p_c, self.p_c_se
        if abscissa in ("1/L^2", "quadratic"):
            return self.p_c_quadratic, self.p_c_quadratic_se
        raise ValueError(f"unknown extrapolation abscissa {abscissa!r}")


def fit_threshold(
    sweeps: Sequence[Tuple[float, SweepResult]],
    mode: str = "out",
    window_rule: str = "std-half-max",
) -> FitResult:
    """Fit per-size pseudo-critical points and extrapolate to infinite size.

    For each system size L: select the grid window by window_rule, fit the
    largest-cluster mean linearly in p (weighted by standard errors), and
    compute the p-axis intercept p(L).  p(L) is then extrapolated linearly in
    1/L; the 1/L^2 extrapolation is reported alongside as a sensitivity check.
    """
    if len(sweeps) < 2:
        raise ValueError("fit_threshold needs at least two system sizes")
    if window_rule not in WINDOW_RULES:
        raise ValueError(f"unknown window rule {window_rule!r}")
    rule = WINDOW_RULES[window_rule]
    fits: List[SizeFit] = []
    for L, sw in sweeps:
        if mode not in sw.largest_mean:
            raise ValueError(f"sweep for size {L} lacks mode {mode!r}")
        mean = sw.largest_mean[mode]
        se = sw.largest_se[mode]
        std = sw.largest_std(mode)
        lo, hi = rule(std)
        n_pts = hi - lo + 1
        if n_pts < 4:
            raise ValueError(
                f"fit window for size {L} has only {n_pts} grid points (need >= 4)"
            )
        x = sw.p_values[lo : hi + 1]
        y = mean[lo : hi + 1]
        s = se[lo : hi + 1]
        a, b, cov = _weighted_line_fit(x, y, s)
        if a <= 0:
            raise ValueError(f"non-positive fit slope for size {L}")
        p_int = -b / a
        grad = np.array([b / a**2, -1.0 / a])
        p_var = float(grad @ cov @ grad)
        fits.append(
            SizeFit(
                size=float(L),
                window_lo=float(x[0]),
                window_hi=float(x[-1]),
                n_points=n_pts,
                slope=a,
                intercept=b,
                p_intercept=float(p_int),
                p_intercept_se=math.sqrt(max(p_var, 0.0)),
            )
        )

    sizes = np.array([f.size for f in fits])
    pL = np.array([f.p_intercept for f in fits])
    pse = np.array([max(f.p_intercept_se, 1e-12) for f in fits])
    _, pc, cov = _weighted_line_fit(1.0 / sizes, pL, pse)
    pc_se = math.sqrt(max(float(cov[1, 1]), 0.0))
    _, pc_quad, cov_quad = _weighted_line_fit(1.0 / sizes**2, pL, pse)
    pc_quad_se = math.sqrt(max(float(cov_quad[1, 1]), 0.0))
    return FitResult(
        mode=mode,
        window_rule=window_rule,
        per_size=tuple(fits),
        p_c=float(pc),
        p_c_se=pc_se,
        p_c_quadratic=float(pc_quad),
        p_c_quadratic_se=float(pc_quad_se),
    )
