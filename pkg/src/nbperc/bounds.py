"""Spectral and norm bounds for site percolation observables on digraphs.

Every bound is emitted as a record carrying its applicability status, the
computed value(s), and the spectral inputs used.  A record is applicable only
when all preconditions hold at the computed spectral data, with the power
iteration residual added as a safety margin (a condition rho < 1 is checked
as rho_computed + residual < 1).  Out-of-range values are still reported,
tagged vacuous, since they remain valid statements.

Cluster-size bounds (expected out-/in-cluster sizes):
* adjacency route: uniform height-ratio form and the per-vertex refinement
  from the PF vector of the weighted adjacency matrix;
* non-backtracking route: per-vertex form from the weighted Hashimoto matrix,
  requiring a strongly connected line structure;
* norm route: per-vertex forms from induced one-/infinity-norms, valid on any
  digraph, plus homogeneous threshold certificates;
* q-norm route: bounds on the q-power mean of out-cluster sizes, and the
  sqrt(n) form for undirected graphs.

Pair-connectivity bounds come in adjacency and non-backtracking variants; the
latter uses the minimal return probability, a path-product measure of how
strongly the line structure returns an arc to its inverse.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .graph import (
    Digraph,
    SiteProbabilities,
    as_probabilities,
    directed_distance,
    distances_from,
    hashimoto_structure,
    olg_connectivity_report,
    weighted_adjacency,
    weighted_hashimoto,
)
from .spectral import PerronResult, induced_norm, spectral_radius

REASON_SUPERCRITICAL = "supercritical for this bound"
DEFAULT_DEPTH_CAP = 12
RETURN_SEARCH_BUDGET = 200_000


@dataclass(frozen=True)
class BoundRecord:
    """One evaluated bound: value(s), applicability, and the inputs used."""

    bound_id: str
    statement: str
    per: str  # 'graph' | 'vertex' | 'pair'
    applicable: bool
    reason: Optional[str] = None
    value: object = None  # float, np.ndarray, or None when inapplicable
    inputs: Dict[str, object] = field(default_factory=dict)
    vacuous: Optional[bool] = None
    details: Optional[Tuple[dict, ...]] = None  # per-pair annotations

    def to_dict(self) -> dict:
        return {
            "bound_id": self.bound_id,
            "statement": self.statement,
            "per": self.per,
            "applicable": self.applicable,
            "reason": self.reason,
            "value": _jsonable(self.value),
            "inputs": _jsonable(self.inputs),
            "vacuous": self.vacuous,
            "details": _jsonable(self.details),
        }


@dataclass(frozen=True)
class BoundReport:
    """Full certificate: every bound evaluated on one (digraph, p) input."""

    n: int
    m: int
    p_min: float
    p_max: float
    p_mean: float
    records: Tuple[BoundRecord, ...]
    inputs: Dict[str, object]

    def record(self, bound_id: str) -> BoundRecord:
        for rec in self.records:
            if rec.bound_id == bound_id:
                return rec
        raise KeyError(bound_id)

    def bound_ids(self) -> Tuple[str, ...]:
        return tuple(rec.bound_id for rec in self.records)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "p_min": self.p_min,
            "p_max": self.p_max,
            "p_mean": self.p_mean,
            "inputs": _jsonable(self.inputs),
            "records": [rec.to_dict() for rec in self.records],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _jsonable(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    return str(obj)


def _vacuous(values, threshold: float) -> bool:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    finite = arr[np.isfinite(arr)]
    if finite.size == 0:
        return bool(arr.size > 0)  # all inf/nan values carry no information
    return bool(np.any(finite > threshold + 1e-12)) or bool(
        np.any(~np.isfinite(arr))
    )


class SpectralCache:
    """Shared lazily-computed spectral data for one (digraph, p) pair."""

    def __init__(self, d: Digraph, p):
        self.d = d
        self.p = as_probabilities(p, d.n)
        self._store: Dict[str, object] = {}

    def _get(self, key: str, fn):
        if key not in self._store:
            self._store[key] = fn()
        return self._store[key]

    @property
    def A_p(self) -> sp.csr_matrix:
        return self._get("A_p", lambda: weighted_adjacency(self.d, self.p))

    @property
    def H_p(self) -> sp.csr_matrix:
        return self._get("H_p", lambda: weighted_hashimoto(self.d, self.p))

    @property
    def adjacency(self) -> PerronResult:
        return self._get("adjacency", lambda: spectral_radius(self.A_p))

    @property
    def hashimoto(self) -> PerronResult:
        return self._get("hashimoto", lambda: spectral_radius(self.H_p))

    @property
    def strongly_connected(self) -> bool:
        from .graph import is_strongly_connected

        return self._get("strong", lambda: is_strongly_connected(self.d))

    @property
    def olg_strongly_connected(self) -> bool:
        return self._get(
            "olg_strong",
            lambda: olg_connectivity_report(
                self.d, compute_return_lengths=False, check_lemma1=False
            ).olg_strongly_connected,
        )

    @property
    def norm1_Hp(self) -> float:
        return self._get("norm1_Hp", lambda: induced_norm(self.H_p, 1))

    @property
    def norminf_Hp(self) -> float:
        return self._get("norminf_Hp", lambda: induced_norm(self.H_p, np.inf))

    @property
    def H_structure(self) -> sp.csr_matrix:
        return self._get("H_structure", lambda: hashimoto_structure(self.d))

    def qnorm_Ap(self, q) -> Tuple[float, float]:
        """(norm, gate margin) of the weighted adjacency matrix."""
        key = f"qnorm_{q}"

        def compute():
            if q == 2:
                gram = (self.A_p.T @ self.A_p).tocsr()
                res = spectral_radius(gram)
                return math.sqrt(max(res.rho, 0.0)), math.sqrt(
                    max(res.rho, 0.0) + res.residual
                ) - math.sqrt(max(res.rho, 0.0))
            return induced_norm(self.A_p, q), 0.0

        return self._get(key, compute)

    def return_probability(self, depth_cap: int = DEFAULT_DEPTH_CAP):
        key = f"return_{depth_cap}"
        return self._get(
            key,
            lambda: minimal_return_probability(
                self.d, self.p, lam=self.hashimoto.rho, depth_cap=depth_cap
            ),
        )


def _gate_rho(res: PerronResult) -> Optional[str]:
    """Reason string when a rho < 1 precondition fails, else None."""
    if not res.converged:
        return f"spectral iteration did not converge (residual {res.residual:.3e})"
    if res.rho + res.residual >= 1.0:
        return REASON_SUPERCRITICAL
    return None


# --- cluster-size bounds, adjacency route ---


def bound_chi_out_adjacency(d: Digraph, p, cache: Optional[SpectralCache] = None) -> List[BoundRecord]:
    """Expected-cluster-size bounds from the weighted adjacency matrix:
    uniform height-ratio form and per-vertex PF-vector form, out and in."""
    cache = cache or SpectralCache(d, p)
    res = cache.adjacency
    rho = res.rho
    base_inputs = {"rho_A_p": rho, "residual": res.residual}
    records: List[BoundRecord] = []

    reason = None
    if not cache.strongly_connected:
        reason = "graph not strongly connected"
    else:
        reason = _gate_rho(res)

    specs = [
        ("chi-out-adjacency-uniform", "graph",
         "expected out-cluster size at any vertex <= gamma_R / (1 - rho(A_p))",
         res.gamma_R, res.right_vec),
        ("chi-in-adjacency-uniform", "graph",
         "expected in-cluster size at any vertex <= gamma_L / (1 - rho(A_p))",
         res.gamma_L, res.left_vec),
    ]
    for bound_id, per, stmt, gamma, vec in specs:
        rec_reason = reason
        if rec_reason is None and not math.isfinite(gamma):
            rec_reason = "infinite height ratio"
        if rec_reason is not None:
            records.append(BoundRecord(bound_id, stmt, per, False, rec_reason,
                                       inputs=dict(base_inputs)))
            continue
        value = gamma / (1.0 - rho)
        records.append(BoundRecord(
            bound_id, stmt, per, True, None, value,
            inputs={**base_inputs, "gamma": gamma},
            vacuous=_vacuous(value, d.n),
        ))

    pvals = cache.p.values
    vec_specs = [
        ("chi-out-adjacency-vertex",
         "expected out-cluster size at v <= sqrt(p_v) xi_R[v] / min(xi_R) / (1 - rho(A_p))",
         res.right_vec),
        ("chi-in-adjacency-vertex",
         "expected in-cluster size at v <= sqrt(p_v) xi_L[v] / min(xi_L) / (1 - rho(A_p))",
         res.left_vec),
    ]
    for bound_id, stmt, vec in vec_specs:
        rec_reason = reason
        if rec_reason is None and np.min(vec) <= 0.0:
            rec_reason = "PF vector has zero components"
        if rec_reason is not None:
            records.append(BoundRecord(bound_id, stmt, "vertex", False, rec_reason,
                                       inputs=dict(base_inputs)))
            continue
        value = np.sqrt(pvals) * vec / np.min(vec) / (1.0 - rho)
        records.append(BoundRecord(
            bound_id, stmt, "vertex", True, None, value,
            inputs=dict(base_inputs), vacuous=_vacuous(value, d.n),
        ))
    return records


# --- cluster-size bounds, non-backtracking route ---


def bound_chi_out_hashimoto(d: Digraph, p, cache: Optional[SpectralCache] = None) -> List[BoundRecord]:
    """Per-vertex expected-cluster-size bounds from the weighted Hashimoto
    matrix; they need a strongly connected line structure."""
    cache = cache or SpectralCache(d, p)
    res = cache.hashimoto
    rho = res.rho
    base_inputs = {"rho_H_p": rho, "residual": res.residual}
    reason = None
    if not cache.strongly_connected:
        reason = "graph not strongly connected"
    elif not cache.olg_strongly_connected:
        reason = "line structure not strongly connected"
    else:
        reason = _gate_rho(res)

    records: List[BoundRecord] = []
    specs = [
        ("chi-out-hashimoto-vertex",
         "expected out-cluster size at v <= 1 + od(v) gamma(eta_R) / (1 - rho(H_p))",
         res.gamma_R, d.out_degree),
        ("chi-in-hashimoto-vertex",
         "expected in-cluster size at v <= 1 + id(v) gamma(eta_L) / (1 - rho(H_p))",
         res.gamma_L, d.in_degree),
    ]
    for bound_id, stmt, gamma, degree in specs:
        rec_reason = reason
        if rec_reason is None and not math.isfinite(gamma):
            rec_reason = "infinite height ratio"
        if rec_reason is not None:
            records.append(BoundRecord(bound_id, stmt, "vertex", False, rec_reason,
                                       inputs=dict(base_inputs)))
            continue
        value = 1.0 + degree * gamma / (1.0 - rho)
        records.append(BoundRecord(
            bound_id, stmt, "vertex", True, None, value,
            inputs={**base_inputs, "gamma": gamma},
            vacuous=_vacuous(value, d.n),
        ))
    return records


# --- minimal return probability ---


@dataclass(frozen=True)
class ReturnProbability:
    """Per-vertex return-probability floor and its graph-wide minimum.

    p_vertex[j] is NaN when some incoming arc's inverse exists but cannot be
    reached in the line structure (the quantity is then undefined rather than
    guessed).  truncated marks vertices where the path search hit the depth
    cap or budget, so the value is a valid lower bound, possibly loose.
    """

    lam: float
    depth_cap: int
    p_vertex: np.ndarray
    p_min: float
    truncated: bool
    reasons: Tuple[Tuple[int, str], ...]

    @property
    def applicable(self) -> bool:
        return math.isfinite(self.p_min) and self.p_min > 0.0


def _olg_csr(d: Digraph) -> sp.csr_matrix:
    return hashimoto_structure(d).tocsr()


def _max_return_product(
    olg: sp.csr_matrix,
    gain: np.ndarray,
    gain_max: float,
    start: int,
    target: int,
    depth_cap: int,
    budget: int,
) -> Tuple[float, bool]:
    """Maximum product of per-step gains over self-avoiding line-structure
    paths from arc `start` to arc `target`, exploring at most `depth_cap`
    non-target nodes.  Returns (best, exhausted)."""
    indptr, indices = olg.indptr, olg.indices
    best = -1.0
    visited = {start}
    # stack entries: (node, next-neighbor offset, product up to node)
    stack = [(start, indptr[start], gain[start])]
    expansions = 0
    exhausted = False
    while stack:
        node, off, prod = stack[-1]
        if off >= indptr[node + 1]:
            stack.pop()
            visited.discard(node)
            continue
        stack[-1] = (node, off + 1, prod)
        nxt = int(indices[off])
        expansions += 1
        if expansions > budget:
            exhausted = True
            break
        if nxt == target:
            if prod > best:
                best = prod
            continue
        if nxt in visited or len(stack) >= depth_cap:
            continue
        nprod = prod * gain[nxt]
        # pruning: no completion can beat the current best
        if gain_max <= 1.0:
            if nprod <= best:
                continue
        elif nprod * gain_max ** (depth_cap - len(stack) - 1) <= best:
            continue
        visited.add(nxt)
        stack.append((nxt, indptr[nxt], nprod))
    return best, exhausted


def minimal_return_probability(
    d: Digraph,
    p,
    lam: Optional[float] = None,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    budget: int = RETURN_SEARCH_BUDGET,
) -> ReturnProbability:
    """Per-vertex minimal return probability of the weighted line structure.

    For vertex j: the minimum of p_j/lam and, over incoming arcs a = l->j
    whose inverse exists, the best product of p_head/lam factors along
    self-avoiding line-structure paths from a to the inverse arc.  Arcs with
    no inverse contribute p_j/lam.  An existing but unreachable inverse makes
    the vertex value undefined (NaN).  Truncation by depth_cap or budget
    lowers values, which only loosens downstream bounds.
    """
    pv = as_probabilities(p, d.n).values
    if lam is None:
        lam = spectral_radius(weighted_hashimoto(d, pv)).rho
    lam = float(lam)
    n = d.n
    if lam <= 0.0:
        return ReturnProbability(
            lam, depth_cap, np.full(n, np.nan), math.nan, False,
            tuple((j, "zero spectral radius") for j in range(n)),
        )
    olg = _olg_csr(d)
    gain = pv[d.heads] / lam
    gain_max = float(gain.max(initial=0.0))
    p_vertex = np.minimum(pv / lam, np.inf)
    reasons: List[Tuple[int, str]] = []
    truncated = False

    scc_labels = None
    reach_cache: Dict[int, np.ndarray] = {}

    def reachable(a: int, b: int) -> bool:
        nonlocal scc_labels
        if scc_labels is None:
            from scipy.sparse import csgraph

            _, scc_labels = csgraph.connected_components(
                olg, directed=True, connection="strong", return_labels=True
            )
        if scc_labels[a] == scc_labels[b]:
            return True
        if a not in reach_cache:
            from scipy.sparse import csgraph

            dist = csgraph.breadth_first_order(
                olg, a, directed=True, return_predecessors=False
            )
            mask = np.zeros(olg.shape[0], dtype=bool)
            mask[dist] = True
            reach_cache[a] = mask
        return bool(reach_cache[a][b])

    for a in range(d.m):
        inv = int(d.inverse_of[a])
        if inv < 0:
            continue  # no inverse: the p_j/lam term already covers this arc
        j = int(d.heads[a])
        if math.isnan(p_vertex[j]):
            continue
        best, exhausted = _max_return_product(
            olg, gain, gain_max, a, inv, depth_cap, budget
        )
        if exhausted:
            truncated = True
        if best < 0.0:
            if not exhausted and not reachable(a, inv):
                p_vertex[j] = math.nan
                reasons.append((j, "inverse arc unreachable in the line structure"))
                continue
            # reachable but not found within the cap/budget: unknown maximum,
            # floor at zero (a valid lower bound)
            truncated = True
            best = 0.0
        p_vertex[j] = min(p_vertex[j], best)

    p_min = math.nan if np.any(np.isnan(p_vertex)) else float(np.min(p_vertex))
    return ReturnProbability(lam, depth_cap, p_vertex, p_min, truncated, tuple(reasons))


# --- connectivity bounds ---


def default_pairs(d: Digraph, per_distance: int = 2, origin: int = 0) -> List[Tuple[int, int]]:
    """Deterministic connectivity-test pairs stratified by distance from an
    origin vertex, including one unreachable pair when any exists."""
    dist = distances_from(d, origin)
    pairs: List[Tuple[int, int]] = []
    finite = sorted({int(x) for x in dist[np.isfinite(dist)] if x > 0})
    for value in finite:
        verts = np.flatnonzero(dist == value)[:per_distance]
        pairs.extend((origin, int(v)) for v in verts)
    unreachable = np.flatnonzero(np.isinf(dist))
    if unreachable.size:
        pairs.append((origin, int(unreachable[0])))
    return pairs


def bound_connectivity(
    d: Digraph,
    p,
    pairs: Sequence[Tuple[int, int]],
    cache: Optional[SpectralCache] = None,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> List[BoundRecord]:
    """Pair-connection probability bounds.

    Adjacency route: per-direction PF-vector form and its min-direction
    consequence.  Non-backtracking route: min-direction form certified by
    comparing per-vertex sums of the PF vector, scaled by the inverse minimal
    return probability; undirected graphs additionally get the symmetric
    forms of both routes.
    """
    cache = cache or SpectralCache(d, p)
    pairs = [(int(u), int(v)) for u, v in pairs]
    records: List[BoundRecord] = []
    res_a = cache.adjacency
    rho_a = res_a.rho
    sym = d.is_symmetric

    d_uv = np.array([directed_distance(d, u, v) for u, v in pairs], dtype=object)
    d_vu = np.array([directed_distance(d, v, u) for u, v in pairs], dtype=object)

    def rho_pow(rho: float, dist, shift: int = 0):
        if dist is None:
            return 0.0
        e = dist + shift
        if e < 0:
            return 1.0 / rho if rho > 0 else math.inf
        return rho**e

    gate_a = _gate_rho(res_a)

    # per-direction adjacency bounds
    stmt_pair = ("connection probability u->v <= (xi_R[u]/xi_R[v]) rho(A_p)^d(u,v)"
                 " / (1 - rho(A_p)), both directions")
    if gate_a is not None:
        records.append(BoundRecord("tau-adjacency-pair", stmt_pair, "pair", False,
                                   gate_a, inputs={"rho_A_p": rho_a}))
        records.append(BoundRecord(
            "tau-adjacency-min",
            "smaller directed connection probability <= min of the directional bounds",
            "pair", False, gate_a, inputs={"rho_A_p": rho_a}))
    else:
        xi = res_a.right_vec
        values = np.full((len(pairs), 2), np.nan)
        min_values = np.full(len(pairs), np.nan)
        details = []
        min_details = []
        for k, (u, v) in enumerate(pairs):
            det = {"pair": [u, v], "d_uv": d_uv[k], "d_vu": d_vu[k], "tag": None}
            if xi[u] == 0.0 and xi[v] == 0.0:
                det["tag"] = "outside spectral support"
                details.append(det)
                min_details.append(dict(det, direction=None))
                continue
            ruv = xi[u] / xi[v] if xi[v] > 0 else math.inf
            rvu = xi[v] / xi[u] if xi[u] > 0 else math.inf

            def dir_bound(ratio, dist):
                if dist is None:
                    return 0.0
                if math.isinf(ratio):
                    return math.inf
                return ratio * rho_pow(rho_a, dist) / (1.0 - rho_a)

            buv = dir_bound(ruv, d_uv[k])
            bvu = dir_bound(rvu, d_vu[k])
            if d_uv[k] is None or d_vu[k] is None:
                det["tag"] = "unreachable"
            values[k] = (buv, bvu)
            min_values[k] = min(buv, bvu)
            details.append(det)
            min_details.append(dict(det, direction="u->v" if buv <= bvu else "v->u"))
        records.append(BoundRecord(
            "tau-adjacency-pair", stmt_pair, "pair", True, None, values,
            inputs={"rho_A_p": rho_a, "residual": res_a.residual},
            vacuous=_vacuous(values, 1.0), details=tuple(details)))
        records.append(BoundRecord(
            "tau-adjacency-min",
            "smaller directed connection probability <= min of the directional bounds",
            "pair", True, None, min_values,
            inputs={"rho_A_p": rho_a, "residual": res_a.residual},
            vacuous=_vacuous(min_values, 1.0), details=tuple(min_details)))

    # undirected adjacency form
    stmt_und = "connection probability <= rho(A_p)^d(u,v) / (1 - rho(A_p))"
    if not sym:
        records.append(BoundRecord("tau-undirected", stmt_und, "pair", False,
                                   "graph is not undirected"))
    elif gate_a is not None:
        records.append(BoundRecord("tau-undirected", stmt_und, "pair", False,
                                   gate_a, inputs={"rho_A_p": rho_a}))
    else:
        values = np.array([rho_pow(rho_a, d_uv[k]) / (1.0 - rho_a)
                           if d_uv[k] is not None else 0.0
                           for k in range(len(pairs))])
        details = tuple(
            {"pair": [u, v], "d_uv": d_uv[k],
             "tag": "unreachable" if d_uv[k] is None else None}
            for k, (u, v) in enumerate(pairs))
        records.append(BoundRecord(
            "tau-undirected", stmt_und, "pair", True, None, values,
            inputs={"rho_A_p": rho_a, "residual": res_a.residual},
            vacuous=_vacuous(values, 1.0), details=details))

    # non-backtracking route
    res_h = cache.hashimoto
    rho_h = res_h.rho
    gate_h = _gate_rho(res_h)
    hp_inputs = {"rho_H_p": rho_h, "residual": res_h.residual}
    reason_h = None
    rp = None
    if not cache.olg_strongly_connected:
        reason_h = "line structure not strongly connected"
    elif gate_h is not None:
        reason_h = gate_h
    elif rho_h <= 0.0:
        reason_h = "zero spectral radius"
    else:
        rp = cache.return_probability(depth_cap)
        if not rp.applicable:
            reason_h = "minimal return probability not positive"
        else:
            hp_inputs = {**hp_inputs, "P_min": rp.p_min, "lambda": rp.lam,
                         "truncated": rp.truncated}

    stmt_h = ("connection probability in the certified direction <= "
              "2 rho(H_p)^(d-1) / ((1 - rho(H_p)) P_min)")
    stmt_h_und = ("connection probability <= 2 rho(H_p)^(d(u,v)-1)"
                  " / ((1 - rho(H_p)) P_min)")
    if reason_h is not None:
        records.append(BoundRecord("tau-hashimoto-min", stmt_h, "pair", False,
                                   reason_h, inputs=hp_inputs))
        und_reason = "graph is not undirected" if not sym else reason_h
        records.append(BoundRecord("tau-undirected-hashimoto", stmt_h_und, "pair",
                                   False, und_reason, inputs=hp_inputs))
    else:
        eta = res_h.right_vec
        x = np.zeros(d.n)
        np.add.at(x, d.tails, eta)
        scale = 2.0 / ((1.0 - rho_h) * rp.p_min)
        values = np.zeros(len(pairs))
        details = []
        for k, (u, v) in enumerate(pairs):
            if x[u] <= x[v]:
                src, dst, dist, direction = u, v, d_uv[k], "u->v"
            else:
                src, dst, dist, direction = v, u, d_vu[k], "v->u"
            det = {"pair": [u, v], "direction": direction, "d": dist, "tag": None}
            if dist is None:
                values[k] = 0.0
                det["tag"] = "unreachable"
            else:
                values[k] = rho_pow(rho_h, dist, shift=-1) * scale
            details.append(det)
        records.append(BoundRecord(
            "tau-hashimoto-min", stmt_h, "pair", True, None, values,
            inputs=hp_inputs, vacuous=_vacuous(values, 1.0), details=tuple(details)))
        if not sym:
            records.append(BoundRecord("tau-undirected-hashimoto", stmt_h_und,
                                       "pair", False, "graph is not undirected",
                                       inputs=hp_inputs))
        else:
            values = np.array([
                rho_pow(rho_h, d_uv[k], shift=-1) * scale
                if d_uv[k] is not None else 0.0
                for k in range(len(pairs))])
            details = tuple(
                {"pair": [u, v], "d_uv": d_uv[k],
                 "tag": "unreachable" if d_uv[k] is None else None}
                for k, (u, v) in enumerate(pairs))
            records.append(BoundRecord(
                "tau-undirected-hashimoto", stmt_h_und, "pair", True, None, values,
                inputs=hp_inputs, vacuous=_vacuous(values, 1.0), details=details))
    return records


# --- norm bounds ---


def bound_chi_norm1(d: Digraph, p, cache: Optional[SpectralCache] = None) -> List[BoundRecord]:
    """Per-vertex cluster-size bounds from induced norms of the weighted
    Hashimoto matrix, valid on any digraph, plus homogeneous threshold
    certificates from the unweighted norms and the max-degree rule."""
    cache = cache or SpectralCache(d, p)
    records: List[BoundRecord] = []
    norm_specs = [
        ("chi-in-norm1-vertex",
         "expected in-cluster size at j <= 1 + id(j) / (1 - norm1(H_p))",
         cache.norm1_Hp, "norm1_H_p", d.in_degree),
        ("chi-out-norminf-vertex",
         "expected out-cluster size at v <= 1 + od(v) / (1 - norminf(H_p))",
         cache.norminf_Hp, "norminf_H_p", d.out_degree),
    ]
    for bound_id, stmt, norm, norm_name, degree in norm_specs:
        if norm >= 1.0:
            records.append(BoundRecord(bound_id, stmt, "vertex", False,
                                       REASON_SUPERCRITICAL, inputs={norm_name: norm}))
            continue
        value = 1.0 + degree / (1.0 - norm)
        records.append(BoundRecord(
            bound_id, stmt, "vertex", True, None, value,
            inputs={norm_name: norm}, vacuous=_vacuous(value, d.n)))

    hs = cache.H_structure
    n1 = induced_norm(hs, 1)
    ninf = induced_norm(hs, np.inf)
    cert_specs = [
        ("threshold-in-norm1",
         "homogeneous in-cluster percolation threshold >= 1 / norm1(H)", n1,
         {"norm1_H": n1}),
        ("threshold-out-norminf",
         "homogeneous out-cluster percolation threshold >= 1 / norminf(H)", ninf,
         {"norminf_H": ninf}),
    ]
    for bound_id, stmt, norm, inputs in cert_specs:
        value = math.inf if norm == 0.0 else 1.0 / norm
        records.append(BoundRecord(bound_id, stmt, "graph", True, None, value,
                                   inputs=inputs, vacuous=_vacuous(value, 1.0)))
    d_max = int(max(d.out_degree.max(initial=0), d.in_degree.max(initial=0)))
    stmt = "homogeneous percolation threshold >= 1 / (d_max - 1)"
    if d_max <= 1:
        records.append(BoundRecord("threshold-max-degree", stmt, "graph", False,
                                   "maximum degree below 2", inputs={"d_max": d_max}))
    else:
        value = 1.0 / (d_max - 1)
        records.append(BoundRecord("threshold-max-degree", stmt, "graph", True,
                                   None, value, inputs={"d_max": d_max},
                                   vacuous=_vacuous(value, 1.0)))
    return records


def bound_chi_qnorm(d: Digraph, p, q, cache: Optional[SpectralCache] = None) -> List[BoundRecord]:
    """Bound on the q-power mean of out-cluster sizes from the q-norm of the
    weighted adjacency matrix; q = inf bounds the maximum.  For undirected
    graphs with q = 2 the sqrt(n) per-vertex form is also emitted."""
    cache = cache or SpectralCache(d, p)
    qname = "inf" if q in (np.inf, math.inf, "inf") else str(int(q))
    qv = math.inf if qname == "inf" else int(q)
    norm, margin = cache.qnorm_Ap(qv if qname != "inf" else np.inf)
    bound_id = f"chi-out-qmean-{qname}"
    stmt = (f"{qname}-power mean of expected out-cluster sizes"
            f" <= 1 / (1 - qnorm(A_p, {qname}))")
    records: List[BoundRecord] = []
    if norm + margin >= 1.0:
        records.append(BoundRecord(bound_id, stmt, "graph", False,
                                   REASON_SUPERCRITICAL,
                                   inputs={f"qnorm_{qname}_A_p": norm}))
    else:
        value = 1.0 / (1.0 - norm)
        records.append(BoundRecord(bound_id, stmt, "graph", True, None, value,
                                   inputs={f"qnorm_{qname}_A_p": norm},
                                   vacuous=_vacuous(value, d.n)))
    if qname == "2":
        stmt2 = "expected cluster size at any vertex <= sqrt(n) / (1 - rho(A_p))"
        if not d.is_symmetric:
            records.append(BoundRecord("chi-undirected-sqrtn", stmt2, "graph",
                                       False, "graph is not undirected"))
        else:
            res = cache.adjacency
            gate = _gate_rho(res)
            if gate is not None:
                records.append(BoundRecord("chi-undirected-sqrtn", stmt2, "graph",
                                           False, gate,
                                           inputs={"rho_A_p": res.rho}))
            else:
                value = math.sqrt(d.n) / (1.0 - res.rho)
                records.append(BoundRecord(
                    "chi-undirected-sqrtn", stmt2, "graph", True, None, value,
                    inputs={"rho_A_p": res.rho, "residual": res.residual},
                    vacuous=_vacuous(value, d.n)))
    return records


# --- SAC bound ---


def bound_sac(d: Digraph, p, cache: Optional[SpectralCache] = None) -> List[BoundRecord]:
    """Uniform bound on the expected number of self-avoiding cycles through
    any arc; valid on any digraph, connected or not."""
    cache = cache or SpectralCache(d, p)
    res = cache.hashimoto
    stmt = "expected self-avoiding cycles through any arc <= 1 / (1 - rho(H_p))"
    gate = _gate_rho(res)
    if gate is not None:
        return [BoundRecord("chi-sac-uniform", stmt, "graph", False, gate,
                            inputs={"rho_H_p": res.rho})]
    value = 1.0 / (1.0 - res.rho)
    return [BoundRecord("chi-sac-uniform", stmt, "graph", True, None, value,
                        inputs={"rho_H_p": res.rho, "residual": res.residual},
                        vacuous=None)]


# --- uniqueness diagnostic ---


@dataclass(frozen=True)
class UniquenessReport:
    """Composition of the SAC bound with largest-cluster data: when cycle
    counts stay bounded while large clusters appear, any percolating cluster
    is unstable, so the regime is below the uniqueness transition."""

    rho_H_p: float
    residual: float
    sac_bounded: bool
    sac_bound: Optional[float]
    largest_fraction: Optional[float]
    fraction_threshold: float
    flagged: Optional[bool]
    note: str

    def to_dict(self) -> dict:
        return {k: _jsonable(v) for k, v in self.__dict__.items()}


def uniqueness_report(
    d: Digraph,
    p,
    largest_fraction: Optional[float] = None,
    fraction_threshold: float = 0.05,
    cache: Optional[SpectralCache] = None,
) -> UniquenessReport:
    cache = cache or SpectralCache(d, p)
    res = cache.hashimoto
    bounded = res.converged and res.rho + res.residual < 1.0
    sac_bound = 1.0 / (1.0 - res.rho) if bounded else None
    if not bounded:
        flagged: Optional[bool] = False
        note = "cycle susceptibility not certified bounded; diagnostic silent"
    elif largest_fraction is None:
        flagged = None
        note = "no largest-cluster data supplied"
    elif largest_fraction >= fraction_threshold:
        flagged = True
        note = ("large clusters coexist with bounded cycle susceptibility:"
                " any percolating cluster is non-unique")
    else:
        flagged = False
        note = "no large clusters observed"
    return UniquenessReport(
        rho_H_p=res.rho,
        residual=res.residual,
        sac_bounded=bounded,
        sac_bound=sac_bound,
        largest_fraction=largest_fraction,
        fraction_threshold=fraction_threshold,
        flagged=flagged,
        note=note,
    )


# --- orchestrator ---


def evaluate_bounds(
    d: Digraph,
    p,
    pairs: Optional[Sequence[Tuple[int, int]]] = None,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    strict: bool = False,
) -> BoundReport:
    """Evaluate every bound family on one (digraph, p) input.

    Spectral quantities are computed once and shared.  With strict=True an
    unconverged power iteration raises instead of marking records
    inapplicable.
    """
    cache = SpectralCache(d, p)
    pv = cache.p.values
    if pairs is None:
        pairs = default_pairs(d)
    if strict:
        from .spectral import SpectralConvergenceError

        for res, label in ((cache.adjacency, "adjacency"),
                           (cache.hashimoto, "hashimoto")):
            if not res.converged:
                raise SpectralConvergenceError(
                    f"{label} power iteration did not converge"
                    f" (residual {res.residual:.3e})")

    records: List[BoundRecord] = []
    records.extend(bound_chi_out_adjacency(d, pv, cache))
    records.extend(bound_chi_out_hashimoto(d, pv, cache))

    rp = None
    res_h = cache.hashimoto
    stmt_rp = ("per-vertex floor on the weighted probability of returning an"
               " arc to its inverse in the line structure")
    if res_h.rho <= 0.0:
        records.append(BoundRecord("return-probability", stmt_rp, "vertex", False,
                                   "zero spectral radius",
                                   inputs={"rho_H_p": res_h.rho}))
    else:
        rp = cache.return_probability(depth_cap)
        records.append(BoundRecord(
            "return-probability", stmt_rp, "vertex", rp.applicable,
            None if rp.applicable else (
                rp.reasons[0][1] if rp.reasons else "minimal value not positive"),
            rp.p_vertex,
            inputs={"lambda": rp.lam, "depth_cap": depth_cap, "P_min": rp.p_min,
                    "truncated": rp.truncated},
            vacuous=None))

    records.extend(bound_connectivity(d, pv, pairs, cache, depth_cap))
    records.extend(bound_chi_norm1(d, pv, cache))
    for q in (1, 2, np.inf):
        records.extend(bound_chi_qnorm(d, pv, q, cache))
    records.extend(bound_sac(d, pv, cache))

    res_a = cache.adjacency
    inputs = {
        "rho_A_p": res_a.rho,
        "residual_A_p": res_a.residual,
        "gamma_R_A_p": res_a.gamma_R,
        "gamma_L_A_p": res_a.gamma_L,
        "rho_H_p": res_h.rho,
        "residual_H_p": res_h.residual,
        "gamma_R_H_p": res_h.gamma_R,
        "gamma_L_H_p": res_h.gamma_L,
        "norm1_H_p": cache.norm1_Hp,
        "norminf_H_p": cache.norminf_Hp,
        "P_min": rp.p_min if rp is not None else None,
        "strongly_connected": cache.strongly_connected,
        "olg_strongly_connected": cache.olg_strongly_connected,
        "pairs": [list(pr) for pr in pairs],
    }
    return BoundReport(
        n=d.n,
        m=d.m,
        p_min=float(pv.min(initial=1.0) if pv.size else 1.0),
        p_max=float(pv.max(initial=0.0) if pv.size else 0.0),
        p_mean=float(pv.mean()) if pv.size else 0.0,
        records=tuple(records),
        inputs=inputs,
    )
