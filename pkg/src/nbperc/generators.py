"""Deterministic graph family generators.

Every generator is a pure function of its parameters and seed.  Randomized
families draw from a counter-based Philox stream keyed by the seed, so the
same spec always reproduces the same digraph.

Families:

* two_region(L, d1, d2): 2L directed L-cycles arranged in a ring; every
  vertex of cycle i sends D_i extra arcs into cycle i+1 (D_i = d1-1 on the
  first L cycles, d2-1 on the rest), assigned as D_i random perfect matchings
  so each cycle-(i+1) vertex receives exactly D_i of them.  Strongly
  connected, girth L, no symmetric bonds.
* rooted_tree(D, r): the depth-r D-ary rooted tree as an undirected graph.
* tree_closed(d, r, variant): the depth-r tree in which the root has d
  children and interior vertices d-1 children; variant 'a' is the plain
  tree, 'b' pairs the leaves into degree-2 vertices, 'c' adds d-1 leaf
  matchings to make the graph d-regular.
* torus(dims): periodic hypercubic lattice, 2*len(dims)-regular.
* cycle, complete, random_regular: test plumbing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph import Digraph


def _rng(seed: Optional[int]) -> np.random.Generator:
    if seed is None:
        seed = 0
    return np.random.Generator(np.random.Philox(key=int(seed)))


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative description of a generated graph (echoed into manifests)."""

    family: str
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None


def two_region(L: int, d1: int, d2: int, seed: Optional[int] = 0) -> Digraph:
    """Ring of 2L directed L-cycles with region degrees d1 and d2.

    Vertex (c, k) = c*L + k sits at position k of cycle c.  Cycle arcs go
    (c, k) -> (c, k+1 mod L); cross arcs go from cycle c to cycle c+1 mod 2L,
    D_c independent random perfect matchings between the two vertex sets,
    resampled on duplicate-arc collisions.  Every cycle-(c+1) vertex then has
    in-degree D_c + 1.
    """
    if not (d1 >= d2 > 1):
        raise ValueError("two_region requires d1 >= d2 > 1")
    if L < 3:
        raise ValueError("two_region requires L >= 3")
    rng = _rng(seed)
    tails: list[np.ndarray] = []
    heads: list[np.ndarray] = []
    k = np.arange(L, dtype=np.int64)
    for c in range(2 * L):
        tails.append(c * L + k)
        heads.append(c * L + (k + 1) % L)
    for c in range(2 * L):
        D = (d1 - 1) if c < L else (d2 - 1)
        nxt = ((c + 1) % (2 * L)) * L
        chosen: list[np.ndarray] = []
        for _ in range(D):
            for _attempt in range(1000):
                pi = rng.permutation(L)
                if all(not np.any(pi == q) for q in chosen):
                    chosen.append(pi)
                    break
            else:
                raise RuntimeError("could not sample disjoint matchings")
        for pi in chosen:
            tails.append(c * L + k)
            heads.append(nxt + pi)
    return Digraph(2 * L * L, np.concatenate(tails), np.concatenate(heads))


def rooted_tree(D: int, r: int) -> Digraph:
    """Depth-r D-ary rooted tree (undirected); vertex 0 is the root.

    Vertex count is (D^(r+1) - 1)/(D - 1) for D >= 2, r + 1 for D = 1.
    Children of u are D*u + 1 .. D*u + D (heap layout, breadth-first levels).
    """
    if D < 1 or r < 0:
        raise ValueError("rooted_tree requires D >= 1, r >= 0")
    n = r + 1 if D == 1 else (D ** (r + 1) - 1) // (D - 1)
    edges = [((v - 1) // D, v, "u") for v in range(1, n)]
    return Digraph.from_edge_list(n, edges)


def _tree_levels(d: int, r: int):
    """Vertex levels of the degree-d tree: root 0, interior degree d, leaves at depth r."""
    levels = [[0]]
    counter = 1
    for depth in range(1, r + 1):
        width = d * (d - 1) ** (depth - 1)
        levels.append(list(range(counter, counter + width)))
        counter += width
    return levels, counter


def _disjoint_matchings(vertices: Sequence[int], count: int, rng: np.random.Generator):
    """`count` perfect matchings of `vertices` with pairwise distinct pairs."""
    verts = np.asarray(vertices, dtype=np.int64)
    if verts.size % 2:
        raise ValueError(f"cannot match an odd number of leaves ({verts.size})")
    used: set = set()
    matchings = []
    for _ in range(count):
        for _attempt in range(1000):
            perm = verts[rng.permutation(verts.size)]
            pairs = [(int(min(a, b)), int(max(a, b))) for a, b in perm.reshape(-1, 2)]
            if all(p not in used for p in pairs):
                used.update(pairs)
                matchings.append(pairs)
                break
        else:
            raise RuntimeError("could not sample disjoint leaf matchings")
    return matchings


def tree_closed(d: int, r: int, variant: str = "c", seed: Optional[int] = 0) -> Digraph:
    """Degree-d tree of depth r, optionally closed at the leaves.

    variant 'a': the plain tree (non-backtracking spectral radius 0).
    variant 'b': leaves paired into degree-2 vertices by a seeded matching.
    variant 'c': d-1 seeded leaf matchings, making the graph d-regular
    (regularity asserted post hoc).  Both closures require an even leaf
    count and reject duplicate edges.
    """
    if d < 3 or r < 1:
        raise ValueError("tree_closed requires d >= 3, r >= 1")
    if variant not in ("a", "b", "c"):
        raise ValueError("variant must be 'a', 'b', or 'c'")
    levels, n = _tree_levels(d, r)
    edges = []
    for depth in range(1, r + 1):
        parents = levels[depth - 1]
        children = levels[depth]
        per_parent = d if depth == 1 else d - 1
        for i, child in enumerate(children):
            edges.append((parents[i // per_parent], child, "u"))
    leaves = levels[r]
    if variant != "a":
        rng = _rng(seed)
        count = 1 if variant == "b" else d - 1
        for pairs in _disjoint_matchings(leaves, count, rng):
            edges.extend((a, b, "u") for a, b in pairs)
    g = Digraph.from_edge_list(n, edges)
    if variant == "c":
        deg = g.out_degree
        if not bool((deg == d).all()):
            raise RuntimeError("variant-c closure failed to be d-regular")
    return g


def torus(dims: Sequence[int]) -> Digraph:
    """Periodic hypercubic lattice; undirected, 2*len(dims)-regular."""
    dims = [int(s) for s in dims]
    if not dims or any(s < 3 for s in dims):
        raise ValueError("torus requires every side >= 3")
    coords = np.indices(dims).reshape(len(dims), -1)
    base = np.ravel_multi_index(coords, dims)
    edges = []
    for axis in range(len(dims)):
        nb = coords.copy()
        nb[axis] = (nb[axis] + 1) % dims[axis]
        heads = np.ravel_multi_index(nb, dims)
        edges.extend((int(u), int(v), "u") for u, v in zip(base, heads))
    return Digraph.from_edge_list(int(np.prod(dims)), edges)


def cycle(n: int) -> Digraph:
    """Undirected n-cycle."""
    if n < 3:
        raise ValueError("cycle requires n >= 3")
    return Digraph.from_edge_list(n, [(i, (i + 1) % n, "u") for i in range(n)])


def complete(n: int) -> Digraph:
    """Complete undirected graph K_n."""
    if n < 2:
        raise ValueError("complete requires n >= 2")
    return Digraph.from_edge_list(n, [(i, j, "u") for i in range(n) for j in range(i + 1, n)])


def random_regular(n: int, d: int, seed: Optional[int] = 0) -> Digraph:
    """Random d-regular undirected graph by rejection-sampled stub matching."""
    if d < 1 or d >= n or (n * d) % 2:
        raise ValueError("random_regular requires 1 <= d < n with n*d even")
    rng = _rng(seed)
    for _attempt in range(2000):
        stubs = np.repeat(np.arange(n, dtype=np.int64), d)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        a = np.minimum(pairs[:, 0], pairs[:, 1])
        b = np.maximum(pairs[:, 0], pairs[:, 1])
        if np.any(a == b):
            continue
        code = a * n + b
        if np.unique(code).size != code.size:
            continue
        return Digraph.from_edge_list(n, [(int(u), int(v), "u") for u, v in zip(a, b)])
    raise RuntimeError("could not sample a simple d-regular graph")


_BUILDERS = {
    "two_region": (two_region, True),
    "rooted_tree": (rooted_tree, False),
    "tree_closed": (tree_closed, True),
    "torus": (torus, False),
    "cycle": (cycle, False),
    "complete": (complete, False),
    "random_regular": (random_regular, True),
}


def families() -> list:
    return sorted(_BUILDERS)


def build(spec: GeneratorSpec) -> Digraph:
    """Materialize a GeneratorSpec."""
    if spec.family not in _BUILDERS:
        raise ValueError(f"unknown family {spec.family!r}; known: {families()}")
    fn, takes_seed = _BUILDERS[spec.family]
    kwargs = dict(spec.params)
    if takes_seed:
        kwargs["seed"] = spec.seed
    return fn(**kwargs)
