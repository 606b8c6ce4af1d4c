"""Seeded random (digraph, p) corpus for validation suites.

The corpus mixes structure classes so that every bound and identity gets
exercised: plain digraphs, undirected graphs, mixed graphs with some
symmetric bonds, strongly connected digraphs (directed cycle backbone), and
leafless undirected cores (cycle plus chords, the class where the
non-backtracking spectral gap is strict).  Generation is deterministic in
the seed; items carry their own probability vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .graph import Digraph

KINDS = (
    "digraph",
    "oriented",
    "undirected",
    "mixed",
    "strong-digraph",
    "undirected-core",
)
DEFAULT_SEED = 20240901


@dataclass(frozen=True)
class CorpusItem:
    index: int
    kind: str
    digraph: Digraph
    p: np.ndarray

    @property
    def label(self) -> str:
        return f"corpus-{self.index:04d}-{self.kind}-n{self.digraph.n}"


def _dedupe(n: int, tails: np.ndarray, heads: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    codes = np.unique(tails.astype(np.int64) * n + heads.astype(np.int64))
    return codes // n, codes % n


def random_digraph(rng: np.random.Generator, n: int, kind: str) -> Digraph:
    """One random graph of the requested structure class; at least one arc."""
    if kind not in KINDS:
        raise ValueError(f"unknown corpus kind: {kind!r}")
    while True:
        density = float(rng.uniform(0.15, 0.5))
        mask = rng.random((n, n)) < density
        np.fill_diagonal(mask, False)
        if kind == "undirected":
            mask = mask | mask.T
        elif kind == "mixed":
            mask = mask | (mask.T & (rng.random((n, n)) < 0.5))
        elif kind == "oriented":
            # at most one arc per vertex pair: no symmetric bonds possible
            flip = rng.random((n, n)) < 0.5
            upper = np.triu(mask | mask.T, 1)
            mask = (upper & flip) | (upper & ~flip).T
        tails, heads = np.nonzero(mask)
        if kind == "strong-digraph":
            perm = rng.permutation(n)
            tails = np.concatenate([tails, perm])
            heads = np.concatenate([heads, np.roll(perm, -1)])
        elif kind == "undirected-core":
            perm = rng.permutation(n)
            ct, ch = perm, np.roll(perm, -1)
            sym_t = np.concatenate([tails, heads, ct, ch])
            sym_h = np.concatenate([heads, tails, ch, ct])
            tails, heads = sym_t, sym_h
        if n > 1:
            tails, heads = _dedupe(n, tails, heads)
            loops = tails != heads
            tails, heads = tails[loops], heads[loops]
        if tails.size:
            return Digraph(n, tails, heads)


def random_probabilities(
    rng: np.random.Generator, n: int, p_low: float, p_high: float
) -> np.ndarray:
    """Heterogeneous by default; occasionally homogeneous for coverage."""
    if rng.random() < 0.15:
        return np.full(n, float(rng.uniform(p_low, p_high)))
    return rng.uniform(p_low, p_high, n)


def corpus(
    count: int,
    seed: int = DEFAULT_SEED,
    n_min: int = 3,
    n_max: int = 12,
    p_low: float = 0.05,
    p_high: float = 0.95,
    kinds: Optional[Tuple[str, ...]] = None,
) -> List[CorpusItem]:
    """Deterministic list of `count` random (digraph, p) instances."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if not (0.0 <= p_low <= p_high <= 1.0):
        raise ValueError("need 0 <= p_low <= p_high <= 1")
    kinds = tuple(kinds) if kinds is not None else KINDS
    rng = np.random.default_rng(seed)
    items: List[CorpusItem] = []
    for index in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        kind = kinds[index % len(kinds)]
        d = random_digraph(rng, n, kind)
        p = random_probabilities(rng, n, p_low, p_high)
        items.append(CorpusItem(index=index, kind=kind, digraph=d, p=p))
    return items
