"""Concept graph construction and Personalized PageRank disambiguation.

Relations are stored directed but the random walk traverses every edge in
both directions; all edges carry weight 1. The walk's teleport distribution
(the personalization) is derived from the document's tokens through the
normalized-term dictionary.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .kb import Relation

log = logging.getLogger(__name__)

DEFAULT_DAMPING = 0.85
DEFAULT_MAX_ITERS = 30
DEFAULT_EPS = 1e-6


class GraphError(Exception):
    """Fatal graph construction failure."""


@dataclass(frozen=True)
class PPRParams:
    damping: float = DEFAULT_DAMPING
    max_iters: int = DEFAULT_MAX_ITERS
    eps: float = DEFAULT_EPS
    seed: int = 0


class ConceptGraph:
    """Directed typed relation graph; immutable after construction."""

    def __init__(self, edges: list[tuple[str, str, str]]):
        if not edges:
            raise GraphError("cannot build a concept graph without edges")
        deduped: dict[tuple[str, str, str], None] = {}
        for cui1, cui2, rtype in edges:
            if cui1 == cui2:
                continue
            deduped.setdefault((cui1, cui2, rtype), None)
        if not deduped:
            raise GraphError("all edges were self-loops")

        self.vertices: list[str] = sorted(
            {c for c1, c2, _ in deduped for c in (c1, c2)}
        )
        self.vindex: dict[str, int] = {c: i for i, c in enumerate(self.vertices)}
        self.edges: list[tuple[int, int, str]] = [
            (self.vindex[c1], self.vindex[c2], rtype) for c1, c2, rtype in deduped
        ]

        n = len(self.vertices)
        pairs = {(i, j) for i, j, _ in self.edges}
        rows = [i for i, j in pairs] + [j for i, j in pairs]
        cols = [j for i, j in pairs] + [i for i, j in pairs]
        adj = sparse.coo_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n, n)
        ).tocsr()
        adj.data[:] = 1.0  # symmetrize collapses antiparallel duplicates
        degrees = np.asarray(adj.sum(axis=0)).ravel()
        self._degrees = degrees
        # Column-stochastic transition operator over the symmetrized graph.
        inv = np.divide(1.0, degrees, out=np.zeros_like(degrees), where=degrees > 0)
        self._transition = (adj.multiply(inv[np.newaxis, :])).tocsr()

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def __contains__(self, cui: str) -> bool:
        return cui in self.vindex


def build_graph(relations: list[Relation]) -> ConceptGraph:
    return ConceptGraph([(r.cui1, r.cui2, r.rtype) for r in relations])


def normalize_personalization(
    graph: ConceptGraph, seeds: dict[str, float]
) -> dict[str, float]:
    """Validate and normalize a personalization vector to sum 1.

    Support must be non-empty, lie inside the graph and carry positive mass.
    """
    filtered = {c: m for c, m in seeds.items() if m > 0}
    if not filtered:
        raise ValueError("personalization support is empty")
    outside = [c for c in filtered if c not in graph.vindex]
    if outside:
        raise ValueError(f"personalization outside graph: {sorted(outside)[:5]}")
    total = sum(filtered.values())
    return {c: m / total for c, m in filtered.items()}


def personalized_pagerank(
    graph: ConceptGraph,
    seeds: dict[str, float],
    damping: float = DEFAULT_DAMPING,
    max_iters: int = DEFAULT_MAX_ITERS,
    eps: float = DEFAULT_EPS,
) -> dict[str, float]:
    """Power iteration of v <- (1-d)·s + d·T·v with the column-stochastic
    transition operator T over the symmetrized graph. Dangling mass (none by
    construction, since every vertex has an edge) would be routed back to the
    seeds. Stops at L1 residual < eps or after max_iters. Returns activations
    normalized to sum exactly 1.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie strictly between 0 and 1")
    seeds = normalize_personalization(graph, seeds)

    n = graph.vertex_count
    s = np.zeros(n)
    for cui, mass in seeds.items():
        s[graph.vindex[cui]] = mass

    dangling = graph._degrees == 0
    v = s.copy()
    for _ in range(max_iters):
        nxt = (1.0 - damping) * s + damping * (graph._transition @ v)
        lost = v[dangling].sum()
        if lost > 0:
            nxt += damping * lost * s
        residual = np.abs(nxt - v).sum()
        v = nxt
        if residual < eps:
            break
    v /= v.sum()
    return {cui: float(v[i]) for cui, i in graph.vindex.items()}


@dataclass(frozen=True)
class Disambiguation:
    cui: str
    fallback: bool


def context_seeds(
    context_tokens: list[str],
    dictionary: dict[str, frozenset[str]],
    graph: ConceptGraph,
) -> dict[str, float]:
    """Uniform personalization mass over every concept reachable from the
    context tokens through the dictionary. May be empty."""
    cuis: set[str] = set()
    for token in context_tokens:
        for cui in dictionary.get(token, ()):
            if cui in graph.vindex:
                cuis.add(cui)
    return {c: 1.0 for c in cuis}


def random_choice(tied_candidates: list[str], seed: int) -> str:
    """Uniform deterministic choice over the tied candidates."""
    if not tied_candidates:
        raise ValueError("no candidates to choose from")
    rng = random.Random(seed)
    return rng.choice(sorted(tied_candidates))


def disambiguate(
    tied_candidates: list[str],
    context_tokens: list[str],
    dictionary: dict[str, frozenset[str]],
    graph: ConceptGraph,
    params: PPRParams = PPRParams(),
    activation: dict[str, float] | None = None,
) -> Disambiguation:
    """Pick the tied candidate with the highest PageRank activation.

    A precomputed activation vector may be supplied (one run per document);
    otherwise one is computed from the context tokens. If the context maps to
    no graph vertex, falls back to a seeded random choice and flags it.
    Activation ties resolve to the lexicographically smaller cui.
    """
    if len(tied_candidates) < 2:
        raise ValueError("disambiguation needs at least two tied candidates")
    if activation is None:
        seeds = context_seeds(context_tokens, dictionary, graph)
        if not seeds:
            return Disambiguation(random_choice(tied_candidates, params.seed), True)
        activation = personalized_pagerank(
            graph, seeds, damping=params.damping, max_iters=params.max_iters, eps=params.eps
        )
    ordered = sorted(set(tied_candidates))
    winner = max(ordered, key=lambda c: activation.get(c, 0.0))
    return Disambiguation(winner, False)
