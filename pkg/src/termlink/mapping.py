"""Candidate matching, reranking, thresholding, the longest-match candidate
generation algorithm over the subsumption forest, and final mapping selection.

Rerankers:
  L  min-max normalization of the retrieval scores within one span's results
  C  Dice coefficient over normalized token multisets
  A  weighted mean of centrality, variation, coverage and cohesiveness
     (coverage and cohesiveness weighted twice)
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .index import TermIndex
from .kb import KnowledgeBase, Normalizer, TermEntry
from .textproc import Span, SpanForest, Token

RERANKERS = ("L", "A", "C")
DEFAULT_THRESHOLDS = {"L": 0.0, "A": 0.5, "C": 0.7}
BOUNDARIES = ("ngram", "phrase")
WSD_MODES = ("ukb", "rand")

NEG_INF = float("-inf")


class ConfigError(ValueError):
    """Invalid pipeline configuration value."""


@dataclass(frozen=True)
class PipelineConfig:
    boundary: str = "ngram"
    reranker: str = "C"
    threshold: float | None = None
    wsd: str = "ukb"
    semantic_type_filter: frozenset[str] | None = None
    ngram_range: tuple[int, int] = (1, 5)
    rand_seed: int = 0

    def resolved_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        return DEFAULT_THRESHOLDS[self.reranker]

    def validate(self) -> None:
        if self.boundary not in BOUNDARIES:
            raise ConfigError(
                f"unknown boundary {self.boundary!r}; allowed: {', '.join(BOUNDARIES)}"
            )
        if self.reranker not in RERANKERS:
            raise ConfigError(
                f"unknown reranker {self.reranker!r}; allowed: {', '.join(RERANKERS)}"
            )
        if self.wsd not in WSD_MODES:
            raise ConfigError(
                f"unknown wsd mode {self.wsd!r}; allowed: {', '.join(WSD_MODES)}"
            )
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("threshold must lie in [0, 1]")
        n_min, n_max = self.ngram_range
        if not 1 <= n_min <= n_max:
            raise ConfigError("ngram_range requires 1 <= min <= max")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        allowed = {
            "boundary",
            "reranker",
            "threshold",
            "wsd",
            "semantic_type_filter",
            "ngram_range",
            "rand_seed",
        }
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(
                f"unknown config fields: {', '.join(sorted(unknown))}; "
                f"allowed: {', '.join(sorted(allowed))}"
            )
        kwargs: dict = {}
        if "boundary" in data:
            kwargs["boundary"] = str(data["boundary"])
        if "reranker" in data:
            kwargs["reranker"] = str(data["reranker"])
        if "threshold" in data and data["threshold"] is not None:
            try:
                kwargs["threshold"] = float(data["threshold"])
            except (TypeError, ValueError):
                raise ConfigError("threshold must be a number") from None
        if "wsd" in data:
            kwargs["wsd"] = str(data["wsd"])
        if "semantic_type_filter" in data and data["semantic_type_filter"] is not None:
            tuis = data["semantic_type_filter"]
            if isinstance(tuis, str) or not all(isinstance(t, str) for t in tuis):
                raise ConfigError("semantic_type_filter must be a list of TUI strings")
            kwargs["semantic_type_filter"] = frozenset(tuis)
        if "ngram_range" in data and data["ngram_range"] is not None:
            rng = data["ngram_range"]
            try:
                n_min, n_max = int(rng[0]), int(rng[1])
            except (TypeError, ValueError, IndexError):
                raise ConfigError("ngram_range must be a pair of integers") from None
            kwargs["ngram_range"] = (n_min, n_max)
        if "rand_seed" in data and data["rand_seed"] is not None:
            try:
                kwargs["rand_seed"] = int(data["rand_seed"])
            except (TypeError, ValueError):
                raise ConfigError("rand_seed must be an integer") from None
        config = cls(**kwargs)
        config.validate()
        return config

    def echo(self) -> dict:
        return {
            "boundary": self.boundary,
            "reranker": self.reranker,
            "threshold": self.resolved_threshold(),
            "wsd": self.wsd,
            "semantic_type_filter": (
                sorted(self.semantic_type_filter)
                if self.semantic_type_filter is not None
                else None
            ),
            "ngram_range": list(self.ngram_range),
            "rand_seed": self.rand_seed,
        }


@dataclass
class MappingCandidate:
    span: Span
    cui: str
    entry: TermEntry
    base_score: float
    query_tokens: tuple[str, ...]
    rerank_score: float | None = None


@dataclass(frozen=True)
class Annotation:
    """A finalized mapping, reported against the original (pre-expansion) text."""

    ranges: tuple[tuple[int, int], ...]
    cui: str
    preferred_name: str
    tuis: tuple[str, ...]
    score: float
    matched_term: str

    def to_dict(self) -> dict:
        return {
            "ranges": [list(r) for r in self.ranges],
            "cui": self.cui,
            "preferred_name": self.preferred_name,
            "tuis": list(self.tuis),
            "score": self.score,
            "matched_term": self.matched_term,
        }


def match_span(
    index: TermIndex,
    span: Span,
    normalizer: Normalizer,
    top_k: int = 20,
) -> list[MappingCandidate]:
    """Query the index with the normalized span text; one candidate per
    (entry, cui) pair. A span that normalizes to nothing yields no candidates.
    """
    normalized = normalizer(span.text)
    if not normalized:
        return []
    query_tokens = tuple(normalized.split())
    candidates: list[MappingCandidate] = []
    for result in index.query(normalized, top_k=top_k):
        for cui in sorted(result.entry.cuis):
            candidates.append(
                MappingCandidate(
                    span=span,
                    cui=cui,
                    entry=result.entry,
                    base_score=result.base_score,
                    query_tokens=query_tokens,
                )
            )
    return candidates


def dice_score(span_tokens: tuple[str, ...], term_tokens: tuple[str, ...]) -> float:
    """Dice coefficient over token multisets: 2|A∩B| / (|A|+|B|)."""
    denom = len(span_tokens) + len(term_tokens)
    if denom == 0:
        return 0.0
    inter = sum((Counter(span_tokens) & Counter(term_tokens)).values())
    return 2.0 * inter / denom


def _matched_mask(tokens: tuple[str, ...], other: tuple[str, ...]) -> list[bool]:
    remaining = Counter(other)
    mask = []
    for t in tokens:
        if remaining[t] > 0:
            remaining[t] -= 1
            mask.append(True)
        else:
            mask.append(False)
    return mask


def _segment_weight(mask: list[bool]) -> float:
    # sum of squared lengths of contiguous matched runs, over length squared
    total = 0
    run = 0
    for m in mask:
        run = run + 1 if m else 0
        if m:
            total += 2 * run - 1  # incremental form of run² growth
    return total / (len(mask) ** 2) if mask else 0.0


def aronson_score(span_tokens: tuple[str, ...], term_tokens: tuple[str, ...]) -> float:
    """Weighted mean (centrality + variation + 2·coverage + 2·cohesiveness)/6.

    coverage: mean of matched-token fractions on both sides.
    cohesiveness: mean of per-side Σ(contiguous matched run length²)/length².
    centrality: final tokens agree.
    variation: mean over matched token pairs of 1/(1+normalized edit distance);
    with exact-token matching every matched pair has distance 0, so this is 1
    whenever anything matched.
    """
    if not span_tokens or not term_tokens:
        return 0.0
    inter = sum((Counter(span_tokens) & Counter(term_tokens)).values())
    coverage = 0.5 * (inter / len(span_tokens) + inter / len(term_tokens))
    cohesiveness = 0.5 * (
        _segment_weight(_matched_mask(span_tokens, term_tokens))
        + _segment_weight(_matched_mask(term_tokens, span_tokens))
    )
    centrality = 1.0 if span_tokens[-1] == term_tokens[-1] else 0.0
    variation = 1.0 if inter > 0 else 0.0
    return (centrality + variation + 2.0 * coverage + 2.0 * cohesiveness) / 6.0


def rerank_candidates(candidates: list[MappingCandidate], reranker: str) -> None:
    """Assign rerank_score in [0, 1] to every candidate of one span's result list."""
    if reranker not in RERANKERS:
        raise ConfigError(f"unknown reranker {reranker!r}")
    if not candidates:
        return
    if reranker == "L":
        scores = [c.base_score for c in candidates]
        lo, hi = min(scores), max(scores)
        for c in candidates:
            c.rerank_score = 1.0 if hi == lo else (c.base_score - lo) / (hi - lo)
        return
    for c in candidates:
        term_tokens = tuple(c.entry.normalized.split())
        if reranker == "C":
            c.rerank_score = dice_score(c.query_tokens, term_tokens)
        else:
            c.rerank_score = aronson_score(c.query_tokens, term_tokens)


def apply_threshold(
    candidates: list[MappingCandidate], threshold: float
) -> list[MappingCandidate]:
    return [c for c in candidates if c.rerank_score is not None and c.rerank_score >= threshold]


Matcher = Callable[[Span], list[MappingCandidate]]


def generate_candidates(
    forest: SpanForest,
    matcher: Matcher,
    reranker: str,
    threshold: float,
) -> dict[int, list[MappingCandidate]]:
    """Longest-match candidate generation.

    For each root: rerank and threshold the root's and its direct children's
    results. If the best surviving child score strictly beats the parent's,
    the parent's results are ruled out and each child subtree is processed
    independently; otherwise the parent's results are accepted and none of its
    descendants are visited. A parent with no surviving results never blocks
    its descendants. Returns accepted node id -> surviving candidates.
    """
    cache: dict[int, tuple[list[MappingCandidate], float]] = {}

    def surviving(node: int) -> tuple[list[MappingCandidate], float]:
        if node not in cache:
            candidates = matcher(forest.nodes[node])
            rerank_candidates(candidates, reranker)
            kept = apply_threshold(candidates, threshold)
            best = max((c.rerank_score for c in kept), default=NEG_INF)
            cache[node] = (kept, best)
        return cache[node]

    accepted: dict[int, list[MappingCandidate]] = {}

    def visit(node: int) -> None:
        kept, parent_best = surviving(node)
        kids = forest.children[node]
        child_best = max((surviving(k)[1] for k in kids), default=NEG_INF)
        if child_best > parent_best or parent_best == NEG_INF:
            for k in kids:
                visit(k)
        else:
            accepted[node] = kept

    for root in forest.roots:
        visit(root)
    return accepted


def _merge_ranges(tokens: list[Token], indices: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    """Character ranges of the annotated mention in the original text.

    One range per consecutive token run, with tokens that do not survive
    normalization (function words, punctuation) trimmed off the run edges:
    they are not part of the matched concept mention. Interior ones stay so a
    phrase like "dolor de cabeza" highlights contiguously. Ranges sharing
    provenance (expansion groups) are merged.
    """
    runs: list[list[int]] = []
    for i in indices:
        if runs and i == runs[-1][-1] + 1:
            runs[-1].append(i)
        else:
            runs.append([i])

    raw: list[tuple[int, int]] = []
    for run in runs:
        a, b = 0, len(run) - 1
        while a <= b and not tokens[run[a]].contributes():
            a += 1
        while b >= a and not tokens[run[b]].contributes():
            b -= 1
        if a > b:
            continue
        raw.append((tokens[run[a]].char_start, tokens[run[b]].char_end))
    if not raw:
        raw = [(tokens[r[0]].char_start, tokens[r[-1]].char_end) for r in runs]

    raw.sort()
    merged: list[tuple[int, int]] = []
    for start, end in raw:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return tuple(merged)


def build_annotation(
    candidate: MappingCandidate, tokens: list[Token], kb: KnowledgeBase
) -> Annotation:
    concept = kb.concepts.get(candidate.cui)
    return Annotation(
        ranges=_merge_ranges(tokens, candidate.span.token_indices),
        cui=candidate.cui,
        preferred_name=concept.preferred_name if concept else candidate.entry.term,
        tuis=tuple(sorted(concept.semantic_types)) if concept else (),
        score=candidate.rerank_score if candidate.rerank_score is not None else 0.0,
        matched_term=candidate.entry.term,
    )


TieBreaker = Callable[[list[str]], tuple[str, bool]]


def select_final(
    candidates: list[MappingCandidate],
    tokens: list[Token],
    kb: KnowledgeBase,
    tie_breaker: TieBreaker,
    semantic_type_filter: frozenset[str] | None = None,
) -> tuple[Annotation | None, bool]:
    """Resolve one span's surviving candidates to at most one annotation.

    No candidate -> none; one -> that one; several with a unique maximum ->
    the maximum; a tie at the maximum is delegated to the tie breaker (WSD).
    Returns (annotation, wsd_fallback_used).
    """
    if semantic_type_filter is not None:
        candidates = [
            c
            for c in candidates
            if kb.semantic_types_of(c.cui) & semantic_type_filter
        ]
    if not candidates:
        return None, False

    best = max(c.rerank_score for c in candidates)
    tied = [c for c in candidates if c.rerank_score == best]
    tied_cuis = sorted({c.cui for c in tied})
    fallback = False
    if len(tied_cuis) == 1:
        winner_cui = tied_cuis[0]
    else:
        winner_cui, fallback = tie_breaker(tied_cuis)

    pool = [c for c in tied if c.cui == winner_cui]
    pool.sort(key=lambda c: (len(c.entry.normalized), c.entry.term))
    return build_annotation(pool[0], tokens, kb), fallback


def reference_generate_candidates(
    forest: SpanForest,
    matcher: Matcher,
    reranker: str,
    threshold: float,
) -> dict[int, list[MappingCandidate]]:
    """Plain recursive restatement of the candidate-generation rules, kept
    deliberately naive (no caching) as an oracle for the optimized path."""

    def results_for(node: int) -> tuple[list[MappingCandidate], float]:
        candidates = matcher(forest.nodes[node])
        rerank_candidates(candidates, reranker)
        kept = apply_threshold(candidates, threshold)
        if not kept:
            return [], NEG_INF
        return kept, max(c.rerank_score for c in kept)

    accepted: dict[int, list[MappingCandidate]] = {}

    def walk(node: int) -> None:
        kept, p = results_for(node)
        bests = [results_for(k)[1] for k in forest.children[node]]
        b = max(bests) if bests else NEG_INF
        if p == NEG_INF or b > p:
            for k in forest.children[node]:
                walk(k)
        else:
            accepted[node] = kept

    for root in forest.roots:
        walk(root)
    return accepted
