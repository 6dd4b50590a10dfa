"""Inverted index over normalized terms with BM25-ranked retrieval.

Stands in for the off-the-shelf search engine: token posting lists over the
normalized term strings, BM25 scoring (k1=1.2, b=0.75) summed across query
tokens, deterministic tie-breaking.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass

from .kb import TermEntry

log = logging.getLogger(__name__)

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
DEFAULT_TOP_K = 20


class IndexError_(Exception):
    """Fatal index construction failure."""


@dataclass(frozen=True)
class QueryResult:
    entry: TermEntry
    base_score: float


class TermIndex:
    """Immutable after construction; concurrent read-only queries are safe."""

    def __init__(
        self,
        entries: list[TermEntry],
        k1: float = DEFAULT_K1,
        b: float = DEFAULT_B,
    ):
        if not entries:
            raise IndexError_("cannot build an index from an empty entry list")
        self.k1 = k1
        self.b = b
        self.entries: list[TermEntry] = []
        self._tfs: list[Counter] = []
        self._lengths: list[int] = []
        self._postings: dict[str, list[int]] = {}
        self.skipped_empty = 0

        for entry in entries:
            tokens = entry.normalized.split()
            if not tokens:
                self.skipped_empty += 1
                continue
            eid = len(self.entries)
            self.entries.append(entry)
            tf = Counter(tokens)
            self._tfs.append(tf)
            self._lengths.append(len(tokens))
            for token in tf:
                self._postings.setdefault(token, []).append(eid)

        if self.skipped_empty:
            log.warning("excluded %d entries with empty normalized form", self.skipped_empty)
        if not self.entries:
            raise IndexError_("all entries had empty normalized forms")

        n = len(self.entries)
        self._avg_len = sum(self._lengths) / n
        # Lucene-style BM25 idf: ln(1 + (N - df + 0.5)/(df + 0.5)), always > 0.
        self._idf = {
            token: math.log(1.0 + (n - len(post) + 0.5) / (len(post) + 0.5))
            for token, post in self._postings.items()
        }

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def token_count(self) -> int:
        return len(self._postings)

    def posting_list(self, token: str) -> list[int]:
        return list(self._postings.get(token, []))

    def _score_entry(self, query_tokens: list[str], eid: int) -> float:
        tf = self._tfs[eid]
        norm = self.k1 * (1.0 - self.b + self.b * self._lengths[eid] / self._avg_len)
        score = 0.0
        for token in query_tokens:
            f = tf.get(token, 0)
            if f:
                score += self._idf[token] * f * (self.k1 + 1.0) / (f + norm)
        return score

    def base_score(self, query_tokens: list[str], entry_id: int) -> float:
        """BM25 of one entry for the given normalized query tokens; 0 iff no overlap."""
        return self._score_entry(query_tokens, entry_id)

    def query(self, span_text: str, top_k: int = DEFAULT_TOP_K) -> list[QueryResult]:
        """Ranked entries sharing at least one token with the normalized query.

        Ties broken by shorter normalized term, then lexicographic term, so two
        identical queries against the same index return identical orderings.
        """
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        query_tokens = span_text.split()
        if not query_tokens:
            return []
        candidate_ids: set[int] = set()
        for token in set(query_tokens):
            candidate_ids.update(self._postings.get(token, ()))
        if not candidate_ids:
            return []
        scored = [
            (self._score_entry(query_tokens, eid), eid) for eid in candidate_ids
        ]
        scored.sort(
            key=lambda pair: (
                -pair[0],
                len(self.entries[pair[1]].normalized),
                self.entries[pair[1]].term,
            )
        )
        return [
            QueryResult(entry=self.entries[eid], base_score=score)
            for score, eid in scored[:top_k]
        ]


def build_index(entries: list[TermEntry], k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> TermIndex:
    return TermIndex(entries, k1=k1, b=b)
