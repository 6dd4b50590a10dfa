"""Text processing: tokenization, abbreviation expansion, boundary detection
(n-gram and phrase strategies) and subsumption-forest construction.

A closed-class lexicon (the stopword list) stands in for part-of-speech
tagging: tokens are classified as content, function, punctuation or number.
Phrase chunking is rule-based over those classes.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

from .kb import load_stopwords

KIND_CONTENT = "content"
KIND_FUNCTION = "function"
KIND_PUNCT = "punct"
KIND_NUMBER = "number"

SENTENCE_FINAL = frozenset({".", "?", "!"})
COORDINATORS = frozenset({"y", "o"})

_TOKEN_RE = re.compile(r"\d+(?:[.,]\d+)*|\w+|[^\w\s]")
_NUMBER_RE = re.compile(r"\d+(?:[.,]\d+)*")

_default_function_words: frozenset[str] | None = None


def _function_words() -> frozenset[str]:
    global _default_function_words
    if _default_function_words is None:
        _default_function_words = load_stopwords()
    return _default_function_words


@dataclass(frozen=True)
class Token:
    surface: str
    norm: str
    char_start: int
    char_end: int
    kind: str

    def contributes(self) -> bool:
        """True when the token survives string normalization (content/number)."""
        return self.kind in (KIND_CONTENT, KIND_NUMBER)


@dataclass(frozen=True)
class Span:
    """A candidate mention: an ordered, possibly discontinuous set of tokens."""

    token_indices: tuple[int, ...]
    text: str
    source_strategy: str

    @property
    def contiguous(self) -> bool:
        idx = self.token_indices
        return idx[-1] - idx[0] + 1 == len(idx)


def tokenize(text: str, function_words: frozenset[str] | None = None) -> list[Token]:
    """Split on whitespace/punctuation boundaries and classify each token."""
    if function_words is None:
        function_words = _function_words()
    tokens: list[Token] = []
    for m in _TOKEN_RE.finditer(text):
        surface = m.group(0)
        norm = surface.lower()
        if len(surface) == 1 and not surface.isalnum():
            kind = KIND_PUNCT
        elif _NUMBER_RE.fullmatch(surface):
            kind = KIND_NUMBER
        elif norm in function_words:
            kind = KIND_FUNCTION
        else:
            kind = KIND_CONTENT
        tokens.append(Token(surface, norm, m.start(), m.end(), kind))
    return tokens


def load_abbreviations(path: str | Path) -> dict[str, str]:
    """Load the abbreviation dictionary (TSV: abbreviation<TAB>expansion)."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 tab-separated columns")
        key, expansion = parts[0].strip(), parts[1].strip()
        if not key or not expansion:
            raise ValueError(f"{path}:{lineno}: empty abbreviation or expansion")
        if key in entries:
            raise ValueError(f"{path}:{lineno}: duplicate abbreviation {key!r}")
        entries[key] = expansion
    return entries


def expand_abbreviations(
    tokens: list[Token],
    abbreviations: dict[str, str],
    function_words: frozenset[str] | None = None,
) -> list[Token]:
    """Rewrite abbreviation tokens into their expansions.

    Matching is exact first, then case-insensitive; an adjacent trailing
    period is absorbed into the match. Every output token keeps the original
    character range it came from, so downstream annotations can always be
    reported against the pre-expansion text.
    """
    if function_words is None:
        function_words = _function_words()
    lower_map: dict[str, str] = {}
    for key in sorted(abbreviations):
        lower_map.setdefault(key.lower(), abbreviations[key])

    def lookup(surface: str) -> str | None:
        if surface in abbreviations:
            return abbreviations[surface]
        return lower_map.get(surface.lower())

    out: list[Token] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.kind == KIND_PUNCT:
            out.append(tok)
            i += 1
            continue
        nxt = tokens[i + 1] if i + 1 < len(tokens) else None
        has_period = (
            nxt is not None and nxt.surface == "." and nxt.char_start == tok.char_end
        )
        expansion = None
        consumed = 1
        if has_period:
            expansion = lookup(tok.surface + ".")
            if expansion is not None:
                consumed = 2
        if expansion is None:
            expansion = lookup(tok.surface)
            if expansion is not None and has_period:
                consumed = 2
        if expansion is None:
            out.append(tok)
            i += 1
            continue
        end = tokens[i + consumed - 1].char_end
        for sub in tokenize(expansion, function_words):
            out.append(replace(sub, char_start=tok.char_start, char_end=end))
        i += consumed
    return out


def render_expanded(text: str, tokens: list[Token]) -> str:
    """Rebuild the text with expansions substituted, preserving separators."""
    parts: list[str] = []
    pos = 0
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.char_start > pos:
            parts.append(text[pos : tok.char_start])
        j = i
        while (
            j < len(tokens)
            and tokens[j].char_start == tok.char_start
            and tokens[j].char_end == tok.char_end
        ):
            j += 1
        group = tokens[i:j]
        original = text[tok.char_start : tok.char_end]
        if len(group) == 1 and group[0].surface == original:
            parts.append(original)
        else:
            parts.append(" ".join(t.surface for t in group))
        pos = tok.char_end
        i = j
    parts.append(text[pos:])
    return "".join(parts)


def _sentence_segments(tokens: list[Token], text: str | None) -> list[list[int]]:
    """Maximal runs of token indices not crossing sentence-final punctuation
    or a newline between consecutive tokens."""
    segments: list[list[int]] = []
    current: list[int] = []
    for i, tok in enumerate(tokens):
        if tok.kind == KIND_PUNCT and tok.surface in SENTENCE_FINAL:
            if current:
                segments.append(current)
            current = []
            continue
        if current and text is not None:
            prev = tokens[current[-1]]
            gap_start, gap_end = prev.char_end, tok.char_start
            if gap_end > gap_start and "\n" in text[gap_start:gap_end]:
                segments.append(current)
                current = []
        current.append(i)
    if current:
        segments.append(current)
    return segments


def ngram_spans(
    tokens: list[Token],
    n_min: int = 1,
    n_max: int = 5,
    text: str | None = None,
) -> list[Span]:
    """All contiguous windows of n_min..n_max tokens within one sentence that
    contain at least one content token and have no punctuation at the edges."""
    if not 1 <= n_min <= n_max:
        raise ValueError("require 1 <= n_min <= n_max")
    spans: list[Span] = []
    for segment in _sentence_segments(tokens, text):
        for n in range(n_min, n_max + 1):
            for s in range(len(segment) - n + 1):
                window = segment[s : s + n]
                toks = [tokens[i] for i in window]
                if toks[0].kind == KIND_PUNCT or toks[-1].kind == KIND_PUNCT:
                    continue
                if not any(t.kind == KIND_CONTENT for t in toks):
                    continue
                spans.append(
                    Span(
                        token_indices=tuple(window),
                        text=" ".join(t.surface for t in toks),
                        source_strategy="ngram",
                    )
                )
    return spans


def _content_runs(tokens: list[Token], segment: list[int]) -> list[list[int]]:
    runs: list[list[int]] = []
    current: list[int] = []
    for i in segment:
        if tokens[i].kind == KIND_CONTENT:
            current.append(i)
        else:
            if current:
                runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def phrase_spans(tokens: list[Token], text: str | None = None) -> list[Span]:
    """Rule-based nominal-phrase candidates.

    Base phrases are maximal content runs joined across single function words.
    Every base phrase and every contiguous sub-run of each content run is
    emitted. A coordination token ("y"/"o"/comma) between two content runs
    additionally yields discontinuous spans distributing the shared head:
    the left run minus its final token combined with the right run, and the
    left run combined with the right run minus its leading token.
    """
    spans: dict[tuple[int, ...], Span] = {}

    def emit(indices: Iterable[int]) -> None:
        idx = tuple(sorted(set(indices)))
        if not idx or idx in spans:
            return
        if not any(tokens[i].kind == KIND_CONTENT for i in idx):
            return
        spans[idx] = Span(
            token_indices=idx,
            text=" ".join(tokens[i].surface for i in idx),
            source_strategy="phrase",
        )

    for segment in _sentence_segments(tokens, text):
        runs = _content_runs(tokens, segment)
        if not runs:
            continue
        pos_in_segment = {i: p for p, i in enumerate(segment)}

        # Join content runs across single function tokens into base phrases.
        base: list[int] = list(runs[0])
        for prev, nxt in zip(runs, runs[1:]):
            gap = segment[pos_in_segment[prev[-1]] + 1 : pos_in_segment[nxt[0]]]
            if len(gap) == 1 and tokens[gap[0]].kind == KIND_FUNCTION:
                base.extend(gap)
                base.extend(nxt)
            else:
                emit(base)
                base = list(nxt)
        emit(base)

        # All contiguous sub-runs of each content run.
        for run in runs:
            for a in range(len(run)):
                for b in range(a + 1, len(run) + 1):
                    emit(run[a:b])

        # Coordination: distribute the shared head over the conjuncts.
        for left, right in zip(runs, runs[1:]):
            gap = segment[pos_in_segment[left[-1]] + 1 : pos_in_segment[right[0]]]
            if len(gap) != 1:
                continue
            g = tokens[gap[0]]
            is_coord = (g.kind == KIND_FUNCTION and g.norm in COORDINATORS) or (
                g.kind == KIND_PUNCT and g.surface == ","
            )
            if not is_coord:
                continue
            if len(left) >= 2:
                emit(left[:-1] + right)
            if len(right) >= 2:
                emit(left + right[1:])

    return list(spans.values())


@dataclass
class SpanForest:
    """Spans ordered by strict token-set inclusion into oriented trees."""

    nodes: list[Span]
    parent: list[int | None]
    children: list[list[int]]
    roots: list[int]


def build_subsumption_forest(spans: list[Span]) -> SpanForest:
    """Order spans into trees: each span's parent is its smallest strict
    superset (ties broken by token indices), so no intermediate span can sit
    between a parent and child. Overlapping, non-nested spans become separate
    roots or siblings.
    """
    unique: dict[tuple[int, ...], Span] = {}
    for span in spans:
        unique.setdefault(span.token_indices, span)
    nodes = [unique[k] for k in sorted(unique)]
    sets = [frozenset(n.token_indices) for n in nodes]

    parent: list[int | None] = [None] * len(nodes)
    children: list[list[int]] = [[] for _ in nodes]
    for i, child_set in enumerate(sets):
        best: int | None = None
        for j, cand_set in enumerate(sets):
            if i == j or not (child_set < cand_set):
                continue
            if best is None or (len(cand_set), nodes[j].token_indices) < (
                len(sets[best]),
                nodes[best].token_indices,
            ):
                best = j
        parent[i] = best
        if best is not None:
            children[best].append(i)

    roots = [i for i, p in enumerate(parent) if p is None]
    return SpanForest(nodes=nodes, parent=parent, children=children, roots=roots)
