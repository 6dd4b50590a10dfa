"""End-to-end annotation pipeline: abbreviation expansion, tokenization,
boundary detection, subsumption ordering, candidate generation and final
mapping selection, with one PageRank run per document for tie-breaking.
"""
from __future__ import annotations

import json
import logging
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from . import textproc, wsd
from .index import TermIndex, build_index
from .kb import KnowledgeBase, default_abbreviations_path
from .mapping import (
    Annotation,
    PipelineConfig,
    generate_candidates,
    match_span,
    select_final,
)
from .textproc import Token, load_abbreviations
from .wsd import ConceptGraph, PPRParams, build_graph

log = logging.getLogger(__name__)


@dataclass
class AnnotatedDocument:
    doc_id: str
    text: str
    expanded_text: str
    annotations: list[Annotation]
    timings: dict[str, float] = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    wsd_fallbacks: int = 0

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "text": self.text,
            "annotations": [a.to_dict() for a in self.annotations],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"))


def _span_seed(base_seed: int, doc_id: str, indices: tuple[int, ...]) -> int:
    key = f"{base_seed}|{doc_id}|{','.join(map(str, indices))}"
    return zlib.crc32(key.encode("utf-8"))


class Annotator:
    """Binds a knowledge base with its derived index and concept graph.

    Immutable once constructed; annotate() is reentrant and documents can be
    processed in parallel against one shared instance.
    """

    def __init__(
        self,
        kb: KnowledgeBase,
        abbreviations: dict[str, str] | None = None,
        top_k: int = 20,
        ppr_params: PPRParams = PPRParams(),
    ):
        self.kb = kb
        self.normalizer = kb.normalizer
        self.index: TermIndex = build_index(kb.terms)
        self.graph: ConceptGraph | None = (
            build_graph(kb.relations) if kb.relations else None
        )
        if abbreviations is None:
            abbreviations = load_abbreviations(default_abbreviations_path())
        self.abbreviations = abbreviations
        self.top_k = top_k
        self.ppr_params = ppr_params

        if self.graph is not None:
            missing = sum(1 for c in kb.concepts if c not in self.graph.vindex)
            if missing:
                log.warning(
                    "%d of %d concepts participate in no relation", missing, len(kb.concepts)
                )

    def annotate(
        self,
        text: str,
        config: PipelineConfig = PipelineConfig(),
        doc_id: str = "doc",
    ) -> AnnotatedDocument:
        """Annotate one document. Empty or blank text yields zero annotations."""
        config.validate()
        timings: dict[str, float] = {}
        echo = config.echo()
        if not text.strip():
            return AnnotatedDocument(doc_id, text, text, [], timings, echo)

        t0 = time.perf_counter()
        tokens = textproc.tokenize(text, self.kb.stopwords)
        tokens = textproc.expand_abbreviations(tokens, self.abbreviations, self.kb.stopwords)
        expanded_text = textproc.render_expanded(text, tokens)
        timings["textproc"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        if config.boundary == "ngram":
            n_min, n_max = config.ngram_range
            spans = textproc.ngram_spans(tokens, n_min, n_max, text=text)
        else:
            spans = textproc.phrase_spans(tokens, text=text)
        forest = textproc.build_subsumption_forest(spans)
        timings["boundary"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        accepted = generate_candidates(
            forest,
            lambda span: match_span(self.index, span, self.normalizer, self.top_k),
            config.reranker,
            config.resolved_threshold(),
        )
        timings["matching"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        annotations, fallbacks = self._finalize(
            accepted, forest, tokens, config, doc_id
        )
        timings["selection"] = time.perf_counter() - t0

        return AnnotatedDocument(
            doc_id=doc_id,
            text=text,
            expanded_text=expanded_text,
            annotations=annotations,
            timings=timings,
            config=echo,
            wsd_fallbacks=fallbacks,
        )

    def _finalize(
        self,
        accepted: dict[int, list],
        forest: textproc.SpanForest,
        tokens: list[Token],
        config: PipelineConfig,
        doc_id: str,
    ) -> tuple[list[Annotation], int]:
        ordered_nodes = sorted(accepted, key=lambda n: forest.nodes[n].token_indices)

        activation: dict[str, float] | None = None
        if config.wsd == "ukb" and self.graph is not None:
            tied_nodes = [
                n for n in ordered_nodes if self._has_cui_tie(accepted[n], config)
            ]
            if tied_nodes:
                activation = self._document_activation(tokens, forest, tied_nodes)

        annotations: list[Annotation] = []
        fallbacks = 0
        for node in ordered_nodes:
            span = forest.nodes[node]

            def tie_breaker(tied_cuis: list[str]) -> tuple[str, bool]:
                seed = _span_seed(config.rand_seed, doc_id, span.token_indices)
                if config.wsd == "rand" or self.graph is None:
                    return wsd.random_choice(tied_cuis, seed), config.wsd != "rand"
                if activation is None:
                    return wsd.random_choice(tied_cuis, seed), True
                result = wsd.disambiguate(
                    tied_cuis,
                    [],
                    self.kb.dictionary,
                    self.graph,
                    self.ppr_params,
                    activation=activation,
                )
                return result.cui, result.fallback

            annotation, used_fallback = select_final(
                accepted[node],
                tokens,
                self.kb,
                tie_breaker,
                config.semantic_type_filter,
            )
            if used_fallback:
                fallbacks += 1
            if annotation is not None:
                annotations.append(annotation)

        unique: dict[tuple, Annotation] = {}
        for ann in annotations:
            key = (ann.ranges, ann.cui, ann.matched_term)
            if key not in unique or ann.score > unique[key].score:
                unique[key] = ann
        final = sorted(
            unique.values(), key=lambda a: (a.ranges[0][0], a.ranges[0][1], a.cui)
        )
        return final, fallbacks

    def _has_cui_tie(self, candidates: list, config: PipelineConfig) -> bool:
        pool = candidates
        if config.semantic_type_filter is not None:
            pool = [
                c
                for c in pool
                if self.kb.semantic_types_of(c.cui) & config.semantic_type_filter
            ]
        if not pool:
            return False
        best = max(c.rerank_score for c in pool)
        return len({c.cui for c in pool if c.rerank_score == best}) > 1

    def _document_activation(
        self,
        tokens: list[Token],
        forest: textproc.SpanForest,
        tied_nodes: list[int],
    ) -> dict[str, float] | None:
        """One PageRank run per document, reused by every tied span.

        Seeds come from the document's content tokens; tokens inside any tied
        span are excluded so an ambiguous mention cannot vote for itself.
        """
        excluded: set[str] = set()
        for node in tied_nodes:
            for i in forest.nodes[node].token_indices:
                if tokens[i].contributes():
                    excluded.add(tokens[i].norm)
        context = sorted(
            {t.norm for t in tokens if t.contributes()} - excluded
        )
        seeds = wsd.context_seeds(context, self.kb.dictionary, self.graph)
        if not seeds:
            return None
        return wsd.personalized_pagerank(
            self.graph,
            seeds,
            damping=self.ppr_params.damping,
            max_iters=self.ppr_params.max_iters,
            eps=self.ppr_params.eps,
        )


def iter_documents(path: str | Path) -> Iterator[tuple[str, str]]:
    """Yield (doc_id, text) pairs from a .txt file, a directory of .txt files
    or a JSONL file of {"doc_id": ..., "text": ...} objects."""
    path = Path(path)
    if path.is_dir():
        for child in sorted(path.glob("*.txt")):
            yield child.stem, child.read_text(encoding="utf-8")
        return
    if path.suffix == ".jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                if "doc_id" not in obj or "text" not in obj:
                    raise ValueError(f"{path}:{lineno}: need doc_id and text fields")
                yield str(obj["doc_id"]), str(obj["text"])
        return
    yield path.stem, path.read_text(encoding="utf-8")


def annotate_batch(
    annotator: Annotator,
    documents: Iterable[tuple[str, str]],
    config: PipelineConfig,
) -> list[AnnotatedDocument]:
    return [annotator.annotate(text, config, doc_id=doc_id) for doc_id, text in documents]


def write_annotations(docs: list[AnnotatedDocument], out_path: str | Path) -> None:
    """Write annotation documents: one JSON object per line for .jsonl targets,
    otherwise one pretty-printed JSON file per document into a directory."""
    out_path = Path(out_path)
    if out_path.suffix == ".jsonl":
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", encoding="utf-8") as fh:
            for doc in docs:
                fh.write(doc.to_json() + "\n")
        return
    out_path.mkdir(parents=True, exist_ok=True)
    for doc in docs:
        target = out_path / f"{doc.doc_id}.json"
        target.write_text(
            json.dumps(doc.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
