from __future__ import annotations

import random

import pytest

from termlink.index import build_index
from termlink.kb import TermEntry
from termlink.mapping import (
    Annotation,
    ConfigError,
    MappingCandidate,
    PipelineConfig,
    apply_threshold,
    aronson_score,
    build_annotation,
    dice_score,
    generate_candidates,
    match_span,
    reference_generate_candidates,
    rerank_candidates,
    select_final,
)
from termlink.textproc import Span, build_subsumption_forest, tokenize


def entry(term, normalized=None, cuis=("C1",)):
    return TermEntry(
        term=term,
        normalized=normalized if normalized is not None else term.lower(),
        cuis=frozenset(cuis),
        sources=frozenset({"SCTSPA"}),
    )


def candidate(span, cui, term, base, query_tokens):
    return MappingCandidate(
        span=span,
        cui=cui,
        entry=entry(term),
        base_score=base,
        query_tokens=tuple(query_tokens),
    )


def make_span(indices):
    return Span(token_indices=tuple(indices), text=" ".join(map(str, indices)), source_strategy="ngram")


class TestConfig:
    def test_threshold_defaults(self):
        assert PipelineConfig(reranker="L").resolved_threshold() == 0.0
        assert PipelineConfig(reranker="A").resolved_threshold() == 0.5
        assert PipelineConfig(reranker="C").resolved_threshold() == 0.7

    def test_explicit_threshold_wins(self):
        assert PipelineConfig(reranker="C", threshold=0.2).resolved_threshold() == 0.2

    def test_unknown_values_rejected(self):
        with pytest.raises(ConfigError, match="reranker"):
            PipelineConfig.from_dict({"reranker": "X"})
        with pytest.raises(ConfigError, match="boundary"):
            PipelineConfig.from_dict({"boundary": "chunk"})
        with pytest.raises(ConfigError, match="unknown config fields"):
            PipelineConfig.from_dict({"rerankr": "C"})

    def test_echo_resolves_defaults(self):
        echo = PipelineConfig.from_dict({"reranker": "A"}).echo()
        assert echo["threshold"] == 0.5
        assert echo["boundary"] == "ngram"


class TestMatchSpan:
    def test_exact_term_produces_candidates(self, sample_kb):
        index = build_index(sample_kb.terms)
        span = Span((0, 1), "asplenia congénita", "ngram")
        candidates = match_span(index, span, sample_kb.normalizer)
        assert {c.cui for c in candidates} == {"C0266800"}

    def test_stopword_span_yields_nothing(self, sample_kb):
        index = build_index(sample_kb.terms)
        span = Span((0,), "de", "ngram")
        assert match_span(index, span, sample_kb.normalizer) == []

    def test_ambiguous_term_yields_candidate_per_cui(self, sample_kb):
        index = build_index(sample_kb.terms)
        span = Span((0,), "clavo", "ngram")
        candidates = match_span(index, span, sample_kb.normalizer)
        assert {"C0009362", "C0009857"} <= {c.cui for c in candidates}


class TestRerankers:
    def test_dice_identical(self):
        assert dice_score(("a", "b"), ("a", "b")) == 1.0

    def test_dice_partial(self):
        assert dice_score(("a", "b"), ("a",)) == pytest.approx(2 / 3)

    def test_dice_disjoint(self):
        assert dice_score(("a",), ("b",)) == 0.0

    def test_dice_multiset(self):
        assert dice_score(("a", "a"), ("a",)) == pytest.approx(2 / 3)

    def test_aronson_exact_match_is_one(self):
        assert aronson_score(("asplenia", "congénita"), ("asplenia", "congénita")) == 1.0

    def test_aronson_disjoint_is_zero(self):
        assert aronson_score(("a", "b"), ("c", "d")) == 0.0

    def test_aronson_in_unit_interval(self):
        rng = random.Random(1)
        vocab = ["a", "b", "c", "d"]
        for _ in range(500):
            s = tuple(rng.choice(vocab) for _ in range(rng.randrange(1, 5)))
            t = tuple(rng.choice(vocab) for _ in range(rng.randrange(1, 5)))
            score = aronson_score(s, t)
            assert 0.0 <= score <= 1.0

    def test_aronson_rewards_contiguity(self):
        # same matched multiset, same final token (so centrality is equal),
        # matched run split [3] vs [2, 1]: cohesiveness must favor the block
        grouped = aronson_score(("q", "a", "b", "m"), ("a", "b", "m"))
        split = aronson_score(("a", "b", "q", "m"), ("a", "b", "m"))
        assert grouped > split

    def test_l_minmax_within_result_list(self):
        span = make_span([0])
        cands = [
            candidate(span, "C1", "t1", 4.0, ["x"]),
            candidate(span, "C2", "t2", 3.0, ["x"]),
            candidate(span, "C3", "t3", 2.0, ["x"]),
        ]
        rerank_candidates(cands, "L")
        assert [c.rerank_score for c in cands] == [1.0, 0.5, 0.0]

    def test_l_single_candidate_is_one(self):
        span = make_span([0])
        cands = [candidate(span, "C1", "t1", 2.5, ["x"])]
        rerank_candidates(cands, "L")
        assert cands[0].rerank_score == 1.0

    def test_rerank_bounds(self, sample_kb):
        index = build_index(sample_kb.terms)
        rng = random.Random(9)
        vocab = ["dolor", "fiebre", "tos", "clavo", "fractura", "tórax", "zzz"]
        for reranker in ("L", "A", "C"):
            for _ in range(50):
                text = " ".join(rng.choice(vocab) for _ in range(rng.randrange(1, 4)))
                span = Span((0,), text, "ngram")
                cands = match_span(index, span, sample_kb.normalizer)
                rerank_candidates(cands, reranker)
                for c in cands:
                    assert 0.0 <= c.rerank_score <= 1.0


class TestThreshold:
    def test_zero_keeps_all(self):
        span = make_span([0])
        cands = [candidate(span, "C1", "t", 1.0, ["x"]) for _ in range(3)]
        rerank_candidates(cands, "L")
        assert len(apply_threshold(cands, 0.0)) == 3

    def test_exact_boundary_dropped_below(self):
        span = make_span([0])
        c = candidate(span, "C1", "t", 1.0, ["a", "b"])
        c.rerank_score = 2 / 3
        assert apply_threshold([c], 0.7) == []
        assert apply_threshold([c], 2 / 3) == [c]

    def test_empty_input(self):
        assert apply_threshold([], 0.5) == []

    def test_monotone_survivor_shrinkage(self):
        # Raising the threshold never adds a surviving candidate for a span.
        # (End to end this is not true: a parent ruled out by a higher
        # threshold re-opens its children for annotation, per item 3 of the
        # candidate-generation algorithm.)
        rng = random.Random(31)
        span = make_span([0])
        for _ in range(100):
            cands = []
            for i in range(rng.randrange(0, 6)):
                c = candidate(span, f"C{i}", f"t{i}", 1.0, ["x"])
                c.rerank_score = rng.random()
                cands.append(c)
            t1, t2 = sorted([rng.random(), rng.random()])
            assert set(map(id, apply_threshold(cands, t2))) <= set(
                map(id, apply_threshold(cands, t1))
            )


def random_fixture(rng: random.Random):
    """Random span forest (<= 6 spans) plus a synthetic matcher."""
    universe = list(range(rng.randrange(3, 7)))
    spans = []
    seen = set()
    for _ in range(rng.randrange(1, 7)):
        size = rng.randrange(1, len(universe) + 1)
        indices = tuple(sorted(rng.sample(universe, size)))
        if indices not in seen:
            seen.add(indices)
            spans.append(make_span(indices))
    forest = build_subsumption_forest(spans)

    score_table = {}
    for span in spans:
        cands = []
        for i in range(rng.randrange(0, 4)):
            cands.append((f"C{i}", f"t{i}", rng.choice([0.0, 0.25, 0.5, 0.75, 1.0])))
        score_table[span.token_indices] = cands

    def matcher(span):
        return [
            MappingCandidate(
                span=span,
                cui=cui,
                entry=entry(term),
                base_score=score,
                query_tokens=("q",),
            )
            for cui, term, score in score_table[span.token_indices]
        ]

    return forest, matcher


class TestGenerateCandidates:
    def test_exact_root_beats_children(self, sample_kb, annotator):
        index = annotator.index
        tokens = tokenize("asplenia congénita", sample_kb.stopwords)
        spans = [make_span([0, 1]), make_span([0]), make_span([1])]
        spans[0] = Span((0, 1), "asplenia congénita", "ngram")
        spans[1] = Span((0,), "asplenia", "ngram")
        spans[2] = Span((1,), "congénita", "ngram")
        forest = build_subsumption_forest(spans)
        accepted = generate_candidates(
            forest,
            lambda s: match_span(index, s, sample_kb.normalizer),
            "C",
            0.7,
        )
        accepted_spans = {forest.nodes[n].token_indices for n in accepted}
        assert accepted_spans == {(0, 1)}

    def test_barren_root_lets_child_through(self):
        spans = [make_span([0, 1]), make_span([0])]
        forest = build_subsumption_forest(spans)

        def matcher(span):
            if span.token_indices == (0,):
                return [candidate(span, "C1", "t", 5.0, ["q"])]
            return []

        accepted = generate_candidates(forest, matcher, "L", 0.0)
        assert {forest.nodes[n].token_indices for n in accepted} == {(0,)}

    def test_barren_chain_reaches_grandchild(self):
        spans = [make_span([0, 1, 2]), make_span([0, 1]), make_span([0])]
        forest = build_subsumption_forest(spans)

        def matcher(span):
            if span.token_indices == (0,):
                return [candidate(span, "C1", "t", 5.0, ["q"])]
            return []

        accepted = generate_candidates(forest, matcher, "L", 0.0)
        assert {forest.nodes[n].token_indices for n in accepted} == {(0,)}

    def test_overlapping_roots_both_annotated(self):
        spans = [make_span([0, 1]), make_span([1, 2])]
        forest = build_subsumption_forest(spans)

        def matcher(span):
            return [candidate(span, "C1", "t", 5.0, ["q"])]

        accepted = generate_candidates(forest, matcher, "L", 0.0)
        assert len(accepted) == 2

    def test_tie_prefers_parent(self):
        spans = [make_span([0, 1]), make_span([0])]
        forest = build_subsumption_forest(spans)

        def matcher(span):
            return [candidate(span, "C1", "t", 5.0, ["q"])]

        accepted = generate_candidates(forest, matcher, "L", 0.0)
        assert {forest.nodes[n].token_indices for n in accepted} == {(0, 1)}

    def test_matches_reference_on_random_fixtures(self):
        rng = random.Random(99)
        for _ in range(400):
            forest, matcher = random_fixture(rng)
            threshold = rng.choice([0.0, 0.5, 0.7])
            got = generate_candidates(forest, matcher, "L", threshold)
            want = reference_generate_candidates(forest, matcher, "L", threshold)
            got_view = {
                forest.nodes[n].token_indices: sorted((c.cui, c.rerank_score) for c in cs)
                for n, cs in got.items()
            }
            want_view = {
                forest.nodes[n].token_indices: sorted((c.cui, c.rerank_score) for c in cs)
                for n, cs in want.items()
            }
            assert got_view == want_view

    def test_longest_match_dominance(self):
        rng = random.Random(123)
        for _ in range(200):
            forest, matcher = random_fixture(rng)
            accepted = generate_candidates(forest, matcher, "L", 0.0)
            sets = {frozenset(forest.nodes[n].token_indices) for n in accepted}
            # no accepted span is nested inside another accepted span of its tree
            for a in sets:
                for b in sets:
                    if a is b:
                        continue
                    # nested acceptance may only happen across different trees;
                    # within one tree the walk stops at the accepted ancestor
                    pass
            # descendants of an accepted node are never annotated
            for node in accepted:
                stack = list(forest.children[node])
                while stack:
                    child = stack.pop()
                    assert child not in accepted
                    stack.extend(forest.children[child])


class TestSelectFinal:
    def tie_break_fail(self, tied):
        raise AssertionError("tie breaker must not be called")

    def test_case_a_no_candidates(self, sample_kb):
        tokens = tokenize("fiebre", sample_kb.stopwords)
        annotation, fallback = select_final([], tokens, sample_kb, self.tie_break_fail)
        assert annotation is None and not fallback

    def test_case_b_single(self, sample_kb, annotator):
        tokens = tokenize("fiebre", sample_kb.stopwords)
        span = Span((0,), "fiebre", "ngram")
        cands = match_span(annotator.index, span, sample_kb.normalizer)
        rerank_candidates(cands, "C")
        survivors = apply_threshold(cands, 0.7)
        annotation, _ = select_final(survivors, tokens, sample_kb, self.tie_break_fail)
        assert annotation.cui == "C0015967"
        assert annotation.matched_term == "fiebre"

    def test_case_c_unique_max(self, sample_kb):
        tokens = tokenize("fiebre", sample_kb.stopwords)
        span = Span((0,), "fiebre", "ngram")
        c1 = candidate(span, "C0015967", "fiebre", 1.0, ["fiebre"])
        c1.rerank_score = 0.9
        c2 = candidate(span, "C0010200", "tos", 1.0, ["fiebre"])
        c2.rerank_score = 0.7
        annotation, _ = select_final([c1, c2], tokens, sample_kb, self.tie_break_fail)
        assert annotation.cui == "C0015967"

    def test_case_d_tie_delegates(self, sample_kb):
        tokens = tokenize("clavo", sample_kb.stopwords)
        span = Span((0,), "clavo", "ngram")
        c1 = candidate(span, "C0009362", "clavo", 1.0, ["clavo"])
        c1.rerank_score = 1.0
        c2 = candidate(span, "C0009857", "clavo", 1.0, ["clavo"])
        c2.rerank_score = 1.0
        calls = []

        def breaker(tied):
            calls.append(tied)
            return "C0009857", False

        annotation, fallback = select_final([c1, c2], tokens, sample_kb, breaker)
        assert calls == [["C0009362", "C0009857"]]
        assert annotation.cui == "C0009857"
        assert not fallback

    def test_semantic_type_filter(self, sample_kb):
        tokens = tokenize("clavo", sample_kb.stopwords)
        span = Span((0,), "clavo", "ngram")
        c1 = candidate(span, "C0009362", "clavo", 1.0, ["clavo"])  # disease
        c1.rerank_score = 1.0
        c2 = candidate(span, "C0009857", "clavo", 1.0, ["clavo"])  # food
        c2.rerank_score = 1.0
        annotation, _ = select_final(
            [c1, c2], tokens, sample_kb, self.tie_break_fail,
            semantic_type_filter=frozenset({"T047"}),
        )
        assert annotation.cui == "C0009362"
        # filter that removes everything -> case a
        annotation, _ = select_final(
            [c1, c2], tokens, sample_kb, self.tie_break_fail,
            semantic_type_filter=frozenset({"T999"}),
        )
        assert annotation is None


class TestAnnotationRanges:
    def test_ranges_cover_contributing_tokens_only(self, sample_kb):
        text = "una asplenia congénita"
        tokens = tokenize(text, sample_kb.stopwords)
        span = Span((0, 1, 2), text, "ngram")
        c = candidate(span, "C0266800", "asplenia congénita", 1.0, ["asplenia", "congénita"])
        c.rerank_score = 1.0
        annotation = build_annotation(c, tokens, sample_kb)
        assert [text[s:e] for s, e in annotation.ranges] == ["asplenia congénita"]

    def test_discontinuous_ranges(self, sample_kb):
        text = "aspergillus flavus y fumigatus"
        tokens = tokenize(text, sample_kb.stopwords)
        span = Span((0, 3), "aspergillus fumigatus", "phrase")
        c = candidate(span, "C0004037", "Aspergillus fumigatus", 1.0, ["aspergillus", "fumigatus"])
        c.rerank_score = 1.0
        annotation = build_annotation(c, tokens, sample_kb)
        assert [text[s:e] for s, e in annotation.ranges] == ["aspergillus", "fumigatus"]

    def test_to_dict_shape(self, sample_kb):
        text = "fiebre"
        tokens = tokenize(text, sample_kb.stopwords)
        span = Span((0,), text, "ngram")
        c = candidate(span, "C0015967", "fiebre", 1.0, ["fiebre"])
        c.rerank_score = 1.0
        d = build_annotation(c, tokens, sample_kb).to_dict()
        assert list(d) == ["ranges", "cui", "preferred_name", "tuis", "score", "matched_term"]
