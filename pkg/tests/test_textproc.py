from __future__ import annotations

import random

import pytest

from termlink.textproc import (
    Span,
    Token,
    build_subsumption_forest,
    expand_abbreviations,
    load_abbreviations,
    ngram_spans,
    phrase_spans,
    render_expanded,
    tokenize,
)


def spans_by_text(spans):
    return {s.text for s in spans}


def make_span(indices, strategy="ngram"):
    return Span(token_indices=tuple(indices), text=" ".join(map(str, indices)), source_strategy=strategy)


class TestTokenize:
    def test_kinds(self):
        tokens = tokenize("rodilla dcha.")
        assert [(t.surface, t.kind) for t in tokens] == [
            ("rodilla", "content"),
            ("dcha", "content"),
            (".", "punct"),
        ]

    def test_empty(self):
        assert tokenize("") == []

    def test_paper_sentence(self):
        tokens = tokenize("acude por lesión grave en rodilla dcha")
        assert len(tokens) == 7
        kinds = {t.surface: t.kind for t in tokens}
        assert kinds["por"] == "function"
        assert kinds["en"] == "function"
        assert kinds["lesión"] == "content"

    def test_numbers(self):
        tokens = tokenize("pauta 2 comprimidos 12.5 mg")
        kinds = {t.surface: t.kind for t in tokens}
        assert kinds["2"] == "number"
        assert kinds["12.5"] == "number"
        assert kinds["mg"] == "content"

    def test_offsets_reconstruct_text(self):
        rng = random.Random(3)
        pieces = ["dolor", "de", "cabeza,", "38.5", "¿por qué?", "(x)", "\n", "  "]
        for _ in range(200):
            text = "".join(rng.choice(pieces) for _ in range(rng.randrange(0, 12)))
            tokens = tokenize(text)
            rebuilt = list(text)
            for t in tokens:
                assert text[t.char_start : t.char_end] == t.surface
            # non-token characters must all be whitespace
            for t in tokens:
                for i in range(t.char_start, t.char_end):
                    rebuilt[i] = ""
            assert "".join(rebuilt).strip() == ""

    def test_offsets_ordered_non_overlapping(self):
        tokens = tokenize("uno dos, tres. ¿cuatro?")
        for a, b in zip(tokens, tokens[1:]):
            assert a.char_end <= b.char_start


class TestAbbreviations:
    def test_basic_expansion(self):
        tokens = tokenize("rodilla dcha")
        out = expand_abbreviations(tokens, {"dcha": "derecha"})
        assert [t.surface for t in out] == ["rodilla", "derecha"]
        # provenance keeps the original character range
        assert (out[1].char_start, out[1].char_end) == (8, 12)

    def test_not_in_dict_unchanged(self):
        tokens = tokenize("rodilla izquierda")
        out = expand_abbreviations(tokens, {"dcha": "derecha"})
        assert out == tokens

    def test_trailing_period_absorbed(self):
        text = "rodilla dcha."
        out = expand_abbreviations(tokenize(text), {"dcha": "derecha"})
        assert [t.surface for t in out] == ["rodilla", "derecha"]
        assert text[out[1].char_start : out[1].char_end] == "dcha."

    def test_multiword_expansion_shares_provenance(self):
        text = "antecedente de EPOC grave"
        out = expand_abbreviations(
            tokenize(text), {"EPOC": "enfermedad pulmonar obstructiva crónica"}
        )
        surfaces = [t.surface for t in out]
        assert surfaces == [
            "antecedente", "de", "enfermedad", "pulmonar", "obstructiva", "crónica", "grave",
        ]
        expanded = [t for t in out if t.surface in ("enfermedad", "pulmonar", "obstructiva", "crónica")]
        ranges = {(t.char_start, t.char_end) for t in expanded}
        assert ranges == {(15, 19)}
        assert text[15:19] == "EPOC"

    def test_case_insensitive_fallback(self):
        out = expand_abbreviations(tokenize("hta conocida"), {"HTA": "hipertensión arterial"})
        assert [t.surface for t in out][:2] == ["hipertensión", "arterial"]

    def test_case_sensitive_key_wins(self):
        out = expand_abbreviations(
            tokenize("TA 120/80"), {"TA": "tensión arterial", "ta": "otra cosa"}
        )
        assert [t.surface for t in out][:2] == ["tensión", "arterial"]

    def test_loader_rejects_duplicates(self, tmp_path):
        path = tmp_path / "abbr.tsv"
        path.write_text("dcha\tderecha\ndcha\totra\n", encoding="utf-8")
        with pytest.raises(ValueError, match="duplicate"):
            load_abbreviations(path)

    def test_loader_comments_and_blanks(self, tmp_path):
        path = tmp_path / "abbr.tsv"
        path.write_text("# comment\n\ndcha\tderecha\n", encoding="utf-8")
        assert load_abbreviations(path) == {"dcha": "derecha"}

    def test_render_expanded(self):
        text = "acude por lesión grave en rodilla dcha"
        tokens = expand_abbreviations(tokenize(text), {"dcha": "derecha"})
        assert render_expanded(text, tokens) == "acude por lesión grave en rodilla derecha"

    def test_render_without_expansion_is_identity(self):
        text = "dolor de cabeza, fiebre (38.5)."
        tokens = tokenize(text)
        assert render_expanded(text, tokens) == text


class TestNgrams:
    def test_three_content_tokens(self):
        tokens = tokenize("fiebre tos disnea")
        spans = ngram_spans(tokens, 1, 2)
        assert len(spans) == 5

    def test_function_only_window_excluded(self):
        tokens = tokenize("de la en")
        assert ngram_spans(tokens, 1, 3) == []

    def test_no_punct_edges(self):
        tokens = tokenize("fiebre , tos")
        for span in ngram_spans(tokens, 1, 3):
            assert "," != span.text[0] and "," != span.text[-1]

    def test_sentence_boundary_not_crossed(self):
        tokens = tokenize("fiebre. tos")
        texts = spans_by_text(ngram_spans(tokens, 1, 2))
        assert texts == {"fiebre", "tos"}

    def test_newline_not_crossed(self):
        text = "fiebre\ntos"
        tokens = tokenize(text)
        texts = spans_by_text(ngram_spans(tokens, 1, 2, text=text))
        assert texts == {"fiebre", "tos"}

    def test_overgeneration_pairs_across_function_word(self):
        # A window may pair tokens that form no syntactic unit.
        tokens = tokenize("arteria torácica en radiografía")
        texts = spans_by_text(ngram_spans(tokens, 1, 5))
        assert "torácica en radiografía" in texts

    def test_count_matches_bruteforce_enumeration(self):
        rng = random.Random(11)
        kinds = ["content", "function", "punct", "number"]
        for _ in range(150):
            n = rng.randrange(0, 12)
            choice = [rng.choice(kinds) for _ in range(n)]
            words = {
                "content": "palabra",
                "function": "de",
                "punct": rng.choice([",", ".", ";"]),
                "number": "12",
            }
            # build a synthetic token list with explicit kinds
            tokens = []
            pos = 0
            for kind in choice:
                surface = words[kind] if kind != "punct" else rng.choice([",", ".", ";"])
                tokens.append(Token(surface, surface.lower(), pos, pos + len(surface), kind))
                pos += len(surface) + 1
            n_min, n_max = 1, rng.randrange(1, 5)

            def eligible(window):
                if not window:
                    return False
                if any(t.kind == "punct" and t.surface in ".?!" for t in window):
                    return False
                if window[0].kind == "punct" or window[-1].kind == "punct":
                    return False
                return any(t.kind == "content" for t in window)

            expected = 0
            for size in range(n_min, n_max + 1):
                for start in range(len(tokens) - size + 1):
                    if eligible(tokens[start : start + size]):
                        expected += 1
            got = ngram_spans(tokens, n_min, n_max)
            assert len(got) == expected


class TestPhrases:
    def test_paper_example_phrases(self):
        tokens = tokenize("lesión grave en rodilla derecha")
        texts = spans_by_text(phrase_spans(tokens))
        assert "lesión grave" in texts
        assert "rodilla derecha" in texts
        assert "lesión grave en rodilla derecha" in texts

    def test_single_content_token(self):
        tokens = tokenize("fiebre")
        spans = phrase_spans(tokens)
        assert spans_by_text(spans) == {"fiebre"}

    def test_coordination_distributes_head(self):
        tokens = tokenize("aspergillus flavus y fumigatus")
        spans = phrase_spans(tokens)
        discontinuous = [s for s in spans if not s.contiguous]
        assert any(s.text == "aspergillus fumigatus" for s in discontinuous)

    def test_coordination_with_trailing_modifier(self):
        tokens = tokenize("compresión y fractura vertebral")
        spans = phrase_spans(tokens)
        assert any(s.text == "compresión vertebral" and not s.contiguous for s in spans)

    def test_no_phrases_in_function_only_text(self):
        tokens = tokenize("de la en por")
        assert phrase_spans(tokens) == []

    def test_sentence_boundary_respected(self):
        tokens = tokenize("fiebre alta. tos seca")
        texts = spans_by_text(phrase_spans(tokens))
        assert "fiebre alta" in texts and "tos seca" in texts
        assert not any("." in t for t in texts)


class TestForest:
    def test_containment_chain(self):
        spans = [make_span([0, 1]), make_span([0]), make_span([1])]
        forest = build_subsumption_forest(spans)
        root_span = forest.nodes[forest.roots[0]]
        assert root_span.token_indices == (0, 1)
        assert len(forest.roots) == 1
        kids = {forest.nodes[k].token_indices for k in forest.children[forest.roots[0]]}
        assert kids == {(0,), (1,)}

    def test_disjoint_spans_are_roots(self):
        forest = build_subsumption_forest([make_span([0]), make_span([5])])
        assert len(forest.roots) == 2

    def test_overlapping_non_nested_are_roots(self):
        forest = build_subsumption_forest([make_span([0, 1]), make_span([1, 2])])
        assert len(forest.roots) == 2

    def test_single_parent_and_transitive_reduction(self):
        rng = random.Random(5)
        for _ in range(200):
            universe = range(rng.randrange(2, 7))
            n_spans = rng.randrange(1, 8)
            spans = []
            seen = set()
            for _ in range(n_spans):
                size = rng.randrange(1, len(list(universe)) + 1)
                indices = tuple(sorted(rng.sample(list(universe), size)))
                if indices in seen:
                    continue
                seen.add(indices)
                spans.append(make_span(indices))
            forest = build_subsumption_forest(spans)
            sets = [frozenset(n.token_indices) for n in forest.nodes]
            for i, parent in enumerate(forest.parent):
                if parent is None:
                    continue
                assert sets[i] < sets[parent]
                # no intermediate span between child and parent
                for j, other in enumerate(sets):
                    if j in (i, parent):
                        continue
                    assert not (sets[i] < other < sets[parent])
            # roots are exactly the nodes with no strict superset... or nodes
            # whose supersets exist? every span with a strict superset has a parent
            for i, parent in enumerate(forest.parent):
                has_superset = any(sets[i] < s for j, s in enumerate(sets) if j != i)
                assert (parent is not None) == has_superset

    def test_dedup_on_token_indices(self):
        forest = build_subsumption_forest([make_span([0, 1]), make_span([0, 1])])
        assert len(forest.nodes) == 1
