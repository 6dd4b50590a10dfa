"""
From raw text to candidate spans
================================

The boundary-detection stage proposes the token windows that might denote a
concept. Two strategies exist: exhaustive n-grams and rule-based phrases
(which can emit discontinuous spans for coordinations). Candidate spans are
then ordered by token-set inclusion into subsumption trees; the matcher
walks those trees preferring longer matches.
"""
from termlink.kb import load_stopwords
from termlink.textproc import (
    build_subsumption_forest,
    expand_abbreviations,
    ngram_spans,
    phrase_spans,
    render_expanded,
    tokenize,
)

stopwords = load_stopwords()

# Tokens are classified with a closed-class lexicon: content words carry
# meaning, function words (the stopword list) glue them together.
text = "acude por lesión grave en rodilla dcha"
tokens = tokenize(text, stopwords)
print("tokens:", [(t.surface, t.kind) for t in tokens])

# Abbreviations expand in place; every new token remembers the original
# character range it came from ("dcha" here), so annotations can always be
# reported against the text the user typed.
tokens = expand_abbreviations(tokens, {"dcha": "derecha"}, stopwords)
print("expanded:", render_expanded(text, tokens))
print("provenance of 'derecha':", text[tokens[-1].char_start : tokens[-1].char_end])

# n-grams over-generate on purpose (recall first); windows never cross
# sentence boundaries and never start or end with punctuation.
grams = ngram_spans(tokens, 1, 3, text=text)
print(f"\n{len(grams)} n-gram spans, e.g.:", sorted(s.text for s in grams)[:6])

# Phrase spans follow the content/function segmentation; coordination
# distributes the shared head, producing discontinuous spans.
coord = tokenize("aspergillus flavus y fumigatus", stopwords)
for span in phrase_spans(coord):
    marker = "" if span.contiguous else "   <- discontinuous"
    print(f"  {span.text!r}{marker}")

# The subsumption forest orders spans by strict token-set inclusion.
spans = ngram_spans(tokens, 1, 5, text=text)
forest = build_subsumption_forest(spans)
roots = [forest.nodes[r].text for r in forest.roots]
print(f"\nforest: {len(forest.nodes)} spans, {len(forest.roots)} roots")
print("roots:", roots)
