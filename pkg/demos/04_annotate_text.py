"""
End-to-end annotation
=====================

One Annotator bundles the knowledge base with its index and concept graph;
annotate() runs expansion, boundary detection, longest-match candidate
generation, reranking, thresholding and final selection.
"""
from termlink.kb import build_from_release, sample_release_dir
from termlink.mapping import PipelineConfig
from termlink.pipeline import Annotator

annotator = Annotator(build_from_release(sample_release_dir()))


def show(doc):
    print(f"text: {doc.text!r}")
    if doc.expanded_text != doc.text:
        print(f"expanded: {doc.expanded_text!r}")
    for a in doc.annotations:
        covered = " / ".join(doc.text[s:e] for s, e in a.ranges)
        print(
            f"  [{covered}] -> {a.cui} {a.preferred_name!r}"
            f" (term {a.matched_term!r}, score {a.score:.2f}, types {list(a.tuis)})"
        )
    print()


# A mention hidden behind an abbreviation: matching happens on the expanded
# text, offsets are reported against the original.
show(annotator.annotate("acude por lesión grave en rodilla dcha", PipelineConfig()))

# Longer matches win: the exact two-token term beats its single-token parts.
show(annotator.annotate("¿Debemos descartar una asplenia congénita?", PipelineConfig()))

# The three rerankers score the same candidates differently; C (token Dice)
# with its 0.7 default threshold is the strictest and the default.
text = "presenta tos, disnea y dolor torácico"
for reranker in ("L", "A", "C"):
    doc = annotator.annotate(text, PipelineConfig(reranker=reranker))
    print(f"reranker {reranker}: {len(doc.annotations)} annotations")

# Restricting to semantic types filters candidates before final selection:
# only disorders (T047) survive here.
doc = annotator.annotate(
    "tiene un clavo en el pie",
    PipelineConfig(semantic_type_filter=frozenset({"T047"}), wsd="rand"),
)
print()
show(doc)
