"""
Word-sense disambiguation with Personalized PageRank
====================================================

When several concepts tie for a span, the walk over the concept graph
decides: personalization mass starts on the concepts evoked by the rest of
the document, and the tied candidate with the highest stationary activation
wins. A seeded uniform choice serves as the baseline.
"""
from termlink.kb import build_from_release, sample_release_dir
from termlink.mapping import PipelineConfig
from termlink.pipeline import Annotator
from termlink.wsd import build_graph, context_seeds, personalized_pagerank, random_choice

kb = build_from_release(sample_release_dir())
graph = build_graph(kb.relations)
print(f"concept graph: {graph.vertex_count} vertices, {graph.edge_count} edges")

# "clavo" is ambiguous: C0009362 (heloma, a foot disease) vs C0009857 (the
# spice). Context about feet must pull activation toward the disease.
foot_seeds = context_seeds(["pie", "dolor"], kb.dictionary, graph)
activation = personalized_pagerank(graph, foot_seeds)
for cui in ("C0009362", "C0009857"):
    print(f"  activation[{cui}] = {activation[cui]:.4f}  ({kb.concepts[cui].preferred_name})")

# The pipeline wires this in automatically for tied spans (wsd='ukb').
annotator = Annotator(kb)
for text in (
    "presenta un clavo doloroso en el pie",
    "en la receta se usa clavo junto a otras especias",
):
    doc = annotator.annotate(text, PipelineConfig(wsd="ukb"))
    picked = [a for a in doc.annotations if a.matched_term == "clavo"]
    print(f"\n{text!r}\n  clavo -> {picked[0].cui} ({picked[0].preferred_name})")

# The rand baseline ignores context but is reproducible given a seed.
print("\nrand baseline picks:", [random_choice(["C0009362", "C0009857"], s) for s in range(5)])
