"""
Measuring agreement between two annotation sets
===============================================

Units are (document, concept) pairs over the indexed concept universe: the
annotators agree positively only when both mark a concept present. Cells
pool across documents into one contingency table; Cohen's kappa corrects
the observed agreement for chance, and a percentile bootstrap over the
documents yields the interval.
"""
from termlink.agreement import (
    agreement_report,
    cohens_kappa,
    document_units,
    format_matrix_table,
    landis_label,
)

# The arithmetic on one pooled table, by hand:
result = cohens_kappa(agree_pos=20, agree_neg=60, only_a=10, only_b=10)
print(f"p_o={result.p_o}  p_e={result.p_e}  kappa={result.kappa:.4f}")
print("interpretation:", landis_label(result.kappa))

# Per-document cells come from plain set arithmetic against the universe.
cells = document_units({"C1", "C2"}, {"C2", "C3"}, universe_size=100)
print("\none document:", cells)

# A full report over a tiny two-annotator corpus:
docs = {
    "d1": ({"C1", "C2"}, {"C2"}),
    "d2": ({"C3"}, {"C3", "C4"}),
    "d3": ({"C1"}, {"C1"}),
}
report = agreement_report(docs, universe_size=100, resamples=500, seed=0)
print(
    f"\npooled kappa {report.kappa:.3f} "
    f"[{report.ci_low:.3f}, {report.ci_high:.3f}] -> {report.label}"
)

# The configuration-matrix table mirrors the evaluation layout: rows are
# WSD x reranker (with its default threshold), columns the two boundary
# strategies.
fake = {
    (wsd, rr): {"ngram": (k, k - 0.01, k + 0.01), "phrase": (k - 0.02, k - 0.03, k - 0.01)}
    for (wsd, rr), k in {
        ("rand", "L"): 0.286, ("rand", "A"): 0.330, ("rand", "C"): 0.403,
        ("ukb", "L"): 0.321, ("ukb", "A"): 0.365, ("ukb", "C"): 0.432,
    }.items()
}
print("\n" + format_matrix_table(fake))
