"""
Ranked retrieval over the term index
====================================

Every surviving term becomes one index entry; queries return the entries
sharing at least one normalized token, ranked by BM25 (k1=1.2, b=0.75).
"""
from termlink.index import build_index
from termlink.kb import build_from_release, sample_release_dir

kb = build_from_release(sample_release_dir())
index = build_index(kb.terms)

print(f"index: {len(index)} entries, {index.token_count} distinct tokens\n")

for query in ["asplenia congénita", "dolor cabeza", "radiografía tórax", "clavo"]:
    print(f"query: {query!r}")
    for result in index.query(query, top_k=5):
        cuis = ",".join(sorted(result.entry.cuis))
        print(f"  {result.base_score:6.3f}  {result.entry.term!r}  [{cuis}]")
    print()

# An exact term always lands on top; partial overlaps trail behind with
# scores shrunk by length normalization.
top = index.query("asplenia congénita", top_k=1)[0]
assert top.entry.normalized == "asplenia congénita"

# No token overlap means no results at all, not low-scored ones.
assert index.query("zzzz", top_k=5) == []
print("no-overlap query returns nothing, exact term ranks first")
