"""
Building a knowledge base from a terminology release
====================================================

The bundled sample release has the same shape as a real one: pipe-delimited
concept, relation and semantic-type files plus a TSV semantic network. This
walks through the build and pokes at the three artifacts it produces: the
term entries (index input), the relation edge list (graph input) and the
normalized-term dictionary.
"""
from termlink.kb import build_from_release, sample_release_dir

kb = build_from_release(sample_release_dir())

# The build report counts everything the filters did.
print("build report:")
for key, value in kb.report.to_dict().items():
    print(f"  {key}: {value}")

# Terms whose atoms were filtered out never reach the index. The sample
# release contains one LOINC-style descriptor, English atoms, suppressed
# atoms, a single-character term, digit-only terms and stopword-only terms;
# all are rejected, each for its own reason.
print("\nreject reasons:", dict(kb.report.rejects))

# Term strings are normalized: lowercased, hierarchy tags like "(trastorno)"
# stripped, punctuation flattened, stopwords dropped. Accents survive.
normalizer = kb.normalizer
for term in ["Aspergillus", "asplenia congénita (trastorno)", "dolor de cabeza"]:
    print(f"\n  {term!r} -> {normalizer(term)!r}")

# The dictionary maps each normalized form to every concept carrying it.
# "clavo" is genuinely ambiguous: a spice and a skin disease.
print("\ndictionary['clavo'] =", sorted(kb.dictionary["clavo"]))
for cui in sorted(kb.dictionary["clavo"]):
    concept = kb.concepts[cui]
    print(f"  {cui}: {concept.preferred_name}  types={sorted(concept.semantic_types)}")

# Snapshots round-trip the whole thing into one gzipped JSON file.
from termlink.kb import load_kb, save_kb

save_kb(kb, "/tmp/sample_kb.json.gz")
reloaded = load_kb("/tmp/sample_kb.json.gz")
print("\nsnapshot round-trip OK:", len(reloaded.concepts), "concepts")
