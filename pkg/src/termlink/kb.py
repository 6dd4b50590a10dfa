"""Knowledge-base construction from a UMLS-style terminology release.

Parses pipe-delimited release files (concepts, relations, semantic types),
applies the term filters, normalizes term strings and assembles the three
artifacts every other module consumes: the index input (term entries), the
relation graph input and the normalized-term dictionary.
"""
from __future__ import annotations

import gzip
import json
import logging
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

log = logging.getLogger(__name__)

SNAPSHOT_FORMAT = "termlink-kb"
SNAPSHOT_VERSION = 1

# Filter reject reasons, in evaluation order.
REJECT_LANGUAGE = "language"
REJECT_SOURCE = "source"
REJECT_TOO_MANY_TOKENS = "too_many_tokens"
REJECT_SUPPRESSED = "suppressed"
REJECT_SINGLE_CHARACTER = "single_character"
REJECT_NUMBERS_ONLY = "numbers_only"
REJECT_ALL_STOPWORDS = "all_stopwords"
REJECT_REASONS = (
    REJECT_LANGUAGE,
    REJECT_SOURCE,
    REJECT_TOO_MANY_TOKENS,
    REJECT_SUPPRESSED,
    REJECT_SINGLE_CHARACTER,
    REJECT_NUMBERS_ONLY,
    REJECT_ALL_STOPWORDS,
)

DEFAULT_LANGUAGE = "SPA"
DEFAULT_EXCLUDED_SOURCES = frozenset(
    {"LNC-ES-AR", "LNC-ES-CL", "LNC-ES-ES", "LNC-ES-MX"}
)
DEFAULT_SUPPRESS_VALUES = frozenset({"O", "E", "Y"})
DEFAULT_MAX_TOKENS = 15
DEFAULT_SOURCE_PRIORITY = ("SCTSPA", "MSHSPA", "MDRSPA", "WHOSPA")
DEFAULT_TTY_PRIORITY = ("PT", "FN", "SY")

# Polarity-bearing words that must never be treated as stopwords.
PROTECTED_WORDS = frozenset({"no", "sin", "con"})

_DATA_DIR = Path(__file__).parent / "data"

_PUNCT_RE = re.compile(r"[^\w\s]|_")
_PAREN_RE = re.compile(r"\(([^()]*)\)")
_WORD_RE = re.compile(r"\w+")
_CUI_RE = re.compile(r"C\d+")


class KBError(Exception):
    """Fatal knowledge-base construction or loading failure."""


class RawAtom(NamedTuple):
    """One term occurrence as read from the concept file."""

    cui: str
    lang: str
    term: str
    source: str
    tty: str
    suppress: str


class Relation(NamedTuple):
    """Directed typed relation between two concepts."""

    cui1: str
    cui2: str
    rtype: str
    rela: str
    direction: str


class SemanticType(NamedTuple):
    tui: str
    name: str
    parent: str | None


@dataclass(frozen=True)
class Concept:
    cui: str
    preferred_name: str
    semantic_types: frozenset[str]
    sources: frozenset[str]
    terms_by_source: dict[str, tuple[str, ...]]


@dataclass(frozen=True)
class TermEntry:
    """One index entry: a surface term shared by one or more concepts."""

    term: str
    normalized: str
    cuis: frozenset[str]
    sources: frozenset[str]


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: str | None = None


@dataclass
class SkipReport:
    """Per-file malformed-line bookkeeping."""

    path: str
    skipped: int = 0
    examples: list[str] = field(default_factory=list)

    def record(self, line: str) -> None:
        self.skipped += 1
        if len(self.examples) < 5:
            self.examples.append(line[:120])


@dataclass(frozen=True)
class ColumnLayout:
    """0-based column positions inside a pipe-delimited release file."""

    n_columns: int
    fields: dict[str, int]

    def get(self, cols: list[str], name: str) -> str:
        return cols[self.fields[name]]


CONCEPT_LAYOUT = ColumnLayout(
    n_columns=18,
    fields={"cui": 0, "lang": 1, "source": 11, "tty": 12, "term": 14, "suppress": 16},
)
RELATION_LAYOUT = ColumnLayout(
    n_columns=16,
    fields={"cui1": 0, "rel": 3, "cui2": 4, "rela": 7, "dir": 13},
)
SEMTYPE_LAYOUT = ColumnLayout(n_columns=6, fields={"cui": 0, "tui": 1})


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load the stopword list, silently dropping the protected polarity words."""
    path = Path(path) if path else _DATA_DIR / "stopwords_es.txt"
    words: set[str] = set()
    for raw in path.read_text(encoding="utf-8").splitlines():
        word = raw.strip().lower()
        if not word or word.startswith("#"):
            continue
        words.add(word)
    protected = words & PROTECTED_WORDS
    if protected:
        log.warning("dropping polarity words from stopword list: %s", sorted(protected))
        words -= protected
    return frozenset(words)


def load_parentheticals(path: str | Path | None = None) -> frozenset[str]:
    path = Path(path) if path else _DATA_DIR / "parentheticals_es.txt"
    entries: set[str] = set()
    for raw in path.read_text(encoding="utf-8").splitlines():
        entry = raw.strip().lower()
        if entry and not entry.startswith("#"):
            entries.add(entry)
    return frozenset(entries)


def sample_release_dir() -> Path:
    """Directory holding the bundled sample terminology release."""
    return _DATA_DIR / "sample_release"


def default_abbreviations_path() -> Path:
    return _DATA_DIR / "abbreviations_es.tsv"


def normalize_string(
    term: str,
    stopwords: frozenset[str],
    parentheticals: frozenset[str] = frozenset(),
) -> str:
    """Normalize a term: lowercase, strip listed parentheticals, replace
    punctuation with spaces, drop stopword tokens and collapse whitespace.

    Accents are preserved. The result may be empty. Idempotent.
    """
    s = unicodedata.normalize("NFC", term).lower()

    def drop_listed(m: re.Match) -> str:
        return " " if m.group(1).strip() in parentheticals else m.group(0)

    prev = None
    while prev != s:
        prev = s
        s = _PAREN_RE.sub(drop_listed, s)

    s = _PUNCT_RE.sub(" ", s)
    return " ".join(t for t in s.split() if t not in stopwords)


class Normalizer:
    """Callable bundling the stopword and parenthetical inventories."""

    def __init__(self, stopwords: frozenset[str], parentheticals: frozenset[str]):
        self.stopwords = stopwords
        self.parentheticals = parentheticals

    def __call__(self, term: str) -> str:
        return normalize_string(term, self.stopwords, self.parentheticals)


def filter_atom(
    atom: RawAtom,
    stopwords: frozenset[str],
    language: str = DEFAULT_LANGUAGE,
    excluded_sources: frozenset[str] = DEFAULT_EXCLUDED_SOURCES,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    suppress_values: frozenset[str] = DEFAULT_SUPPRESS_VALUES,
) -> FilterDecision:
    """Apply the term filters in order; the first firing filter wins.

    a) wrong language, b) excluded source, c) >= max_tokens whitespace tokens,
    d) suppressed/obsolete flag, e) single character, f) nothing left after
    removing digits, whitespace and punctuation, g) all tokens are stopwords.
    """
    if atom.lang != language:
        return FilterDecision(False, REJECT_LANGUAGE)
    if atom.source in excluded_sources:
        return FilterDecision(False, REJECT_SOURCE)
    if len(atom.term.split()) >= max_tokens:
        return FilterDecision(False, REJECT_TOO_MANY_TOKENS)
    if atom.suppress in suppress_values:
        return FilterDecision(False, REJECT_SUPPRESSED)
    if len(atom.term) == 1:
        return FilterDecision(False, REJECT_SINGLE_CHARACTER)
    if not re.sub(r"[\d\s_]|[^\w\s]", "", atom.term):
        return FilterDecision(False, REJECT_NUMBERS_ONLY)
    tokens = _WORD_RE.findall(atom.term.lower())
    if tokens and all(t in stopwords for t in tokens):
        return FilterDecision(False, REJECT_ALL_STOPWORDS)
    return FilterDecision(True)


def _iter_release_lines(
    path: str | Path, layout: ColumnLayout, report: SkipReport
) -> Iterator[list[str]]:
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.endswith("|"):
                cols = line[:-1].split("|")
            else:
                cols = line.split("|")
            if len(cols) != layout.n_columns:
                report.record(line)
                continue
            yield cols


def parse_concept_file(
    path: str | Path,
    layout: ColumnLayout = CONCEPT_LAYOUT,
    report: SkipReport | None = None,
) -> Iterator[RawAtom]:
    """Yield one RawAtom per well-formed line; malformed lines go to the report."""
    report = report if report is not None else SkipReport(str(path))
    for cols in _iter_release_lines(path, layout, report):
        cui = layout.get(cols, "cui").strip()
        term = layout.get(cols, "term")
        if not cui or not term:
            report.record("|".join(cols))
            continue
        yield RawAtom(
            cui=cui,
            lang=layout.get(cols, "lang"),
            term=term,
            source=layout.get(cols, "source"),
            tty=layout.get(cols, "tty"),
            suppress=layout.get(cols, "suppress"),
        )


def parse_relation_file(
    path: str | Path,
    kept_cuis: frozenset[str] | set[str],
    layout: ColumnLayout = RELATION_LAYOUT,
    report: SkipReport | None = None,
) -> list[Relation]:
    """Edges whose both endpoints survived filtering; self-loops dropped and
    duplicate (cui1, cui2, type) rows collapsed."""
    report = report if report is not None else SkipReport(str(path))
    edges: list[Relation] = []
    seen: set[tuple[str, str, str]] = set()
    for cols in _iter_release_lines(path, layout, report):
        cui1 = layout.get(cols, "cui1").strip()
        cui2 = layout.get(cols, "cui2").strip()
        rtype = layout.get(cols, "rel")
        if cui1 == cui2:
            continue
        if cui1 not in kept_cuis or cui2 not in kept_cuis:
            continue
        key = (cui1, cui2, rtype)
        if key in seen:
            continue
        seen.add(key)
        edges.append(
            Relation(cui1, cui2, rtype, layout.get(cols, "rela"), layout.get(cols, "dir"))
        )
    return edges


def parse_semtype_file(
    path: str | Path,
    kept_cuis: frozenset[str] | set[str],
    layout: ColumnLayout = SEMTYPE_LAYOUT,
    report: SkipReport | None = None,
) -> dict[str, set[str]]:
    """Map kept cui -> set of TUI; assignments for dropped cuis are ignored."""
    report = report if report is not None else SkipReport(str(path))
    assignments: dict[str, set[str]] = {}
    for cols in _iter_release_lines(path, layout, report):
        cui = layout.get(cols, "cui").strip()
        tui = layout.get(cols, "tui").strip()
        if cui in kept_cuis and tui:
            assignments.setdefault(cui, set()).add(tui)
    return assignments


def parse_semnet_file(path: str | Path) -> list[SemanticType]:
    """Parse the semantic-network definitions (TSV: tui, name, parent).

    Validates that parent links form a forest; a cycle is fatal and the error
    message carries the offending TUI path.
    """
    types: list[SemanticType] = []
    by_tui: dict[str, SemanticType] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise KBError(f"malformed semantic-network line: {line!r}")
        tui = parts[0].strip()
        name = parts[1].strip()
        parent = parts[2].strip() if len(parts) > 2 and parts[2].strip() else None
        st = SemanticType(tui, name, parent)
        if tui in by_tui:
            raise KBError(f"duplicate semantic type {tui}")
        by_tui[tui] = st
        types.append(st)

    for st in types:
        if st.parent is not None and st.parent not in by_tui:
            raise KBError(f"semantic type {st.tui} references unknown parent {st.parent}")

    for st in types:
        path_seen: list[str] = []
        cur: SemanticType | None = st
        while cur is not None:
            if cur.tui in path_seen:
                cycle = " -> ".join(path_seen + [cur.tui])
                raise KBError(f"semantic-network cycle: {cycle}")
            path_seen.append(cur.tui)
            cur = by_tui[cur.parent] if cur.parent else None
    return types


@dataclass
class BuildReport:
    parsed_atoms: int = 0
    malformed_lines: int = 0
    kept_atoms: int = 0
    rejects: dict[str, int] = field(default_factory=dict)
    concepts: int = 0
    unique_terms: int = 0
    unique_terms_per_cui: int = 0
    relations: int = 0
    semantic_types: int = 0

    def to_dict(self) -> dict:
        return {
            "parsed_atoms": self.parsed_atoms,
            "malformed_lines": self.malformed_lines,
            "kept_atoms": self.kept_atoms,
            "rejects": {r: self.rejects.get(r, 0) for r in REJECT_REASONS},
            "concepts": self.concepts,
            "unique_terms": self.unique_terms,
            "unique_terms_per_cui": self.unique_terms_per_cui,
            "relations": self.relations,
            "semantic_types": self.semantic_types,
        }


@dataclass(frozen=True)
class KBConfig:
    language: str = DEFAULT_LANGUAGE
    excluded_sources: frozenset[str] = DEFAULT_EXCLUDED_SOURCES
    max_tokens: int = DEFAULT_MAX_TOKENS
    suppress_values: frozenset[str] = DEFAULT_SUPPRESS_VALUES
    source_priority: tuple[str, ...] = DEFAULT_SOURCE_PRIORITY
    tty_priority: tuple[str, ...] = DEFAULT_TTY_PRIORITY
    stopwords_path: str | None = None
    parentheticals_path: str | None = None


@dataclass
class KnowledgeBase:
    language: str
    concepts: dict[str, Concept]
    terms: list[TermEntry]
    dictionary: dict[str, frozenset[str]]
    relations: list[Relation]
    semnet: list[SemanticType]
    stopwords: frozenset[str]
    parentheticals: frozenset[str]
    report: BuildReport

    @property
    def normalizer(self) -> Normalizer:
        return Normalizer(self.stopwords, self.parentheticals)

    def semantic_types_of(self, cui: str) -> frozenset[str]:
        concept = self.concepts.get(cui)
        return concept.semantic_types if concept else frozenset()


def _atom_rank(atom: RawAtom, config: KBConfig) -> tuple:
    def rank(value: str, priority: tuple[str, ...]) -> int:
        try:
            return priority.index(value)
        except ValueError:
            return len(priority)

    return (
        rank(atom.source, config.source_priority),
        rank(atom.tty, config.tty_priority),
        atom.term,
    )


def build_knowledge_base(
    atoms: Iterable[RawAtom],
    relations_path: str | Path | None,
    semtypes_path: str | Path | None,
    semnet_path: str | Path | None,
    config: KBConfig = KBConfig(),
    malformed_lines: int = 0,
) -> KnowledgeBase:
    """Filter atoms and assemble the knowledge base plus its build report.

    Raises KBError when no atom survives filtering.
    """
    stopwords = load_stopwords(config.stopwords_path)
    parentheticals = load_parentheticals(config.parentheticals_path)

    report = BuildReport(malformed_lines=malformed_lines)
    kept: list[RawAtom] = []
    seen_atoms: set[tuple[str, str, str]] = set()
    for atom in atoms:
        report.parsed_atoms += 1
        decision = filter_atom(
            atom,
            stopwords,
            language=config.language,
            excluded_sources=config.excluded_sources,
            max_tokens=config.max_tokens,
            suppress_values=config.suppress_values,
        )
        if not decision.keep:
            report.rejects[decision.reason] = report.rejects.get(decision.reason, 0) + 1
            continue
        report.kept_atoms += 1
        key = (atom.cui, atom.term, atom.source)
        if key in seen_atoms:
            continue
        seen_atoms.add(key)
        kept.append(atom)

    if not kept:
        raise KBError("no terms survive filtering; refusing to build an empty KB")

    kept_cuis = frozenset(a.cui for a in kept)

    rel_report = SkipReport(str(relations_path) if relations_path else "")
    relations = (
        parse_relation_file(relations_path, kept_cuis, report=rel_report)
        if relations_path
        else []
    )
    if rel_report.skipped:
        log.warning("skipped %d malformed relation lines", rel_report.skipped)

    sty_report = SkipReport(str(semtypes_path) if semtypes_path else "")
    semtypes = (
        parse_semtype_file(semtypes_path, kept_cuis, report=sty_report)
        if semtypes_path
        else {}
    )
    semnet = parse_semnet_file(semnet_path) if semnet_path else []

    normalizer = Normalizer(stopwords, parentheticals)

    by_term: dict[str, list[RawAtom]] = {}
    by_cui: dict[str, list[RawAtom]] = {}
    for atom in kept:
        by_term.setdefault(atom.term, []).append(atom)
        by_cui.setdefault(atom.cui, []).append(atom)

    terms: list[TermEntry] = []
    dictionary: dict[str, set[str]] = {}
    for term in sorted(by_term):
        group = by_term[term]
        normalized = normalizer(term)
        entry = TermEntry(
            term=term,
            normalized=normalized,
            cuis=frozenset(a.cui for a in group),
            sources=frozenset(a.source for a in group),
        )
        terms.append(entry)
        if normalized:
            dictionary.setdefault(normalized, set()).update(entry.cuis)

    concepts: dict[str, Concept] = {}
    for cui in sorted(by_cui):
        group = sorted(by_cui[cui], key=lambda a: _atom_rank(a, config))
        per_source: dict[str, list[str]] = {}
        for atom in group:
            bucket = per_source.setdefault(atom.source, [])
            if atom.term not in bucket:
                bucket.append(atom.term)
        concepts[cui] = Concept(
            cui=cui,
            preferred_name=group[0].term,
            semantic_types=frozenset(semtypes.get(cui, set())),
            sources=frozenset(a.source for a in group),
            terms_by_source={s: tuple(sorted(ts)) for s, ts in per_source.items()},
        )

    report.concepts = len(concepts)
    report.unique_terms = len(by_term)
    report.unique_terms_per_cui = len({(a.cui, a.term) for a in kept})
    report.relations = len(relations)
    report.semantic_types = len(semnet)

    return KnowledgeBase(
        language=config.language,
        concepts=concepts,
        terms=terms,
        dictionary={k: frozenset(v) for k, v in dictionary.items()},
        relations=relations,
        semnet=semnet,
        stopwords=stopwords,
        parentheticals=parentheticals,
        report=report,
    )


def build_from_release(
    release_dir: str | Path,
    config: KBConfig = KBConfig(),
    concepts_file: str = "concepts.psv",
    relations_file: str = "relations.psv",
    semtypes_file: str = "semtypes.psv",
    semnet_file: str = "semnet.tsv",
) -> KnowledgeBase:
    """Build a KB from a release directory with the default file names."""
    release_dir = Path(release_dir)
    concepts_path = release_dir / concepts_file
    if not concepts_path.exists():
        raise KBError(f"concept file not found: {concepts_path}")

    skip = SkipReport(str(concepts_path))
    atoms = list(parse_concept_file(concepts_path, report=skip))

    def optional(name: str) -> Path | None:
        p = release_dir / name
        return p if p.exists() else None

    return build_knowledge_base(
        atoms,
        optional(relations_file),
        optional(semtypes_file),
        optional(semnet_file),
        config=config,
        malformed_lines=skip.skipped,
    )


def is_valid_cui(cui: str) -> bool:
    return bool(_CUI_RE.fullmatch(cui))


def save_kb(kb: KnowledgeBase, path: str | Path) -> None:
    """Write the KB snapshot (gzipped JSON, versioned)."""
    payload = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "language": kb.language,
        "stopwords": sorted(kb.stopwords),
        "parentheticals": sorted(kb.parentheticals),
        "concepts": {
            c.cui: {
                "preferred_name": c.preferred_name,
                "semantic_types": sorted(c.semantic_types),
                "sources": sorted(c.sources),
                "terms_by_source": {s: list(ts) for s, ts in sorted(c.terms_by_source.items())},
            }
            for c in kb.concepts.values()
        },
        "terms": [
            {
                "term": t.term,
                "normalized": t.normalized,
                "cuis": sorted(t.cuis),
                "sources": sorted(t.sources),
            }
            for t in kb.terms
        ],
        "dictionary": {k: sorted(v) for k, v in sorted(kb.dictionary.items())},
        "relations": [list(r) for r in kb.relations],
        "semnet": [[t.tui, t.name, t.parent or ""] for t in kb.semnet],
        "report": kb.report.to_dict(),
    }
    with gzip.open(path, "wt", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)


def load_kb(path: str | Path) -> KnowledgeBase:
    """Load a KB snapshot written by save_kb."""
    try:
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise KBError(f"cannot read KB snapshot {path}: {exc}") from exc

    if payload.get("format") != SNAPSHOT_FORMAT:
        raise KBError(f"not a {SNAPSHOT_FORMAT} snapshot: {path}")
    if payload.get("version") != SNAPSHOT_VERSION:
        raise KBError(f"unsupported snapshot version {payload.get('version')}")

    report = BuildReport()
    stored = payload.get("report", {})
    report.parsed_atoms = stored.get("parsed_atoms", 0)
    report.malformed_lines = stored.get("malformed_lines", 0)
    report.kept_atoms = stored.get("kept_atoms", 0)
    report.rejects = dict(stored.get("rejects", {}))
    report.concepts = stored.get("concepts", 0)
    report.unique_terms = stored.get("unique_terms", 0)
    report.unique_terms_per_cui = stored.get("unique_terms_per_cui", 0)
    report.relations = stored.get("relations", 0)
    report.semantic_types = stored.get("semantic_types", 0)

    concepts = {
        cui: Concept(
            cui=cui,
            preferred_name=c["preferred_name"],
            semantic_types=frozenset(c["semantic_types"]),
            sources=frozenset(c["sources"]),
            terms_by_source={s: tuple(ts) for s, ts in c["terms_by_source"].items()},
        )
        for cui, c in payload["concepts"].items()
    }
    terms = [
        TermEntry(
            term=t["term"],
            normalized=t["normalized"],
            cuis=frozenset(t["cuis"]),
            sources=frozenset(t["sources"]),
        )
        for t in payload["terms"]
    ]
    return KnowledgeBase(
        language=payload["language"],
        concepts=concepts,
        terms=terms,
        dictionary={k: frozenset(v) for k, v in payload["dictionary"].items()},
        relations=[Relation(*r) for r in payload["relations"]],
        semnet=[SemanticType(t[0], t[1], t[2] or None) for t in payload["semnet"]],
        stopwords=frozenset(payload["stopwords"]),
        parentheticals=frozenset(payload["parentheticals"]),
        report=report,
    )
