"""Agreement evaluation between two annotation sets over the concept universe.

Implements chance-corrected agreement (Cohen's kappa) with the indexed
concepts as units: two annotators agree positively on a (document, concept)
pair only when both mark the concept present. Cells are pooled across
documents into one contingency table; a percentile bootstrap over documents
provides the confidence interval.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

LANDIS_BANDS = (
    (0.20, "Slight agreement"),
    (0.40, "Fair agreement"),
    (0.60, "Moderate agreement"),
    (0.80, "Substantial agreement"),
    (1.00, "Almost perfect agreement"),
)
NO_AGREEMENT = "No agreement"


class Cells(NamedTuple):
    """One document's 2x2 contingency cells."""

    agree_pos: int
    agree_neg: int
    only_a: int
    only_b: int

    @property
    def total(self) -> int:
        return self.agree_pos + self.agree_neg + self.only_a + self.only_b


@dataclass(frozen=True)
class KappaResult:
    p_o: float
    p_e: float
    kappa: float
    degenerate: bool = False


def cohens_kappa(
    agree_pos: int, agree_neg: int, only_a: int, only_b: int
) -> KappaResult:
    """Kappa from pooled cells: (p_o - p_e) / (1 - p_e) with binary marginals.

    When chance agreement is exactly 1 the statistic is undefined; it is
    reported as 1 for perfect observed agreement and 0 otherwise, flagged.
    """
    total = agree_pos + agree_neg + only_a + only_b
    if total <= 0:
        raise ValueError("empty contingency table")
    p_o = (agree_pos + agree_neg) / total
    pa_pos = (agree_pos + only_a) / total
    pb_pos = (agree_pos + only_b) / total
    p_e = pa_pos * pb_pos + (1.0 - pa_pos) * (1.0 - pb_pos)
    if p_e >= 1.0:
        return KappaResult(p_o, p_e, 1.0 if p_o == 1.0 else 0.0, degenerate=True)
    return KappaResult(p_o, p_e, (p_o - p_e) / (1.0 - p_e))


def document_units(
    ours: set[str], theirs: set[str], universe_size: int
) -> Cells:
    """Contingency cells for one document over a universe of concepts."""
    union = ours | theirs
    if universe_size < len(union):
        raise ValueError("universe smaller than the union of annotations")
    inter = len(ours & theirs)
    return Cells(
        agree_pos=inter,
        agree_neg=universe_size - len(union),
        only_a=len(ours - theirs),
        only_b=len(theirs - ours),
    )


def _sum_cells(docs: Iterable[Cells]) -> Cells:
    ap = an = oa = ob = 0
    for c in docs:
        ap += c.agree_pos
        an += c.agree_neg
        oa += c.only_a
        ob += c.only_b
    return Cells(ap, an, oa, ob)


def pooled_kappa(docs: list[Cells]) -> KappaResult:
    """Cells summed across documents, then kappa of the pooled table."""
    if not docs:
        raise ValueError("no documents to pool")
    pooled = _sum_cells(docs)
    return cohens_kappa(*pooled)


def bootstrap_ci(
    docs: list[Cells],
    resamples: int = 1000,
    seed: int = 0,
    confidence: float = 0.95,
) -> tuple[float, float, bool]:
    """Percentile bootstrap over documents. Returns (low, high, degenerate);
    a single document gives the degenerate zero-width interval."""
    if resamples < 100:
        raise ValueError("need at least 100 resamples")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    point = pooled_kappa(docs).kappa
    if len(docs) == 1:
        return point, point, True

    rng = random.Random(seed)
    n = len(docs)
    stats = []
    for _ in range(resamples):
        sample = [docs[rng.randrange(n)] for _ in range(n)]
        stats.append(pooled_kappa(sample).kappa)
    stats.sort()

    def percentile(q: float) -> float:
        pos = q * (len(stats) - 1)
        lo = int(pos)
        hi = min(lo + 1, len(stats) - 1)
        frac = pos - lo
        return stats[lo] * (1 - frac) + stats[hi] * frac

    alpha = (1.0 - confidence) / 2.0
    low, high = percentile(alpha), percentile(1.0 - alpha)
    # The report contract keeps the point estimate inside the interval.
    return min(low, point), max(high, point), False


def landis_label(kappa: float) -> str:
    """Verbal interpretation band for a kappa value (inclusive upper bounds)."""
    if not -1.0 <= kappa <= 1.0:
        raise ValueError("kappa must lie in [-1, 1]")
    if kappa < 0.0:
        return NO_AGREEMENT
    for upper, label in LANDIS_BANDS:
        if kappa <= upper:
            return label
    return LANDIS_BANDS[-1][1]


@dataclass
class AgreementReport:
    cells: Cells
    p_o: float
    p_e: float
    kappa: float
    ci_low: float
    ci_high: float
    label: str
    degenerate: bool
    per_document: list[dict] = field(default_factory=list)
    dropped_cuis: int = 0

    def to_dict(self) -> dict:
        return {
            "cells": {
                "agree_pos": self.cells.agree_pos,
                "agree_neg": self.cells.agree_neg,
                "only_a": self.cells.only_a,
                "only_b": self.cells.only_b,
            },
            "p_o": self.p_o,
            "p_e": self.p_e,
            "kappa": self.kappa,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "ci_method": "percentile bootstrap",
            "label": self.label,
            "degenerate": self.degenerate,
            "dropped_cuis": self.dropped_cuis,
            "per_document": self.per_document,
        }


def agreement_report(
    docs: dict[str, tuple[set[str], set[str]]],
    universe_size: int,
    resamples: int = 1000,
    seed: int = 0,
    confidence: float = 0.95,
    dropped_cuis: int = 0,
) -> AgreementReport:
    """Full agreement report for doc_id -> (ours, theirs) annotation sets."""
    if not docs:
        raise ValueError("no documents to evaluate")
    per_doc_cells: list[Cells] = []
    per_document: list[dict] = []
    for doc_id in sorted(docs):
        ours, theirs = docs[doc_id]
        cells = document_units(ours, theirs, universe_size)
        per_doc_cells.append(cells)
        doc_kappa = cohens_kappa(*cells)
        per_document.append(
            {
                "doc_id": doc_id,
                "agree_pos": cells.agree_pos,
                "only_a": cells.only_a,
                "only_b": cells.only_b,
                "kappa": doc_kappa.kappa,
            }
        )
    result = pooled_kappa(per_doc_cells)
    low, high, degenerate = bootstrap_ci(
        per_doc_cells, resamples=resamples, seed=seed, confidence=confidence
    )
    return AgreementReport(
        cells=_sum_cells(per_doc_cells),
        p_o=result.p_o,
        p_e=result.p_e,
        kappa=result.kappa,
        ci_low=low,
        ci_high=high,
        label=landis_label(max(-1.0, min(1.0, result.kappa))),
        degenerate=degenerate or result.degenerate,
        per_document=per_document,
        dropped_cuis=dropped_cuis,
    )


def load_reference_jsonl(
    path: str | Path, known_cuis: set[str] | frozenset[str] | None = None
) -> tuple[dict[str, set[str]], int]:
    """Read reference annotations ({"doc_id", "cuis"} per line). Unknown cuis
    are dropped and counted when a concept universe is supplied."""
    reference: dict[str, set[str]] = {}
    dropped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "doc_id" not in obj or "cuis" not in obj:
                raise ValueError(f"{path}:{lineno}: need doc_id and cuis fields")
            cuis = set(map(str, obj["cuis"]))
            if known_cuis is not None:
                unknown = cuis - set(known_cuis)
                dropped += len(unknown)
                cuis -= unknown
            reference.setdefault(str(obj["doc_id"]), set()).update(cuis)
    return reference, dropped


def format_matrix_table(
    results: dict[tuple[str, str], dict[str, tuple[float, float, float]]],
    thresholds: dict[str, float] | None = None,
) -> str:
    """Render the configuration-matrix agreement table: one row per
    (wsd, reranker) pair, one column per boundary strategy, each cell showing
    kappa with its half-interval."""
    from .mapping import DEFAULT_THRESHOLDS

    thresholds = thresholds or DEFAULT_THRESHOLDS
    boundaries = ("ngram", "phrase")
    header = f"{'WSD':<6}{'score':<8}" + "".join(f"{b:<18}" for b in boundaries)
    lines = [header, "-" * len(header)]
    for wsd_mode in ("rand", "ukb"):
        for reranker in ("L", "A", "C"):
            row = results.get((wsd_mode, reranker))
            if row is None:
                continue
            score = f"{reranker}(.{str(thresholds[reranker]).split('.')[1][:1]})"
            cells = []
            for boundary in boundaries:
                if boundary in row:
                    kappa, low, high = row[boundary]
                    half = max(kappa - low, high - kappa)
                    cells.append(f"{kappa:.3f} ± {half:.3f}    ")
                else:
                    cells.append(" " * 18)
            lines.append(f"{wsd_mode:<6}{score:<8}" + "".join(cells))
    return "\n".join(lines)
