"""termlink: terminology normalization for Spanish clinical text.

Links text spans to concepts of a UMLS-style terminology through indexed
candidate retrieval, lexical reranking, longest-match candidate generation
and Personalized PageRank disambiguation, with an agreement-evaluation
harness and an HTTP annotation service.
"""
from .agreement import (
    AgreementReport,
    agreement_report,
    bootstrap_ci,
    cohens_kappa,
    document_units,
    landis_label,
    pooled_kappa,
)
from .index import TermIndex, build_index
from .kb import (
    KBConfig,
    KnowledgeBase,
    build_from_release,
    build_knowledge_base,
    load_kb,
    normalize_string,
    sample_release_dir,
    save_kb,
)
from .mapping import Annotation, PipelineConfig
from .pipeline import AnnotatedDocument, Annotator
from .wsd import build_graph, personalized_pagerank

__version__ = "0.1.0"

__all__ = [
    "AgreementReport",
    "AnnotatedDocument",
    "Annotation",
    "Annotator",
    "KBConfig",
    "KnowledgeBase",
    "PipelineConfig",
    "TermIndex",
    "agreement_report",
    "bootstrap_ci",
    "build_from_release",
    "build_graph",
    "build_index",
    "build_knowledge_base",
    "cohens_kappa",
    "document_units",
    "landis_label",
    "load_kb",
    "normalize_string",
    "personalized_pagerank",
    "pooled_kappa",
    "sample_release_dir",
    "save_kb",
]
