"""HTTP service: annotation, concept lookup and the semantic-network tree.

Read-only endpoints over one shared immutable Annotator; per-request state
only, so any interleaving of concurrent requests behaves like serial
execution. All 4xx responses carry a machine-readable error code.
"""
from __future__ import annotations

import logging
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .kb import KnowledgeBase, SemanticType, is_valid_cui
from .mapping import ConfigError, PipelineConfig
from .pipeline import Annotator

log = logging.getLogger(__name__)

DEFAULT_MAX_TEXT_BYTES = 100_000
HIERARCHICAL_PARENT_RELS = frozenset({"PAR"})
HIERARCHICAL_CHILD_RELS = frozenset({"CHD"})


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


def _semnet_tree(semnet: list[SemanticType]) -> list[dict]:
    children: dict[str | None, list[SemanticType]] = {}
    for st in semnet:
        children.setdefault(st.parent, []).append(st)

    def node(st: SemanticType) -> dict:
        return {
            "tui": st.tui,
            "name": st.name,
            "children": [node(c) for c in sorted(children.get(st.tui, []), key=lambda s: s.tui)],
        }

    return [node(st) for st in sorted(children.get(None, []), key=lambda s: s.tui)]


class ConceptNavigator:
    """Hypernym/hyponym lookup over the hierarchical relation types."""

    def __init__(
        self,
        kb: KnowledgeBase,
        parent_rels: frozenset[str] = HIERARCHICAL_PARENT_RELS,
        child_rels: frozenset[str] = HIERARCHICAL_CHILD_RELS,
    ):
        self.kb = kb
        self.hypernyms: dict[str, set[str]] = {}
        self.hyponyms: dict[str, set[str]] = {}
        for rel in kb.relations:
            # (cui1, cui2, PAR): cui2 is a parent of cui1
            if rel.rtype in parent_rels:
                self.hypernyms.setdefault(rel.cui1, set()).add(rel.cui2)
                self.hyponyms.setdefault(rel.cui2, set()).add(rel.cui1)
            elif rel.rtype in child_rels:
                self.hyponyms.setdefault(rel.cui1, set()).add(rel.cui2)
                self.hypernyms.setdefault(rel.cui2, set()).add(rel.cui1)

    def _named(self, cuis: set[str]) -> list[dict]:
        out = []
        for cui in sorted(cuis):
            concept = self.kb.concepts.get(cui)
            if concept is not None:
                out.append({"cui": cui, "name": concept.preferred_name})
        return out

    def concept_card(self, cui: str) -> dict:
        concept = self.kb.concepts[cui]
        name_by_tui = {st.tui: st.name for st in self.kb.semnet}
        return {
            "cui": concept.cui,
            "preferred_name": concept.preferred_name,
            "terms_by_source": {
                source: list(terms)
                for source, terms in sorted(concept.terms_by_source.items())
            },
            "semantic_types": [
                {"tui": tui, "name": name_by_tui.get(tui)}
                for tui in sorted(concept.semantic_types)
            ],
            "definition": None,
            "hypernyms": self._named(self.hypernyms.get(cui, set())),
            "hyponyms": self._named(self.hyponyms.get(cui, set())),
        }


def create_app(
    annotator: Annotator | None = None,
    cors_origins: list[str] | None = None,
    max_text_bytes: int = DEFAULT_MAX_TEXT_BYTES,
) -> FastAPI:
    app = FastAPI(title="termlink", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    navigator = ConceptNavigator(annotator.kb) if annotator else None

    @app.exception_handler(ApiError)
    async def handle_api_error(_: Request, exc: ApiError) -> JSONResponse:
        return _error_response(exc.status, exc.code, exc.message)

    def require_annotator() -> Annotator:
        if annotator is None:
            raise ApiError(503, "kb_not_loaded", "no knowledge base loaded")
        return annotator

    @app.post("/annotate")
    async def annotate(request: Request) -> Any:
        ann = require_annotator()
        try:
            payload = await request.json()
        except Exception:
            raise ApiError(400, "bad_json", "request body is not valid JSON") from None
        if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
            raise ApiError(400, "bad_request", 'body must be {"text": ..., "config": {...}}')
        text = payload["text"]
        if len(text.encode("utf-8")) > max_text_bytes:
            raise ApiError(413, "text_too_large", f"text exceeds {max_text_bytes} bytes")
        raw_config = payload.get("config") or {}
        if not isinstance(raw_config, dict):
            raise ApiError(400, "invalid_config", "config must be an object")
        try:
            config = PipelineConfig.from_dict(raw_config)
        except ConfigError as exc:
            raise ApiError(400, "invalid_config", str(exc)) from None
        doc = ann.annotate(text, config, doc_id=str(payload.get("doc_id", "doc")))
        return {
            "doc_id": doc.doc_id,
            "text": doc.text,
            "expanded_text": doc.expanded_text,
            "annotations": [a.to_dict() for a in doc.annotations],
            "config": doc.config,
            "timings": doc.timings,
            "wsd_fallbacks": doc.wsd_fallbacks,
        }

    @app.get("/concepts/{cui}")
    async def concept(cui: str) -> Any:
        ann = require_annotator()
        if not is_valid_cui(cui):
            raise ApiError(400, "invalid_cui", f"malformed concept identifier: {cui}")
        if cui not in ann.kb.concepts:
            raise ApiError(404, "unknown_cui", f"no concept {cui} in the knowledge base")
        assert navigator is not None
        return navigator.concept_card(cui)

    @app.get("/semantic-network")
    async def semantic_network() -> Any:
        ann = require_annotator()
        return _semnet_tree(ann.kb.semnet)

    return app
