"""Command-line interface: build-kb, annotate, evaluate, serve."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import agreement, kb as kbmod, pipeline
from .mapping import ConfigError, PipelineConfig

log = logging.getLogger("termlink")

SNAPSHOT_ENV = "TERMLINK_KB"


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--boundary", choices=["ngram", "phrase"], default=None)
    parser.add_argument("--reranker", choices=["L", "A", "C"], default=None)
    parser.add_argument("--threshold", type=float, default=None)
    parser.add_argument("--wsd", choices=["ukb", "rand"], default=None)
    parser.add_argument(
        "--semantic-types",
        default=None,
        help="comma-separated TUIs restricting annotations to those types",
    )
    parser.add_argument("--ngram-min", type=int, default=None)
    parser.add_argument("--ngram-max", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None, help="seed for wsd=rand")


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    data: dict = {}
    if args.boundary is not None:
        data["boundary"] = args.boundary
    if args.reranker is not None:
        data["reranker"] = args.reranker
    if args.threshold is not None:
        data["threshold"] = args.threshold
    if args.wsd is not None:
        data["wsd"] = args.wsd
    if args.semantic_types is not None:
        data["semantic_type_filter"] = [
            t.strip() for t in args.semantic_types.split(",") if t.strip()
        ]
    if args.ngram_min is not None or args.ngram_max is not None:
        default = PipelineConfig()
        data["ngram_range"] = [
            args.ngram_min if args.ngram_min is not None else default.ngram_range[0],
            args.ngram_max if args.ngram_max is not None else default.ngram_range[1],
        ]
    if args.seed is not None:
        data["rand_seed"] = args.seed
    return PipelineConfig.from_dict(data)


def _snapshot_path(args: argparse.Namespace) -> Path:
    path = args.kb or os.environ.get(SNAPSHOT_ENV)
    if not path:
        raise SystemExit(f"no KB snapshot given (use --kb or ${SNAPSHOT_ENV})")
    return Path(path)


def _load_annotator(args: argparse.Namespace) -> pipeline.Annotator:
    snapshot = _snapshot_path(args)
    log.info("loading KB snapshot %s", snapshot)
    knowledge = kbmod.load_kb(snapshot)
    abbreviations = None
    if getattr(args, "abbreviations", None):
        abbreviations = pipeline.load_abbreviations(args.abbreviations)
    return pipeline.Annotator(knowledge, abbreviations=abbreviations)


def cmd_build_kb(args: argparse.Namespace) -> int:
    config = kbmod.KBConfig(
        language=args.language,
        excluded_sources=(
            frozenset(s.strip() for s in args.exclude_sources.split(",") if s.strip())
            if args.exclude_sources is not None
            else kbmod.DEFAULT_EXCLUDED_SOURCES
        ),
        max_tokens=args.max_term_tokens,
        stopwords_path=args.stopwords,
        parentheticals_path=args.parentheticals,
    )
    release = Path(args.release_dir)
    if str(release) == "sample":
        release = kbmod.sample_release_dir()
    knowledge = kbmod.build_from_release(release, config=config)
    kbmod.save_kb(knowledge, args.out)
    log.info("KB snapshot written to %s", args.out)
    print(json.dumps(knowledge.report.to_dict(), ensure_ascii=False, indent=2))
    return 0


def cmd_annotate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    annotator = _load_annotator(args)
    if args.text is not None:
        docs = [annotator.annotate(args.text, config, doc_id="stdin")]
    else:
        documents = list(pipeline.iter_documents(args.input))
        docs = pipeline.annotate_batch(annotator, documents, config)
    if args.out:
        pipeline.write_annotations(docs, args.out)
        log.info("wrote %d annotated documents to %s", len(docs), args.out)
    else:
        for doc in docs:
            print(doc.to_json())
    return 0


def _load_ours(path: Path) -> dict[str, set[str]]:
    """Read our annotation output (JSONL or a directory of per-doc JSON)."""
    ours: dict[str, set[str]] = {}

    def add(obj: dict) -> None:
        ours[str(obj["doc_id"])] = {a["cui"] for a in obj.get("annotations", [])}

    if path.is_dir():
        for child in sorted(path.glob("*.json")):
            add(json.loads(child.read_text(encoding="utf-8")))
    else:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    add(json.loads(line))
    return ours


def cmd_evaluate(args: argparse.Namespace) -> int:
    knowledge = kbmod.load_kb(_snapshot_path(args))
    universe = len(knowledge.concepts)
    ours = _load_ours(Path(args.ours))
    reference, dropped = agreement.load_reference_jsonl(
        args.reference, known_cuis=set(knowledge.concepts)
    )
    if dropped:
        log.warning("dropped %d reference cuis outside the concept universe", dropped)
    doc_ids = sorted(set(ours) | set(reference))
    docs = {
        doc_id: (ours.get(doc_id, set()), reference.get(doc_id, set()))
        for doc_id in doc_ids
    }
    report = agreement.agreement_report(
        docs,
        universe_size=universe,
        resamples=args.resamples,
        seed=args.ci_seed,
        confidence=args.confidence,
        dropped_cuis=dropped,
    )
    payload = json.dumps(report.to_dict(), ensure_ascii=False, indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        log.info("report written to %s", args.out)
    print(payload)
    print(
        f"\nkappa={report.kappa:.4f} [{report.ci_low:.4f}, {report.ci_high:.4f}] "
        f"-> {report.label}",
        file=sys.stderr,
    )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    annotator = _load_annotator(args)
    app = create_app(
        annotator,
        cors_origins=[o.strip() for o in args.cors_origin.split(",")],
        max_text_bytes=args.max_text_bytes,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="termlink",
        description="Terminology normalization for Spanish clinical text",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-kb", help="build a KB snapshot from a release directory")
    p.add_argument("release_dir", help='release directory, or "sample" for the bundled sample')
    p.add_argument("--out", required=True, help="snapshot output path (.json.gz)")
    p.add_argument("--language", default=kbmod.DEFAULT_LANGUAGE)
    p.add_argument("--exclude-sources", default=None, help="comma-separated source codes")
    p.add_argument("--max-term-tokens", type=int, default=kbmod.DEFAULT_MAX_TOKENS)
    p.add_argument("--stopwords", default=None, help="custom stopword list path")
    p.add_argument("--parentheticals", default=None, help="custom parenthetical list path")
    p.set_defaults(func=cmd_build_kb)

    p = sub.add_parser("annotate", help="annotate text, a file, a directory or a JSONL corpus")
    p.add_argument("--kb", default=None, help=f"KB snapshot (default ${SNAPSHOT_ENV})")
    p.add_argument("--input", default=None, help=".txt file, directory of .txt, or .jsonl")
    p.add_argument("--text", default=None, help="annotate a single string instead of --input")
    p.add_argument("--out", default=None, help=".jsonl file or output directory")
    p.add_argument("--abbreviations", default=None, help="custom abbreviation TSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("evaluate", help="agreement between our annotations and a reference")
    p.add_argument("--kb", default=None, help=f"KB snapshot (default ${SNAPSHOT_ENV})")
    p.add_argument("--ours", required=True, help="annotation JSONL or directory")
    p.add_argument("--reference", required=True, help="reference JSONL ({doc_id, cuis})")
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--ci-seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--kb", default=None, help=f"KB snapshot (default ${SNAPSHOT_ENV})")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--cors-origin", default="*", help="comma-separated allowed origins")
    p.add_argument("--max-text-bytes", type=int, default=100_000)
    p.add_argument("--abbreviations", default=None, help="custom abbreviation TSV")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    try:
        return args.func(args)
    except (kbmod.KBError, ConfigError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
