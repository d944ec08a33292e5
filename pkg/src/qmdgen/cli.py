"""Command-line entry point.

Exit status: 0 on success, 1 for usage, validation or configuration errors,
2 for runtime and provider errors. Errors go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .circuit import canonical_text, load_model
from .errors import ConfigInvalid, EmptyModelText, LLMError, ModelError, QmdgenError, RetrievalError

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmdgen", description="Generate and evaluate quantum circuit code from models.")
    parser.add_argument("--version", action="version", version=f"qmdgen {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--version", action="version", version=f"qmdgen {__version__}")
        return p

    p = add("ingest", "Chunk a corpus directory and write a BM25 index.")
    p.add_argument("corpus_root", help="directory of sample code files")
    p.add_argument("--out", default="qmdgen-index.json", help="index file to write (default: %(default)s)")
    p.add_argument("--config", help="TOML config providing rag.* settings")
    p.add_argument("--max-lines", type=int, help="lines per chunk (overrides rag.chunk.max_lines)")
    p.add_argument("--overlap", type=int, help="overlap lines (overrides rag.chunk.overlap_lines)")

    p = add("generate", "Generate code for one model and print it.")
    p.add_argument("model", help="model file (.json fixture or XMI)")
    p.add_argument("--prompt", choices=["generic", "specific"], help="prompt template kind")
    p.add_argument("--rag", action="store_true", help="inject retrieved context")
    p.add_argument("--provider", choices=["echo", "fixed", "scripted", "live"], help="completion provider")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--index", help="BM25 index file (overrides rag.index)")
    p.add_argument("--show-prompt", action="store_true", help="print the prompt instead of calling the provider")

    p = add("evaluate", "Score generated code against a model (and optionally a reference program).")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--code", required=True, help="generated code file")
    p.add_argument("--ref", help="reference program for CodeBLEU")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--kind-only", action="store_true", help="match gates by kind only, ignoring operands")

    p = add("experiment", "Run the full instance x prompt x RAG matrix.")
    p.add_argument("--config", required=True, help="TOML config file")
    p.add_argument("--output-dir", help="override experiment.output_dir")

    p = add("report", "Re-render a saved report.json.")
    p.add_argument("report_json", help="report.json written by the experiment command")
    p.add_argument("--format", choices=["md", "csv", "json"], default="md", help="output format (default: %(default)s)")
    return parser


def _settings(path):
    from .config import load_settings

    return load_settings(path)


def _read_text(path, what) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileNotFoundError(f"cannot read {what} {path}: {exc.strerror or exc}") from None


def _load_model(path, settings):
    if not Path(path).is_file():
        raise FileNotFoundError(f"model file not found: {path}")
    return load_model(path, settings.stereotype_aliases)


def cmd_ingest(args, out):
    from .retrieval import ChunkConfig, ingest_corpus

    s = _settings(args.config)
    chunk = ChunkConfig(
        args.max_lines if args.max_lines is not None else s.rag.chunk.max_lines,
        args.overlap if args.overlap is not None else s.rag.chunk.overlap_lines,
    )
    if not Path(args.corpus_root).is_dir():
        raise FileNotFoundError(f"corpus directory not found: {args.corpus_root}")
    index = ingest_corpus(args.corpus_root, chunk, s.rag.bm25, s.rag.extensions)
    index.save(args.out)
    summary = {"index": str(args.out), "chunks": len(index.chunks), "terms": len(index.postings),
               "ingest_errors": list(index.ingest_errors)}
    out.write(json.dumps(summary, indent=2) + "\n")


def cmd_generate(args, out):
    from .experiment import _Instance, load_index, make_provider
    from .llm import ResponseCache, complete, extract_code
    from .prompts import build_prompt
    from .reference import render_reference
    from .retrieval import retrieve

    s = _settings(args.config)
    model = _load_model(args.model, s)
    if args.provider:
        s.llm.provider = args.provider
    if args.index:
        s.rag.index_path = Path(args.index)
    kind = args.prompt or s.prompt_kind.value
    text = canonical_text(model)
    context = []
    if args.rag or s.rag.enabled:
        if s.rag.index_path is None and s.rag.corpus_root is None:
            raise ConfigInvalid("--rag needs --index or rag.index / rag.corpus.root in the config")
        context = retrieve(load_index(s.rag), text, s.rag.k)
    prompt = build_prompt(text, kind, context, s.template_dir)
    if args.show_prompt:
        out.write(f"[system]\n{prompt.system_text}\n[user]\n{prompt.user_text}")
        return
    instance = _Instance(Path(args.model).stem, model, render_reference(model))
    provider = make_provider(s.llm, [instance])
    cache = ResponseCache(s.llm.cache_dir) if s.llm.cache_dir else None
    completion = complete(prompt, s.llm.params, provider, cache, instance=instance.name)
    code = extract_code(completion)
    out.write(code if code.endswith("\n") else code + "\n")


def cmd_evaluate(args, out):
    from .experiment import score_code

    s = _settings(args.config)
    model = _load_model(args.model, s)
    code = _read_text(args.code, "code file")
    reference = _read_text(args.ref, "reference file") if args.ref else None
    match_operands = s.match_operands and not args.kind_only
    row, details = score_code(code, model, reference, match_operands, s.weights)
    result = {"row": row.to_dict(), **details}
    out.write(json.dumps(result, indent=2, sort_keys=True, default=list) + "\n")


def cmd_experiment(args, out):
    from .experiment import ExperimentConfig, run_experiment

    s = _settings(args.config)
    cfg = ExperimentConfig.from_settings(s)
    if args.output_dir:
        cfg.output_dir = Path(args.output_dir)
    report = run_experiment(cfg)
    summary = {
        "output_dir": str(cfg.output_dir),
        "cells": len(report.cells),
        "runs": report.provenance["runs_total"],
        "errors": report.provenance["errors"],
        "cache_hits": report.provenance["cache_hits"],
    }
    out.write(json.dumps(summary, indent=2) + "\n")


def cmd_report(args, out):
    from .report import load_report, render_report

    text = _read_text(args.report_json, "report")
    try:
        report = load_report(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigInvalid(f"{args.report_json} is not a valid report: {exc}") from None
    out.write(render_report(report, {"md": "markdown"}.get(args.format, args.format)))


COMMANDS = {
    "ingest": cmd_ingest,
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
    "experiment": cmd_experiment,
    "report": cmd_report,
}


def _fail(err, kind, message, code):
    err.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def dispatch(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(err, "UsageError", str(exc), EXIT_INVALID)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(err)
        return _fail(err, "UsageError", "a command is required", EXIT_INVALID)
    try:
        COMMANDS[args.command](args, out)
    except (ModelError, ConfigInvalid, EmptyModelText, RetrievalError, FileNotFoundError, ValueError) as exc:
        return _fail(err, type(exc).__name__, str(exc), EXIT_INVALID)
    except (LLMError, QmdgenError, OSError) as exc:
        return _fail(err, type(exc).__name__, str(exc), EXIT_RUNTIME)
    return EXIT_OK


def main(argv=None) -> int:
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
