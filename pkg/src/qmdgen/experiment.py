"""Run the instance x prompt kind x RAG matrix and score every run."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import __version__
from .analysis import extract_generated_inventory, parse_source
from .circuit import canonical_text, expected_inventory, load_model
from .config import LLMSettings, RagSettings, Settings
from .errors import ConfigInvalid, EmptyHypothesis, QmdgenError
from .llm import (
    EchoProvider,
    FixedProvider,
    LiveProvider,
    ResponseCache,
    ScriptedProvider,
    complete,
    extract_code,
)
from .metrics.codebleu import CodeBleuWeights, codebleu
from .metrics.elements import match_inventories, score_counts
from .prompts import PromptKind, build_prompt
from .reference import render_reference
from .report import CellResult, ExperimentReport, RunRecord, render_csv, render_json, render_markdown
from .retrieval import CorpusIndex, ingest_corpus, retrieve

log = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    model_paths: list
    prompt_kinds: list = field(default_factory=lambda: [PromptKind.GENERIC, PromptKind.SPECIFIC])
    rag: list = field(default_factory=lambda: ["off"])
    runs: int = 10
    llm: LLMSettings = field(default_factory=LLMSettings)
    retrieval: RagSettings = field(default_factory=RagSettings)
    reference_dir: Optional[Path] = None
    output_dir: Optional[Path] = None
    template_dir: Optional[Path] = None
    stereotype_aliases: Optional[dict] = None
    match_operands: bool = True
    weights: CodeBleuWeights = field(default_factory=CodeBleuWeights)
    codebleu: bool = True
    snapshot: dict = field(default_factory=dict)

    @classmethod
    def from_settings(cls, s: Settings) -> "ExperimentConfig":
        e = s.experiment
        return cls(
            model_paths=list(e.models), prompt_kinds=list(e.prompt_kinds), rag=list(e.rag), runs=e.runs,
            llm=s.llm, retrieval=s.rag, reference_dir=e.reference_dir, output_dir=e.output_dir,
            template_dir=s.template_dir, stereotype_aliases=s.stereotype_aliases,
            match_operands=s.match_operands, weights=s.weights, codebleu=e.codebleu, snapshot=s.raw,
        )

    def validate(self) -> None:
        if self.runs < 1:
            raise ConfigInvalid("runs must be >= 1")
        if not self.model_paths:
            raise ConfigInvalid("no model instances configured")
        if not self.prompt_kinds or not self.rag:
            raise ConfigInvalid("prompt kinds and RAG modes must be non-empty")
        for mode in self.rag:
            if mode not in ("off", "on"):
                raise ConfigInvalid(f"RAG mode must be 'off' or 'on', got {mode!r}")
        stems = [Path(p).stem for p in self.model_paths]
        if len(set(stems)) != len(stems):
            raise ConfigInvalid("model instance file names must be unique")
        for p in self.model_paths:
            if not Path(p).is_file():
                raise ConfigInvalid(f"model file not found: {p}")
        if self.codebleu and self.reference_dir is not None:
            for stem in stems:
                if not (Path(self.reference_dir) / f"{stem}.py").is_file():
                    raise ConfigInvalid(f"no reference program {stem}.py in {self.reference_dir}")
        if "on" in self.rag and self.retrieval.index_path is None and self.retrieval.corpus_root is None:
            raise ConfigInvalid("RAG enabled but neither rag.index nor rag.corpus.root is set")


@dataclass
class _Instance:
    name: str
    model: object = None
    reference: Optional[str] = None
    error: Optional[str] = None


def _load_instances(cfg: ExperimentConfig) -> list[_Instance]:
    out = []
    for path in cfg.model_paths:
        inst = _Instance(Path(path).stem)
        try:
            inst.model = load_model(path, cfg.stereotype_aliases)
            if cfg.reference_dir is not None:
                inst.reference = (Path(cfg.reference_dir) / f"{inst.name}.py").read_text(encoding="utf-8")
            else:
                inst.reference = render_reference(inst.model)
        except (QmdgenError, OSError) as exc:
            inst.error = f"{type(exc).__name__}: {exc}"
        out.append(inst)
    return out


def make_provider(llm: LLMSettings, instances):
    if llm.provider == "echo":
        refs = {} if llm.references_dir else {i.name: i.reference for i in instances if i.reference is not None}
        return EchoProvider(refs, llm.references_dir)
    if llm.provider == "fixed":
        if llm.text is None:
            raise ConfigInvalid("fixed provider needs llm.text")
        return FixedProvider(llm.text)
    if llm.provider == "scripted":
        return ScriptedProvider(llm.responses)
    if llm.provider == "live":
        return LiveProvider(llm.endpoint)
    raise ConfigInvalid(f"unknown provider {llm.provider!r}")


def load_index(rag: RagSettings) -> CorpusIndex:
    if rag.index_path is not None and Path(rag.index_path).is_file():
        return CorpusIndex.load(rag.index_path)
    if rag.corpus_root is None:
        raise ConfigInvalid(f"index file {rag.index_path} not found and no corpus root configured")
    return ingest_corpus(rag.corpus_root, rag.chunk, rag.bm25, rag.extensions)


def score_code(code: str, model, reference: Optional[str], match_operands=True, weights=None):
    """Score one generated program; returns (MetricRow, details dict)."""
    tree = parse_source(code)
    generated = extract_generated_inventory(tree)
    counts = match_inventories(expected_inventory(model), generated, match_operands)
    details = {
        "counts": counts.to_dict(),
        "generated_inventory": generated.to_dict(),
        "diagnostics": list(generated.diagnostics),
        "parse_degraded": tree.degraded,
        "codebleu": None,
    }
    cb_total = None
    if reference is not None:
        try:
            breakdown = codebleu(code, reference, weights)
            cb_total = breakdown.total
            details["codebleu"] = breakdown.to_dict()
        except EmptyHypothesis:
            cb_total = 0.0
            details["diagnostics"].append({"kind": "EmptyHypothesis", "detail": "generated code is empty"})
    return score_counts(counts, cb_total), details


def _run_one(cfg, provider, cache, index, inst: _Instance, kind, rag_mode, run_no):
    record = {"instance": inst.name, "prompt": kind.value, "rag": rag_mode, "run": run_no}
    if inst.error:
        return RunRecord(run_no, error=inst.error), record
    try:
        text = canonical_text(inst.model)
        context = retrieve(index, text, cfg.retrieval.k) if rag_mode == "on" else []
        prompt = build_prompt(text, kind, context, cfg.template_dir)
        record["prompt_digest"] = prompt.digest()
        record["context_ids"] = list(prompt.context_ids)
        completion = complete(prompt, cfg.llm.params, provider, cache, salt=f"run-{run_no}", instance=inst.name)
        code = extract_code(completion)
        record["code"] = code
        record["cached"] = completion.cached
        row, details = score_code(code, inst.model, inst.reference if cfg.codebleu else None,
                                  cfg.match_operands, cfg.weights)
        record.update(details)
        record["row"] = row.to_dict()
        return RunRecord(run_no, row, cached=completion.cached), record
    except Exception as exc:  # a failed run becomes an error row
        message = f"{type(exc).__name__}: {exc}"
        log.warning("%s %s rag-%s run %d failed: %s", inst.name, kind.value, rag_mode, run_no, message)
        record["error"] = message
        return RunRecord(run_no, error=message), record


def run_experiment(cfg: ExperimentConfig | Settings, provider=None, write: bool = True) -> ExperimentReport:
    if isinstance(cfg, Settings):
        cfg = ExperimentConfig.from_settings(cfg)
    cfg.validate()
    started = datetime.now(timezone.utc).isoformat()
    instances = _load_instances(cfg)
    provider = provider or make_provider(cfg.llm, instances)
    cache = ResponseCache(cfg.llm.cache_dir) if cfg.llm.cache_dir else None
    index = load_index(cfg.retrieval) if "on" in cfg.rag else None

    kinds = [PromptKind(k) for k in cfg.prompt_kinds]
    cells = [CellResult(inst.name, kind.value, mode) for inst in instances for kind in kinds for mode in cfg.rag]
    jobs = [
        (ci, inst, kind, mode, run)
        for ci, (inst, kind, mode) in enumerate((i, k, m) for i in instances for k in kinds for m in cfg.rag)
        for run in range(1, cfg.runs + 1)
    ]
    workers = 1 if getattr(provider, "sequential", False) else cfg.llm.max_in_flight
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_one, cfg, provider, cache, index, inst, kind, mode, run)
                   for _ci, inst, kind, mode, run in jobs]
        results = [f.result() for f in futures]

    run_files = []
    for (ci, *_rest), (rec, detail) in zip(jobs, results):
        cells[ci].records.append(rec)
        run_files.append((cells[ci].label, rec.run, detail))

    report = ExperimentReport(cells, {
        "tool_version": __version__,
        "config": cfg.snapshot,
        "provider": getattr(provider, "name", type(provider).__name__),
        "params": cfg.llm.params.__dict__.copy(),
        "cache_hits": sum(1 for rec, _d in results if rec.cached),
        "runs_total": len(results),
        "errors": sum(1 for rec, _d in results if rec.error),
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
    })
    if write and cfg.output_dir is not None:
        write_outputs(report, cfg.output_dir, run_files)
    return report


def write_outputs(report: ExperimentReport, output_dir, run_files=()) -> None:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.md").write_text(render_markdown(report), encoding="utf-8")
    (out / "report.csv").write_text(render_csv(report), encoding="utf-8")
    (out / "report.json").write_text(render_json(report), encoding="utf-8")
    for label, run_no, detail in run_files:
        cell_dir = out / "runs" / label
        cell_dir.mkdir(parents=True, exist_ok=True)
        (cell_dir / f"{run_no:02d}.json").write_text(
            json.dumps(detail, indent=2, sort_keys=True, default=list) + "\n", encoding="utf-8")
