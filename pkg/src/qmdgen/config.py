"""TOML configuration.

Every key is optional. Relative paths are resolved against the directory
holding the config file. Unknown keys are rejected so typos surface early.

Example::

    [llm]
    provider = "echo"          # echo | fixed | scripted | live
    model = "gpt-4o"
    cache_dir = "cache"
    max_in_flight = 4

    [rag]
    enabled = true
    k = 4
    corpus.root = "corpus"
    chunk.max_lines = 60

    [experiment]
    models = ["models/bell.json"]
    prompt_kinds = ["generic", "specific"]
    rag = ["off", "on"]
    runs = 10
    output_dir = "out"
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigInvalid
from .llm import DEFAULT_ENDPOINT, CompletionParams
from .metrics.codebleu import CodeBleuWeights
from .prompts import PromptKind
from .retrieval import DEFAULT_EXTENSIONS, BM25Params, ChunkConfig

PROVIDERS = ("echo", "fixed", "scripted", "live")
RAG_MODES = ("off", "on")


@dataclass
class LLMSettings:
    provider: str = "echo"
    endpoint: str = DEFAULT_ENDPOINT
    params: CompletionParams = field(default_factory=CompletionParams)
    cache_dir: Optional[Path] = None
    max_in_flight: int = 4
    references_dir: Optional[Path] = None
    responses: list = field(default_factory=list)
    text: Optional[str] = None


@dataclass
class RagSettings:
    enabled: bool = False
    k: int = 4
    chunk: ChunkConfig = field(default_factory=ChunkConfig)
    bm25: BM25Params = field(default_factory=BM25Params)
    corpus_root: Optional[Path] = None
    extensions: tuple = DEFAULT_EXTENSIONS
    index_path: Optional[Path] = None


@dataclass
class ExperimentSettings:
    models: list = field(default_factory=list)
    prompt_kinds: list = field(default_factory=lambda: [PromptKind.GENERIC, PromptKind.SPECIFIC])
    rag: list = field(default_factory=lambda: ["off"])
    runs: int = 10
    reference_dir: Optional[Path] = None
    output_dir: Path = Path("qmdgen-out")
    codebleu: bool = True


@dataclass
class Settings:
    llm: LLMSettings = field(default_factory=LLMSettings)
    rag: RagSettings = field(default_factory=RagSettings)
    template_dir: Optional[Path] = None
    prompt_kind: PromptKind = PromptKind.GENERIC
    stereotype_aliases: Optional[dict] = None
    match_operands: bool = True
    weights: CodeBleuWeights = field(default_factory=CodeBleuWeights)
    experiment: ExperimentSettings = field(default_factory=ExperimentSettings)
    base_dir: Path = Path(".")
    raw: dict = field(default_factory=dict, repr=False)


class _Reader:
    """Pops typed values out of a nested table, tracking dotted key names."""

    def __init__(self, table: dict, prefix: str, base: Path):
        self.table = dict(table)
        self.prefix = prefix
        self.base = base

    def _name(self, key):
        return f"{self.prefix}.{key}" if self.prefix else key

    def sub(self, key) -> "_Reader":
        value = self.table.pop(key, {})
        if not isinstance(value, dict):
            raise ConfigInvalid(f"{self._name(key)} must be a table")
        return _Reader(value, self._name(key), self.base)

    def get(self, key, kind, default=None):
        if key not in self.table:
            return default
        value = self.table.pop(key)
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is not None and (not isinstance(value, kind) or (kind is int and isinstance(value, bool))):
            raise ConfigInvalid(f"{self._name(key)} must be {getattr(kind, '__name__', kind)}, got {value!r}")
        return value

    def path(self, key, default=None):
        value = self.get(key, str)
        if value is None:
            return default
        p = Path(value).expanduser()
        return p if p.is_absolute() else self.base / p

    def str_list(self, key, default):
        value = self.get(key, list)
        if value is None:
            return default
        if not all(isinstance(v, str) for v in value):
            raise ConfigInvalid(f"{self._name(key)} must be a list of strings")
        return value

    def finish(self):
        if self.table:
            names = ", ".join(sorted(self._name(k) for k in self.table))
            raise ConfigInvalid(f"unknown config key(s): {names}")


def settings_from_dict(data: dict, base_dir=".") -> Settings:
    base = Path(base_dir)
    root = _Reader(data, "", base)
    s = Settings(base_dir=base, raw=data)
    try:
        _read_llm(root.sub("llm"), s)
        _read_rag(root.sub("rag"), s)
        prompt = root.sub("prompt")
        s.template_dir = prompt.path("template_dir")
        s.prompt_kind = PromptKind(prompt.get("kind", str, "generic"))
        prompt.finish()
        model = root.sub("model")
        s.stereotype_aliases = _read_aliases(model)
        model.finish()
        _read_metrics(root.sub("metrics"), s)
        _read_experiment(root.sub("experiment"), s)
        root.finish()
    except ValueError as exc:
        # dataclass validators and enum lookups report bad values this way
        raise ConfigInvalid(str(exc)) from None
    return s


def _read_llm(r: _Reader, s: Settings):
    llm = s.llm
    llm.provider = r.get("provider", str, llm.provider)
    if llm.provider not in PROVIDERS:
        raise ConfigInvalid(f"llm.provider must be one of {', '.join(PROVIDERS)}")
    llm.endpoint = r.get("endpoint", str, llm.endpoint)
    d = CompletionParams()
    llm.params = CompletionParams(
        model_name=r.get("model", str, d.model_name),
        temperature=r.get("temperature", float, d.temperature),
        max_tokens=r.get("max_tokens", int, d.max_tokens),
        seed=r.get("seed", int, d.seed),
        timeout_s=r.get("timeout_s", int, d.timeout_s),
        retries=r.get("retries", int, d.retries),
    )
    llm.cache_dir = r.path("cache_dir")
    llm.max_in_flight = r.get("max_in_flight", int, llm.max_in_flight)
    if llm.max_in_flight < 1:
        raise ConfigInvalid("llm.max_in_flight must be >= 1")
    llm.references_dir = r.path("references_dir")
    llm.responses = r.str_list("responses", [])
    llm.text = r.get("text", str)
    r.finish()


def _read_rag(r: _Reader, s: Settings):
    rag = s.rag
    rag.enabled = r.get("enabled", bool, rag.enabled)
    rag.k = r.get("k", int, rag.k)
    if rag.k < 1:
        raise ConfigInvalid("rag.k must be >= 1")
    chunk = r.sub("chunk")
    rag.chunk = ChunkConfig(chunk.get("max_lines", int, 60), chunk.get("overlap_lines", int, 10))
    chunk.finish()
    bm25 = r.sub("bm25")
    rag.bm25 = BM25Params(bm25.get("k1", float, 1.2), bm25.get("b", float, 0.75))
    bm25.finish()
    corpus = r.sub("corpus")
    rag.corpus_root = corpus.path("root")
    rag.extensions = tuple(corpus.str_list("extensions", list(DEFAULT_EXTENSIONS)))
    corpus.finish()
    rag.index_path = r.path("index")
    r.finish()


def _read_aliases(r: _Reader):
    value = r.table.pop("stereotype_aliases", None)
    if value is None:
        return None
    if isinstance(value, str):
        p = Path(value)
        path = p if p.is_absolute() else r.base / p
        try:
            value = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigInvalid(f"model.stereotype_aliases: cannot read {path}: {exc}") from None
    if not isinstance(value, dict) or not all(isinstance(v, str) for v in value.values()):
        raise ConfigInvalid("model.stereotype_aliases must map stereotype names to gate kinds")
    return value


def _read_metrics(r: _Reader, s: Settings):
    s.match_operands = r.get("match_operands", bool, True)
    cb = r.sub("codebleu")
    s.weights = CodeBleuWeights(
        cb.get("alpha", float, 0.25), cb.get("beta", float, 0.25),
        cb.get("gamma", float, 0.25), cb.get("delta", float, 0.25),
    )
    cb.finish()
    r.finish()


def _read_experiment(r: _Reader, s: Settings):
    e = s.experiment
    base = r.base
    e.models = [p if p.is_absolute() else base / p for p in map(Path, r.str_list("models", []))]
    e.prompt_kinds = [PromptKind(k) for k in r.str_list("prompt_kinds", ["generic", "specific"])]
    e.rag = r.str_list("rag", ["on"] if s.rag.enabled else ["off"])
    bad = [m for m in e.rag if m not in RAG_MODES]
    if bad:
        raise ConfigInvalid(f"experiment.rag entries must be 'off' or 'on', got {bad}")
    e.runs = r.get("runs", int, e.runs)
    if e.runs < 1:
        raise ConfigInvalid("experiment.runs must be >= 1")
    e.reference_dir = r.path("reference_dir")
    e.output_dir = r.path("output_dir", base / "qmdgen-out")
    e.codebleu = r.get("codebleu", bool, True)
    r.finish()


def load_settings(path=None) -> Settings:
    if path is None:
        return Settings()
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc.strerror or exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(f"{path}: invalid TOML: {exc}") from None
    return settings_from_dict(data, path.parent)
