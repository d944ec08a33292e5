"""Line-window chunking of a code corpus and Okapi BM25 retrieval over it."""

from __future__ import annotations

import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyCorpus, EmptyQuery, IndexFormatError

log = logging.getLogger(__name__)

INDEX_FORMAT_VERSION = 1
DEFAULT_EXTENSIONS = (".py", ".txt")

_WORD = re.compile(r"[A-Za-z0-9_]+")
_CAMEL = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")


def tokenize(text: str) -> list[str]:
    terms = []
    for run in _WORD.findall(text):
        for piece in run.split("_"):
            terms.extend(t.lower() for t in _CAMEL.findall(piece))
    return terms


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.2
    b: float = 0.75


@dataclass(frozen=True)
class ChunkConfig:
    max_lines: int = 60
    overlap_lines: int = 10

    def __post_init__(self):
        if self.max_lines < 1:
            raise ValueError("max_lines must be >= 1")
        if not 0 <= self.overlap_lines < self.max_lines:
            raise ValueError("overlap_lines must satisfy 0 <= overlap_lines < max_lines")


@dataclass(frozen=True)
class CorpusChunk:
    chunk_id: str
    text: str
    token_count: int


@dataclass(frozen=True)
class ScoredChunk:
    chunk_id: str
    score: float
    rank: int
    text: str = ""


@dataclass
class CorpusIndex:
    chunks: list[CorpusChunk]
    postings: dict[str, list[tuple[int, int]]]
    avg_chunk_len: float
    params: BM25Params = field(default_factory=BM25Params)
    ingest_errors: list[str] = field(default_factory=list)

    @classmethod
    def from_chunks(cls, chunks, params=None, ingest_errors=()):
        postings: dict[str, list[tuple[int, int]]] = {}
        for ordinal, chunk in enumerate(chunks):
            for term, tf in sorted(Counter(tokenize(chunk.text)).items()):
                postings.setdefault(term, []).append((ordinal, tf))
        total = sum(c.token_count for c in chunks)
        avg = total / len(chunks) if chunks else 0.0
        return cls(list(chunks), dict(sorted(postings.items())), avg, params or BM25Params(), list(ingest_errors))

    def __len__(self):
        return len(self.chunks)

    def to_json(self) -> str:
        doc = {
            "format_version": INDEX_FORMAT_VERSION,
            "params": {"k1": self.params.k1, "b": self.params.b},
            "avg_chunk_len": self.avg_chunk_len,
            "chunks": [{"id": c.chunk_id, "text": c.text, "token_count": c.token_count} for c in self.chunks],
            "postings": {t: [list(p) for p in plist] for t, plist in self.postings.items()},
            "ingest_errors": self.ingest_errors,
        }
        return json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "CorpusIndex":
        try:
            doc = json.loads(text)
        except ValueError as exc:
            raise IndexFormatError(f"index is not valid JSON: {exc}") from None
        version = doc.get("format_version") if isinstance(doc, dict) else None
        if version != INDEX_FORMAT_VERSION:
            raise IndexFormatError(f"unsupported index format_version {version!r}")
        chunks = [CorpusChunk(c["id"], c["text"], c["token_count"]) for c in doc["chunks"]]
        postings = {t: [tuple(p) for p in plist] for t, plist in doc["postings"].items()}
        params = BM25Params(**doc["params"])
        return cls(chunks, postings, doc["avg_chunk_len"], params, list(doc.get("ingest_errors", [])))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "CorpusIndex":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def chunk_lines(lines: list[str], cfg: ChunkConfig) -> list[tuple[int, int]]:
    """Half-open ``(start, end)`` line windows covering ``lines``."""
    n = len(lines)
    stride = cfg.max_lines - cfg.overlap_lines
    windows = []
    start = 0
    while start < n:
        end = min(start + cfg.max_lines, n)
        windows.append((start, end))
        if end == n:
            break
        start += stride
    return windows


def ingest_corpus(root, chunk_cfg: ChunkConfig | None = None, params: BM25Params | None = None,
                  extensions=DEFAULT_EXTENSIONS) -> CorpusIndex:
    root = Path(root)
    chunk_cfg = chunk_cfg or ChunkConfig()
    exts = {e.lower() if e.startswith(".") else "." + e.lower() for e in extensions}
    if not root.is_dir():
        raise EmptyCorpus(f"corpus root {str(root)!r} is not a directory")
    files = sorted(
        (p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in exts),
        key=lambda p: p.relative_to(root).as_posix(),
    )
    if not files:
        raise EmptyCorpus(f"no files with extensions {sorted(exts)} under {str(root)!r}")

    chunks = []
    errors = []
    for path in files:
        rel = path.relative_to(root).as_posix()
        try:
            text = path.read_bytes().decode("utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            errors.append(f"{rel}: {exc}")
            log.warning("skipping %s: %s", rel, exc)
            continue
        lines = text.splitlines()
        for ordinal, (start, end) in enumerate(chunk_lines(lines, chunk_cfg)):
            body = "\n".join(lines[start:end])
            chunks.append(CorpusChunk(f"{rel}#{ordinal}", body, len(tokenize(body))))
    if not chunks:
        raise EmptyCorpus(f"corpus under {str(root)!r} produced no chunks")
    return CorpusIndex.from_chunks(chunks, params, errors)


def idf(n_docs: int, df: int) -> float:
    # Lucene variant; the +1 keeps every weight positive
    return math.log((n_docs - df + 0.5) / (df + 0.5) + 1.0)


def score_all(index: CorpusIndex, query: str) -> dict[int, float]:
    terms = sorted(set(tokenize(query)))
    if not terms:
        raise EmptyQuery("query has no indexable terms")
    k1, b = index.params.k1, index.params.b
    n = len(index.chunks)
    avg = index.avg_chunk_len or 1.0
    scores: dict[int, float] = {}
    for term in terms:
        plist = index.postings.get(term)
        if not plist:
            continue
        w = idf(n, len(plist))
        for ordinal, tf in plist:
            dl = index.chunks[ordinal].token_count
            denom = tf + k1 * (1 - b + b * dl / avg)
            scores[ordinal] = scores.get(ordinal, 0.0) + w * tf * (k1 + 1) / denom
    return scores


def retrieve(index: CorpusIndex, query: str, k: int = 4) -> list[ScoredChunk]:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not index.chunks:
        raise EmptyCorpus("index has no chunks")
    scores = score_all(index, query)
    ranked = sorted(
        ((s, index.chunks[o]) for o, s in scores.items() if s > 0),
        key=lambda sc: (-sc[0], sc[1].chunk_id),
    )
    return [ScoredChunk(c.chunk_id, s, rank, c.text) for rank, (s, c) in enumerate(ranked[:k], start=1)]
