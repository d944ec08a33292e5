"""Completion providers, response cache and code-block extraction.

Offline providers (``echo``, ``fixed``, ``scripted``) never open a socket;
only :class:`LiveProvider` talks HTTP, using an OpenAI-compatible chat
completion request.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import httpx

from .errors import MissingCredentials, ProviderError, Timeout
from .prompts import Prompt

log = logging.getLogger(__name__)

API_KEY_ENV = "QMDGEN_API_KEY"
DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"
RETRYABLE_STATUS = frozenset({408, 409, 425, 429}) | frozenset(range(500, 600))


@dataclass(frozen=True)
class CompletionParams:
    model_name: str = "gpt-4o"
    temperature: float = 0.2
    max_tokens: int = 2048
    seed: Optional[int] = None
    timeout_s: int = 60
    retries: int = 3

    def __post_init__(self):
        if self.retries < 0:
            raise ValueError("retries must be >= 0")
        if self.timeout_s < 1:
            raise ValueError("timeout_s must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def cache_fields(self) -> dict:
        # transport knobs do not change the output
        return {"model_name": self.model_name, "temperature": self.temperature,
                "max_tokens": self.max_tokens, "seed": self.seed}


@dataclass(frozen=True)
class Completion:
    raw_text: str
    provider: str
    cached: bool = False
    latency_ms: int = 0


class EchoProvider:
    """Returns a per-instance reference text verbatim."""

    name = "echo"

    def __init__(self, references: dict[str, str] | None = None, directory=None, suffix=".py"):
        self.references = dict(references or {})
        self.directory = Path(directory) if directory else None
        self.suffix = suffix

    def generate(self, prompt: Prompt, params: CompletionParams, instance: str | None = None) -> str:
        if instance in self.references:
            return self.references[instance]
        if self.directory is not None and instance is not None:
            path = self.directory / f"{instance}{self.suffix}"
            if path.is_file():
                return path.read_bytes().decode("utf-8")
        raise ProviderError(f"echo provider has no reference for instance {instance!r}")


class FixedProvider:
    name = "fixed"

    def __init__(self, text: str):
        self.text = text

    def generate(self, prompt, params, instance=None) -> str:
        return self.text


class ScriptedProvider:
    """Replays a list of responses in order, one per call."""

    name = "scripted"
    sequential = True  # responses are consumed in call order

    def __init__(self, responses):
        self._responses = list(responses)
        self._next = 0
        self._lock = threading.Lock()

    def generate(self, prompt, params, instance=None) -> str:
        with self._lock:
            if self._next >= len(self._responses):
                raise ProviderError("script exhausted")
            text = self._responses[self._next]
            self._next += 1
        return text


class LiveProvider:
    name = "live"

    def __init__(self, endpoint: str = DEFAULT_ENDPOINT, api_key: str | None = None,
                 client: httpx.Client | None = None, backoff_base: float = 0.5,
                 sleep: Callable[[float], None] = time.sleep):
        self.endpoint = endpoint
        self._api_key = api_key
        self._client = client
        self.backoff_base = backoff_base
        self._sleep = sleep

    @property
    def api_key(self) -> str:
        key = self._api_key or os.environ.get(API_KEY_ENV)
        if not key:
            raise MissingCredentials(f"environment variable {API_KEY_ENV} is not set")
        return key

    def payload(self, prompt: Prompt, params: CompletionParams) -> dict:
        body = {
            "model": params.model_name,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        if params.seed is not None:
            body["seed"] = params.seed
        return body

    def generate(self, prompt, params, instance=None) -> str:
        headers = {"Authorization": f"Bearer {self.api_key}", "Content-Type": "application/json"}
        body = self.payload(prompt, params)
        client = self._client or httpx.Client()
        last_error = None
        try:
            for attempt in range(params.retries + 1):
                if attempt:
                    self._sleep(self.backoff_base * 2 ** (attempt - 1))
                try:
                    resp = client.post(self.endpoint, json=body, headers=headers, timeout=params.timeout_s)
                except httpx.TimeoutException as exc:
                    last_error = Timeout(f"request timed out after {attempt + 1} attempt(s): {exc}")
                    continue
                except httpx.TransportError as exc:
                    last_error = Timeout(f"transport failure after {attempt + 1} attempt(s): {exc}")
                    continue
                if resp.status_code == 200:
                    return _content(resp)
                excerpt = resp.text[:500]
                if resp.status_code not in RETRYABLE_STATUS:
                    raise ProviderError(f"provider returned HTTP {resp.status_code}", resp.status_code, excerpt)
                last_error = ProviderError(
                    f"provider returned HTTP {resp.status_code} after {attempt + 1} attempt(s)",
                    resp.status_code, excerpt,
                )
                log.info("retryable status %s (attempt %d)", resp.status_code, attempt + 1)
        finally:
            if self._client is None:
                client.close()
        raise last_error


def _content(resp: httpx.Response) -> str:
    try:
        content = resp.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError):
        raise ProviderError("malformed chat completion response", resp.status_code, resp.text[:500]) from None
    if not isinstance(content, str):
        raise ProviderError("completion content is not text", resp.status_code, resp.text[:500])
    return content


class ResponseCache:
    """One JSON envelope per cache key; concurrent readers, serialized writers."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self._lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> str | None:
        path = self._path(key)
        try:
            return json.loads(path.read_text(encoding="utf-8"))["raw_text"]
        except (OSError, ValueError, KeyError):
            return None

    def put(self, key: str, raw_text: str, params: CompletionParams, provider: str) -> None:
        envelope = {
            "key": key,
            "provider": provider,
            "params": asdict(params),
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "raw_text": raw_text,
        }
        with self._lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            tmp = self._path(key).with_suffix(f".tmp{threading.get_ident()}")
            tmp.write_text(json.dumps(envelope, indent=2, sort_keys=True), encoding="utf-8")
            os.replace(tmp, self._path(key))


def cache_key(prompt: Prompt, params: CompletionParams, provider: str, salt: str = "") -> str:
    material = json.dumps(
        {
            "system": prompt.system_text,
            "user": prompt.user_text,
            "params": params.cache_fields(),
            "provider": provider,
            "salt": salt,
        },
        sort_keys=True,
    )
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


def complete(prompt: Prompt, params: CompletionParams, provider, cache: ResponseCache | None = None,
             salt: str = "", instance: str | None = None) -> Completion:
    """Run one completion. ``salt`` separates otherwise identical calls
    (for example repeated runs of one experiment cell) in the cache."""
    key = cache_key(prompt, params, provider.name, salt) if cache is not None else None
    if key is not None:
        hit = cache.get(key)
        if hit is not None:
            return Completion(hit, provider.name, cached=True, latency_ms=0)
    start = time.perf_counter()
    text = provider.generate(prompt, params, instance)
    latency = int((time.perf_counter() - start) * 1000)
    if key is not None:
        cache.put(key, text, params, provider.name)
    return Completion(text, provider.name, cached=False, latency_ms=latency)


_FENCE_OPEN = re.compile(r"^[ \t]*```[^\n`]*\n", re.MULTILINE)
_FENCE_CLOSE = re.compile(r"^[ \t]*```[ \t]*$", re.MULTILINE)


def extract_code(completion: Completion | str) -> str:
    text = completion.raw_text if isinstance(completion, Completion) else completion
    opening = _FENCE_OPEN.search(text)
    if opening is None:
        return text
    body_start = opening.end()
    closing = _FENCE_CLOSE.search(text, body_start)
    body = text[body_start:closing.start()] if closing else text[body_start:]
    return body[:-1] if body.endswith("\n") else body


def make_provider(name: str, **options):
    if name == "echo":
        return EchoProvider(options.get("references"), options.get("directory"))
    if name == "fixed":
        if "text" not in options:
            raise ValueError("fixed provider needs 'text'")
        return FixedProvider(options["text"])
    if name == "scripted":
        return ScriptedProvider(options.get("responses", []))
    if name == "live":
        return LiveProvider(options.get("endpoint") or DEFAULT_ENDPOINT, client=options.get("client"))
    raise ValueError(f"unknown provider {name!r}")
