import json
import socket
from concurrent.futures import ThreadPoolExecutor

import httpx
import pytest

from qmdgen.errors import MissingCredentials, ProviderError, Timeout
from qmdgen.llm import (
    API_KEY_ENV,
    Completion,
    CompletionParams,
    EchoProvider,
    FixedProvider,
    LiveProvider,
    ResponseCache,
    ScriptedProvider,
    cache_key,
    complete,
    extract_code,
)
from qmdgen.prompts import build_prompt

PARAMS = CompletionParams()


@pytest.fixture
def prompt():
    return build_prompt("circuit c\npartitions: 0=q0\n0 H ->0\n", "generic")


def test_echo_returns_file_bytes(tmp_path, prompt):
    (tmp_path / "bell.py").write_bytes("qc.h(0)\r\n# ünïcode\n".encode())
    c = complete(prompt, PARAMS, EchoProvider(directory=tmp_path), instance="bell")
    assert c.raw_text == "qc.h(0)\r\n# ünïcode\n"
    with pytest.raises(ProviderError):
        complete(prompt, PARAMS, EchoProvider(directory=tmp_path), instance="other")


def test_scripted_order_and_exhaustion(prompt):
    p = ScriptedProvider(["a", "b", "c"])
    assert [complete(prompt, PARAMS, p).raw_text for _ in range(3)] == ["a", "b", "c"]
    with pytest.raises(ProviderError, match="script exhausted"):
        complete(prompt, PARAMS, p)


def test_missing_credentials(monkeypatch, prompt):
    monkeypatch.delenv(API_KEY_ENV, raising=False)
    with pytest.raises(MissingCredentials):
        complete(prompt, PARAMS, LiveProvider())


@pytest.mark.parametrize(
    "raw, code",
    [
        ("Here you go:\n```python\nx=1\n```\nEnjoy", "x=1"),
        ("x=1", "x=1"),
        ("```python\nfirst\n```\ntext\n```\nsecond\n```", "first"),
        ("```\nplain\n```", "plain"),
        ("```python\nunterminated\n", "unterminated"),
    ],
)
def test_extract_code(raw, code):
    assert extract_code(raw) == code
    assert extract_code(Completion(raw, "fixed")) == code


def test_extract_idempotent():
    once = extract_code("```py\na = 1\nb = 2\n```")
    assert extract_code(once) == once


def test_cache_hit_and_envelope(tmp_path, prompt):
    cache = ResponseCache(tmp_path)
    p = ScriptedProvider(["only once"])
    first = complete(prompt, PARAMS, p, cache, salt="run-1")
    second = complete(prompt, PARAMS, p, cache, salt="run-1")
    assert (first.cached, second.cached) == (False, True)
    assert second.raw_text == "only once"
    key = cache_key(prompt, PARAMS, "scripted", "run-1")
    env = json.loads((tmp_path / f"{key}.json").read_text())
    assert env["raw_text"] == "only once" and "timestamp" in env and env["params"]["model_name"] == "gpt-4o"


def test_cache_key_sensitivity(prompt):
    base = cache_key(prompt, PARAMS, "echo")
    assert cache_key(prompt, CompletionParams(temperature=0.7), "echo") != base
    assert cache_key(prompt, PARAMS, "fixed") != base
    assert cache_key(prompt, PARAMS, "echo", "run-2") != base
    assert cache_key(prompt, CompletionParams(retries=0), "echo") == base


def test_concurrent_cache_writes(tmp_path, prompt):
    cache = ResponseCache(tmp_path)
    fixed = FixedProvider("same")
    with ThreadPoolExecutor(8) as pool:
        results = list(pool.map(lambda i: complete(prompt, PARAMS, fixed, cache, salt=str(i % 4)), range(32)))
    assert all(r.raw_text == "same" for r in results)
    assert len(list(tmp_path.glob("*.json"))) == 4


@pytest.mark.parametrize("kwargs", [{"retries": -1}, {"timeout_s": 0}, {"temperature": -0.1}])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        CompletionParams(**kwargs)


def test_offline_providers_never_touch_network(monkeypatch, tmp_path, prompt):
    def forbidden(*a, **k):
        raise AssertionError("network access attempted")

    monkeypatch.setattr(socket, "socket", forbidden)
    monkeypatch.setattr(socket, "create_connection", forbidden)
    (tmp_path / "m.py").write_text("x")
    for provider in (EchoProvider(directory=tmp_path), FixedProvider("y"), ScriptedProvider(["z"])):
        complete(prompt, PARAMS, provider, ResponseCache(tmp_path / "c"), instance="m")


# live provider over a mock transport


def chat(content, status=200):
    return httpx.Response(status, json={"choices": [{"message": {"role": "assistant", "content": content}}]})


def live(handler, sleeps=None):
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return LiveProvider("https://llm.test/v1/chat/completions", api_key="k", client=client,
                        sleep=(sleeps.append if sleeps is not None else lambda s: None))


def test_live_request_shape(prompt):
    seen = {}

    def handler(request):
        seen["body"] = json.loads(request.content)
        seen["auth"] = request.headers["authorization"]
        return chat("```python\nqc.h(0)\n```")

    c = complete(prompt, CompletionParams(seed=7), live(handler))
    assert c.raw_text == "```python\nqc.h(0)\n```"
    body = seen["body"]
    assert [m["role"] for m in body["messages"]] == ["system", "user"]
    assert body["messages"][0]["content"] == prompt.system_text
    assert body["messages"][1]["content"] == prompt.user_text
    assert body["model"] == "gpt-4o" and body["seed"] == 7 and body["temperature"] == 0.2
    assert seen["auth"] == "Bearer k"


def test_live_retries_with_backoff(prompt):
    calls, sleeps = [], []

    def handler(request):
        calls.append(1)
        return httpx.Response(503, text="busy") if len(calls) < 3 else chat("ok")

    assert complete(prompt, PARAMS, live(handler, sleeps)).raw_text == "ok"
    assert len(calls) == 3 and sleeps == [0.5, 1.0]


def test_live_non_retryable_status(prompt):
    def handler(request):
        return httpx.Response(401, text="bad key " * 200)

    with pytest.raises(ProviderError) as info:
        complete(prompt, PARAMS, live(handler))
    assert info.value.status == 401 and len(info.value.body) == 500


def test_live_timeout_after_retries(prompt):
    calls = []

    def handler(request):
        calls.append(1)
        raise httpx.ReadTimeout("slow", request=request)

    with pytest.raises(Timeout):
        complete(prompt, CompletionParams(retries=2), live(handler))
    assert len(calls) == 3


def test_live_retryable_exhausted_is_provider_error(prompt):
    with pytest.raises(ProviderError) as info:
        complete(prompt, CompletionParams(retries=1), live(lambda r: httpx.Response(429, text="slow down")))
    assert info.value.status == 429


def test_live_malformed_body(prompt):
    with pytest.raises(ProviderError):
        complete(prompt, PARAMS, live(lambda r: httpx.Response(200, json={"nope": 1})))
