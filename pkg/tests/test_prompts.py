import re

import pytest

from qmdgen.circuit import GateKind, canonical_text
from qmdgen.errors import EmptyModelText
from qmdgen.prompts import CONTEXT_BEGIN, PromptKind, build_prompt, load_template
from qmdgen.retrieval import ScoredChunk


@pytest.fixture
def text(bell):
    return canonical_text(bell)


def chunks():
    return [ScoredChunk("b.py#0", 1.0, 2, "second chunk body"), ScoredChunk("a.py#3", 2.0, 1, "first chunk body")]


def test_generic_without_context(text):
    p = build_prompt(text, "generic")
    assert text in p.user_text
    assert "Context" not in p.user_text
    assert p.context_ids == ()
    assert p.system_text.strip() == "Generate quantum code for the circuit described by the following model."


def test_specific_has_all_mapping_lines(text):
    p = build_prompt(text, PromptKind.SPECIFIC)
    mapping = [line for line in p.system_text.splitlines() if line.startswith("- ") and "->" in line]
    assert {line[2:].split(" ->")[0] for line in mapping} == {k.value for k in GateKind}
    assert "```python" in p.system_text or "fenced code block" in p.system_text


def test_context_in_rank_order(text):
    p = build_prompt(text, "generic", chunks())
    assert p.context_ids == ("a.py#3", "b.py#0")
    u = p.user_text
    assert CONTEXT_BEGIN in u
    assert u.index("[a.py#3]") < u.index("first chunk body") < u.index("[b.py#0]") < u.index("second chunk body")
    assert u.index("second chunk body") < u.index(text)
    assert u.count(text) == 1


def test_deterministic(text):
    assert build_prompt(text, "specific", chunks()) == build_prompt(text, "specific", chunks())


def test_specific_contains_generic_sentences():
    generic = load_template("generic").system
    specific = load_template("specific").system
    for sentence in re.split(r"(?<=[.!?])\s+", generic.strip()):
        assert sentence in specific


def test_length_linear_in_context(text):
    base = len(build_prompt(text, "generic", [ScoredChunk("x#0", 1.0, 1, "a")]).user_text)
    grown = len(build_prompt(text, "generic", [ScoredChunk("x#0", 1.0, 1, "a" * 101)]).user_text)
    assert grown - base == 100


def test_slot_text_inside_chunk_not_expanded(text):
    p = build_prompt(text, "generic", [ScoredChunk("x#0", 1.0, 1, "literal {{MODEL}} here")])
    assert "literal {{MODEL}} here" in p.user_text
    assert p.user_text.count(text) == 1


def test_empty_model_text():
    with pytest.raises(EmptyModelText):
        build_prompt("  \n", "generic")


def test_template_dir_override(tmp_path, text):
    (tmp_path / "generic.txt").write_text("version: 7\n[system]\nDo it.\n[user]\n{{CONTEXT}}M:\n{{MODEL}}\n")
    p = build_prompt(text, "generic", template_dir=tmp_path)
    assert p.system_text == "Do it.\n" and p.template_version == "7"
    # missing file falls back to the packaged asset
    assert "mapping" in build_prompt(text, "specific", template_dir=tmp_path).system_text.lower()
