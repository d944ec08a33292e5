import pytest

from qmdgen.config import load_settings, settings_from_dict
from qmdgen.errors import ConfigInvalid
from qmdgen.prompts import PromptKind


def test_defaults():
    s = load_settings(None)
    assert s.llm.provider == "echo"
    assert s.rag.k == 4 and s.rag.bm25.k1 == 1.2 and s.rag.bm25.b == 0.75
    assert s.weights.as_tuple() == (0.25, 0.25, 0.25, 0.25)
    assert s.experiment.runs == 10


def test_full_file(tmp_path):
    (tmp_path / "aliases.json").write_text('{"Hadamard": "H"}')
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(
        """
[llm]
provider = "scripted"
responses = ["a", "b"]
temperature = 0
cache_dir = "cache"

[rag]
enabled = true
k = 2
chunk.max_lines = 20
chunk.overlap_lines = 5
corpus.root = "corpus"

[prompt]
kind = "specific"

[model]
stereotype_aliases = "aliases.json"

[metrics]
match_operands = false
codebleu.alpha = 1
codebleu.beta = 0

[experiment]
models = ["m/bell.json"]
prompt_kinds = ["specific"]
runs = 3
"""
    )
    s = load_settings(cfg)
    assert s.llm.responses == ["a", "b"]
    assert s.llm.params.temperature == 0.0
    assert s.llm.cache_dir == tmp_path / "cache"
    assert s.rag.corpus_root == tmp_path / "corpus"
    assert (s.rag.chunk.max_lines, s.rag.chunk.overlap_lines) == (20, 5)
    assert s.prompt_kind is PromptKind.SPECIFIC
    assert s.stereotype_aliases == {"Hadamard": "H"}
    assert s.match_operands is False
    assert s.weights.alpha == 1.0 and s.weights.beta == 0.0
    assert s.experiment.models == [tmp_path / "m" / "bell.json"]
    assert s.experiment.rag == ["on"]
    assert s.experiment.runs == 3


@pytest.mark.parametrize("data", [
    {"llm": {"provdier": "echo"}},
    {"llm": {"provider": "gpt"}},
    {"llm": {"max_in_flight": 0}},
    {"rag": {"k": "4"}},
    {"rag": {"k": 0}},
    {"rag": {"chunk": {"max_lines": 5, "overlap_lines": 5}}},
    {"prompt": {"kind": "fancy"}},
    {"metrics": {"codebleu": {"alpha": -1}}},
    {"experiment": {"runs": 0}},
    {"experiment": {"rag": ["maybe"]}},
    {"experiment": {"models": "bell.json"}},
    {"unknown": {}},
])
def test_rejects(data):
    with pytest.raises(ConfigInvalid):
        settings_from_dict(data)


def test_bad_toml(tmp_path):
    p = tmp_path / "x.toml"
    p.write_text("[llm\nprovider=")
    with pytest.raises(ConfigInvalid):
        load_settings(p)
    with pytest.raises(ConfigInvalid):
        load_settings(tmp_path / "missing.toml")
