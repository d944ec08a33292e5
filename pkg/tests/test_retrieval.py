import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmdgen.errors import EmptyCorpus, EmptyQuery, IndexFormatError
from qmdgen.retrieval import (
    BM25Params,
    ChunkConfig,
    CorpusChunk,
    CorpusIndex,
    chunk_lines,
    ingest_corpus,
    retrieve,
    tokenize,
)

from oracles import bm25_scores


@pytest.mark.parametrize(
    "text, terms",
    [
        ("QuantumCircuit(2)", ["quantum", "circuit", "2"]),
        ("", []),
        ("apply_hadamard_gate", ["apply", "hadamard", "gate"]),
        ("HTTPServer qc.cx", ["http", "server", "qc", "cx"]),
    ],
)
def test_tokenize(text, terms):
    assert tokenize(text) == terms


def toy_index():
    texts = ["hadamard gate", "cnot gate", "measure qubit"]
    chunks = [CorpusChunk(f"toy.txt#{i}", t, len(tokenize(t))) for i, t in enumerate(texts)]
    return CorpusIndex.from_chunks(chunks)


def test_toy_corpus_hadamard():
    result = retrieve(toy_index(), "hadamard", k=2)
    assert [r.chunk_id for r in result] == ["toy.txt#0"]
    expected = bm25_scores([t.split() for t in ["hadamard gate", "cnot gate", "measure qubit"]], ["hadamard"])
    assert result[0].score == pytest.approx(expected[0], abs=1e-12)
    assert result[0].rank == 1


def test_toy_corpus_gate_tie():
    result = retrieve(toy_index(), "gate", k=5)
    assert [r.chunk_id for r in result] == ["toy.txt#0", "toy.txt#1"]
    assert result[0].score == result[1].score


def test_empty_query():
    with pytest.raises(EmptyQuery):
        retrieve(toy_index(), "", k=1)
    with pytest.raises(EmptyQuery):
        retrieve(toy_index(), "!!!", k=1)


def test_windowing(tmp_path):
    (tmp_path / "ten.py").write_text("\n".join(f"line{i}" for i in range(1, 11)) + "\n")
    index = ingest_corpus(tmp_path, ChunkConfig(6, 2))
    assert [c.text.splitlines()[0] for c in index.chunks] == ["line1", "line5"]
    assert [c.text.splitlines()[-1] for c in index.chunks] == ["line6", "line10"]
    assert chunk_lines(["x"] * 10, ChunkConfig(6, 2)) == [(0, 6), (4, 10)]


def test_empty_directory(tmp_path):
    with pytest.raises(EmptyCorpus):
        ingest_corpus(tmp_path)


def test_reingest_is_byte_identical(tmp_path):
    (tmp_path / "b.py").write_text("from qiskit import QuantumCircuit\nqc = QuantumCircuit(2)\n")
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "a.txt").write_text("qc.h(0)\nqc.cx(0, 1)\n")
    (tmp_path / "ignored.md").write_text("nothing")
    one, two = ingest_corpus(tmp_path).to_json(), ingest_corpus(tmp_path).to_json()
    assert one == two
    assert [c.chunk_id for c in CorpusIndex.from_json(one).chunks] == ["b.py#0", "sub/a.txt#0"]


def test_bad_file_collected(tmp_path):
    (tmp_path / "good.py").write_text("qc.h(0)\n")
    (tmp_path / "bad.py").write_bytes(b"\xff\xfe\x00bad")
    index = ingest_corpus(tmp_path)
    assert len(index.chunks) == 1
    assert index.ingest_errors and index.ingest_errors[0].startswith("bad.py")


def test_index_version_checked():
    text = toy_index().to_json().replace('"format_version":1', '"format_version":99')
    with pytest.raises(IndexFormatError):
        CorpusIndex.from_json(text)
    with pytest.raises(IndexFormatError):
        CorpusIndex.from_json("not json")


@pytest.mark.parametrize("cfg", [(0, 0), (5, 5), (5, -1)])
def test_chunk_config_validation(cfg):
    with pytest.raises(ValueError):
        ChunkConfig(*cfg)


# properties

words = st.sampled_from(["qc", "h", "cx", "measure", "gate", "circuit", "qubit", "reset", "swap"])
docs = st.lists(st.lists(words, min_size=1, max_size=8), min_size=1, max_size=8)


def index_of(texts, params=None):
    chunks = [CorpusChunk(f"d{i:02d}", " ".join(t), len(t)) for i, t in enumerate(texts)]
    return CorpusIndex.from_chunks(chunks, params)


@settings(max_examples=100, deadline=None)
@given(docs, st.lists(words, min_size=1, max_size=4))
def test_scores_match_hand_oracle(texts, query):
    index = index_of(texts)
    expected = bm25_scores(texts, query)
    got = {r.chunk_id: r.score for r in retrieve(index, " ".join(query), k=len(texts))}
    for i, score in enumerate(expected):
        if score > 0:
            assert got[f"d{i:02d}"] == pytest.approx(score, rel=1e-12)
        else:
            assert f"d{i:02d}" not in got


@settings(max_examples=100, deadline=None)
@given(docs, st.lists(words, min_size=1, max_size=4), st.integers(1, 5), st.integers(0, 5))
def test_prefix_property(texts, query, k1, extra):
    index = index_of(texts)
    q = " ".join(query)
    assert retrieve(index, q, k1) == retrieve(index, q, k1 + extra)[:k1]


@settings(max_examples=100, deadline=None)
@given(docs, st.lists(words, min_size=1, max_size=4))
def test_ranks_sorted_and_roundtrip(texts, query):
    index = index_of(texts, BM25Params(1.5, 0.5))
    q = " ".join(query)
    result = retrieve(index, q, 10)
    assert [r.rank for r in result] == list(range(1, len(result) + 1))
    assert all(a.score > b.score or (a.score == b.score and a.chunk_id < b.chunk_id)
               for a, b in zip(result, result[1:]))
    assert retrieve(CorpusIndex.from_json(index.to_json()), q, 10) == result


@settings(max_examples=100, deadline=None)
@given(docs, words, st.data())
def test_duplicating_term_never_lowers_score(texts, term, data):
    i = data.draw(st.integers(0, len(texts) - 1))
    if term not in texts[i]:
        texts[i] = texts[i] + [term]
    before = index_of(texts)
    boosted = [list(t) for t in texts]
    boosted[i] = boosted[i] + [term]
    after = index_of(boosted)
    score = lambda idx: {r.chunk_id: r.score for r in retrieve(idx, term, 100)}.get(f"d{i:02d}", 0.0)
    assert score(after) >= score(before) - 1e-12
