import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmdgen.circuit import (
    GateApplication,
    GateKind,
    build_model,
    canonical_text,
    classical_key,
    expected_inventory,
    gate_key,
    model_to_json,
    parse_model,
)
from qmdgen.errors import DanglingReference, MalformedInput, UnsupportedElement

BELL = {
    "name": "bell",
    "partitions": ["q0", "q1"],
    "gates": [
        {"seq": 0, "kind": "H", "targets": [0], "controls": []},
        {"seq": 1, "kind": "CX", "targets": [1], "controls": [0]},
        {"seq": 2, "kind": "MEASURE", "targets": [0], "controls": []},
        {"seq": 3, "kind": "MEASURE", "targets": [1], "controls": []},
    ],
    "classical": [],
}


def test_json_fixture_parses_in_order():
    m = parse_model(json.dumps(BELL).encode(), "json")
    assert len(m.partitions) == 2
    assert [g.kind for g in m.gates] == [GateKind.H, GateKind.CX, GateKind.MEASURE, GateKind.MEASURE]


def test_seq_restores_order():
    doc = dict(BELL, gates=list(reversed(BELL["gates"])))
    assert parse_model(json.dumps(doc), "json") == parse_model(json.dumps(BELL), "json")


def test_bell_inventory():
    inv = expected_inventory(parse_model(json.dumps(BELL)))
    assert inv.gates == Counter({("H", (0,), None): 1, ("CX", (0, 1), None): 1,
                                 ("MEASURE", (0,), None): 1, ("MEASURE", (1,), None): 1})
    assert inv.partition_count == 2


def test_empty_circuit_keeps_partitions():
    inv = expected_inventory(parse_model(json.dumps({"partitions": ["a", "b", "c"], "gates": []})))
    assert not inv.gates and inv.partition_count == 3


def test_duplicate_gates_counted():
    doc = {"partitions": ["q0"], "gates": [{"kind": "H", "targets": [0]}, {"kind": "H", "targets": [0]}]}
    assert expected_inventory(parse_model(json.dumps(doc))).gates[("H", (0,), None)] == 2


def test_canonical_text_single_gate():
    text = canonical_text(parse_model(json.dumps({"name": "c", "partitions": ["q0"], "gates": [{"kind": "H", "targets": [0]}]})))
    gate_lines = [line for line in text.splitlines() if line[:1].isdigit()]
    assert gate_lines == ["0 H ->0"]


def test_canonical_text_param_format():
    doc = {"partitions": ["q0"], "gates": [{"kind": "RZ", "targets": [0], "param": 1.5708}]}
    assert "0 RZ ->0 1.570800" in canonical_text(parse_model(json.dumps(doc))).splitlines()


def test_canonical_text_deterministic():
    a = parse_model(json.dumps(BELL))
    b = parse_model(json.dumps(BELL).encode())
    assert canonical_text(a) == canonical_text(b)
    assert canonical_text(a).endswith("\n")


@pytest.mark.parametrize(
    "gate, error",
    [
        ({"kind": "H", "targets": [5]}, DanglingReference),
        ({"kind": "FOO", "targets": [0]}, UnsupportedElement),
        ({"kind": "CX", "targets": [0], "controls": [0]}, MalformedInput),
        ({"kind": "CX", "targets": [1]}, MalformedInput),
        ({"kind": "CCX", "targets": [1], "controls": [0]}, MalformedInput),
        ({"kind": "RX", "targets": [0]}, MalformedInput),
        ({"kind": "H", "targets": [0], "param": 1.0}, MalformedInput),
        ({"kind": "H", "targets": [0, 1]}, MalformedInput),
        ({"kind": "H", "targets": ["0"]}, MalformedInput),
        ({"kind": "RX", "targets": [0], "param": float("inf")}, MalformedInput),
    ],
)
def test_invalid_gates_rejected(gate, error):
    doc = {"partitions": ["q0", "q1"], "gates": [gate]}
    with pytest.raises(error):
        parse_model(json.dumps(doc))


def test_unsupported_error_names_element():
    with pytest.raises(UnsupportedElement, match="FOO"):
        parse_model(json.dumps({"partitions": ["q0"], "gates": [{"kind": "FOO", "targets": [0]}]}))


@pytest.mark.parametrize("bad", [b"{not json", b"[]", b'{"gates": []}', json.dumps({"partitions": ["a", "a"]}).encode()])
def test_malformed_json(bad):
    with pytest.raises(MalformedInput):
        parse_model(bad, "json")


def test_duplicate_seq_rejected():
    doc = {"partitions": ["q0"], "gates": [{"seq": 1, "kind": "H", "targets": [0]}, {"seq": 1, "kind": "X", "targets": [0]}]}
    with pytest.raises(MalformedInput):
        parse_model(json.dumps(doc))


def test_gate_key_rounds_parameter():
    assert gate_key("RZ", (0,), 0.785398) == ("RZ", (0,), 0.7854)
    assert gate_key("CX", (1, 0)) == ("CX", (0, 1), None)
    assert gate_key("RZ", (0,), -0.00001)[2] == 0.0


def test_classical_key_spelling():
    assert classical_key("applyHadamard") == classical_key("apply_hadamard") == "applyhadamard"


def one_gate(kind):
    n_controls = {GateKind.CX: 1, GateKind.CCX: 2}.get(kind, 0)
    n_targets = {GateKind.SWAP: 2, GateKind.BARRIER: 3}.get(kind, 1)
    controls = tuple(range(n_controls))
    targets = tuple(range(n_controls, n_controls + n_targets))
    param = 0.25 if kind.value.startswith("R") and kind is not GateKind.RESET else None
    return GateApplication(kind, targets, controls, param)


@pytest.mark.parametrize("kind", list(GateKind), ids=lambda k: k.value)
def test_every_kind_parses_and_inventories(kind):
    gate = one_gate(kind)
    model = build_model("one", ["q0", "q1", "q2"], [gate])
    again = parse_model(model_to_json(model))
    assert again == model
    assert sum(expected_inventory(again).gates.values()) == 1


# properties

kinds = st.sampled_from(list(GateKind))


@st.composite
def models(draw):
    n = draw(st.integers(1, 4))
    gates = []
    for _ in range(draw(st.integers(0, 8))):
        kind = draw(kinds)
        need = {GateKind.CX: 2, GateKind.CCX: 3, GateKind.SWAP: 2}.get(kind, 1)
        if need > n:
            kind, need = GateKind.H, 1
        qubits = draw(st.permutations(list(range(n))))[:need]
        if kind is GateKind.BARRIER:
            qubits = qubits[: draw(st.integers(1, n))] if n else qubits
        n_controls = {GateKind.CX: 1, GateKind.CCX: 2}.get(kind, 0)
        param = None
        if kind in (GateKind.RX, GateKind.RY, GateKind.RZ):
            param = draw(st.floats(-7, 7, allow_nan=False))
        gates.append({"kind": kind.value, "controls": qubits[:n_controls], "targets": qubits[n_controls:], "param": param})
    return {"name": "m", "partitions": [f"q{i}" for i in range(n)], "gates": gates,
            "classical": draw(st.lists(st.sampled_from(["run", "Helper", "apply_h"]), max_size=3))}


def _strip(doc):
    for g in doc["gates"]:
        if g["param"] is None:
            del g["param"]
    return doc


@settings(max_examples=80, deadline=None)
@given(models(), st.randoms())
def test_inventory_invariant_under_permutation(doc, rnd):
    doc = _strip(doc)
    for i, g in enumerate(doc["gates"]):
        g["seq"] = i
    shuffled = dict(doc, gates=rnd.sample(doc["gates"], len(doc["gates"])))
    a, b = parse_model(json.dumps(doc)), parse_model(json.dumps(shuffled))
    assert a == b
    assert expected_inventory(a) == expected_inventory(b)


@settings(max_examples=80, deadline=None)
@given(models())
def test_json_rendering_is_fixed_point(doc):
    m = parse_model(json.dumps(_strip(doc)))
    again = parse_model(model_to_json(m))
    assert canonical_text(again) == canonical_text(m)
    assert expected_inventory(again) == expected_inventory(m)
    for gate in m.gates:
        assert all(0 <= q < len(m.partitions) for q in gate.controls + gate.targets)
