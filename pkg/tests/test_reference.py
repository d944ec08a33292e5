import pytest

from oracles import interpret
from qmdgen.analysis import extract_generated_inventory, parse_source
from qmdgen.circuit import GateApplication, GateKind, build_model, expected_inventory
from qmdgen.reference import python_identifier, render_reference


def test_inventory_round_trip(fixture_model):
    src = render_reference(fixture_model)
    tree = parse_source(src)
    assert not tree.degraded
    got = extract_generated_inventory(tree)
    assert got == expected_inventory(fixture_model)
    assert interpret(src).gates == expected_inventory(fixture_model).gates


def test_deterministic(fixture_model):
    assert render_reference(fixture_model) == render_reference(fixture_model)


def test_bell_text(bell):
    assert render_reference(bell) == (
        "from qiskit import QuantumCircuit\n\n"
        "qc = QuantumCircuit(2, 2)\n"
        "qc.h(0)\n"
        "qc.cx(0, 1)\n"
        "qc.measure(0, 0)\n"
        "qc.measure(1, 1)\n"
    )


def test_no_classical_bits_without_measure():
    m = build_model("one", ["a"], [GateApplication(GateKind.H, (0,))])
    assert "QuantumCircuit(1)\n" in render_reference(m)


@pytest.mark.parametrize("name,want", [
    ("apply_corrections", "apply_corrections"),
    ("prepare-message", "prepare_message"),
    ("2qubits", "_2qubits"),
    ("class", "class_"),
    ("", "_"),
])
def test_python_identifier(name, want):
    assert python_identifier(name) == want
