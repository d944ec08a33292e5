from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmdgen.analysis import GateTable, extract_generated_inventory, parse_source
from qmdgen.circuit import expected_inventory
from qmdgen.reference import render_reference

from oracles import interpret


def inv(src, table=None):
    return extract_generated_inventory(parse_source(src), table)


BELL_SRC = "qc = QuantumCircuit(2)\nqc.h(0)\nqc.cx(0,1)\nqc.measure(0,0)\nqc.measure(1,1)"


def test_bell_program():
    got = inv(BELL_SRC)
    assert got.gates == Counter({("H", (0,), None): 1, ("CX", (0, 1), None): 1,
                                 ("MEASURE", (0,), None): 1, ("MEASURE", (1,), None): 1})
    assert got.partition_count == 2


def test_measure_all():
    got = inv("qc = QuantumCircuit(2)\nqc.measure_all()")
    assert got.gates == Counter({("MEASURE", (0,), None): 1, ("MEASURE", (1,), None): 1})


def test_range_loop_unrolled():
    src = "qc = QuantumCircuit(3)\nfor i in range(3): qc.h(i)"
    got = inv(src)
    assert got.gates == Counter({("H", (q,), None): 1 for q in range(3)})
    assert got.gates == interpret(src).gates


def test_loop_measure_counts_twice():
    got = inv("qc = QuantumCircuit(2, 2)\nfor i in range(2):\n    qc.measure(i, i)\n")
    assert sum(got.gates.values()) == 2


def test_registers_and_aliases():
    src = (
        "from qiskit import QuantumCircuit as QC, QuantumRegister\n"
        "a = QuantumRegister(2)\nb = QuantumRegister(1)\ncirc = QC(a, b)\nc2 = circ\n"
        "c2.cnot(a[0], b[0])\ncirc.toffoli(a[0], a[1], b[0])\ncirc.barrier()\n"
    )
    got = inv(src)
    assert got.partition_count == 3
    assert got.gates == Counter({("CX", (0, 2), None): 1, ("CCX", (0, 1, 2), None): 1, ("BARRIER", (0, 1, 2), None): 1})
    assert got.gates == interpret(src).gates


def test_rotation_parameters():
    src = "import numpy as np\nqc = QuantumCircuit(1)\nqc.rz(np.pi / 4, 0)\nqc.rx(theta=0.5, qubit=0)\nqc.ry(-1.5708, 0)\n"
    got = inv(src)
    assert got.gates == Counter({("RZ", (0,), 0.7854): 1, ("RX", (0,), 0.5): 1, ("RY", (0,), -1.5708): 1})


def test_unresolved_operand_recorded():
    got = inv("qc = QuantumCircuit(2)\nqc.h(k)\nqc.x(0)\n")
    assert got.gates == Counter({("X", (0,), None): 1})
    assert [d["kind"] for d in got.diagnostics] == ["UnresolvedOperand"]


def test_loop_over_unknown_bound():
    got = inv("qc = QuantumCircuit(2)\nfor i in range(n):\n    qc.h(i)\n")
    assert not got.gates and got.diagnostics


def test_big_loop_not_unrolled():
    got = inv("qc = QuantumCircuit(2)\nfor i in range(100):\n    qc.h(0)\n")
    assert not got.gates
    assert got.diagnostics[0]["kind"] == "UnresolvedOperand"


def test_non_circuit_receiver_ignored():
    assert not inv("import math\nmath.h(0)\nobj.cx(0, 1)\n").gates


def test_classical_definitions():
    got = inv("def applyHadamard():\n    pass\nclass Runner:\n    def go(self):\n        pass\n")
    assert got.classical == Counter({"applyhadamard": 1, "runner": 1, "go": 1})


def test_custom_table():
    table = GateTable.from_mapping({"methods": {"hadamard": {"kind": "H", "qubits": 1}}})
    assert inv("qc = QuantumCircuit(1)\nqc.hadamard(0)\n", table).gates == Counter({("H", (0,), None): 1})


def test_degraded_tree_still_extracts():
    got = inv("qc = QuantumCircuit(2)\nqc.h(0)\nqc.cx(0,\nqc.x(1)\n")
    assert ("H", (0,), None) in got.gates


def test_reference_roundtrip(fixture_model):
    src = render_reference(fixture_model)
    got = inv(src)
    assert got == expected_inventory(fixture_model)
    assert got.gates == interpret(src).gates


# invariance under comments and whitespace


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["", "# note", "    # indented note", "  "]), min_size=8, max_size=8), st.sampled_from(["\n", "\r\n"]))
def test_comment_whitespace_invariance(noise, newline):
    lines = BELL_SRC.splitlines()
    mixed = []
    for line, extra in zip(lines, noise):
        mixed.append(line.replace(",", ", ").replace("(", "( ") + ("  # trailing" if extra else ""))
        if extra:
            mixed.append(extra)
    src = newline.join(mixed) + newline
    assert inv(src) == inv(BELL_SRC)
