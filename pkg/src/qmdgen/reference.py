"""Deterministic renderer for straight-line reference programs."""

from __future__ import annotations

import keyword
import re

from ._assets import gate_alias_table
from .circuit import GateKind, QuantumCircuitModel

_NOT_IDENT = re.compile(r"[^A-Za-z0-9_]")


def python_identifier(name: str) -> str:
    """Turn a classical element name into a legal identifier. Only
    underscores are added, so the name's matching key is unchanged."""
    ident = _NOT_IDENT.sub("_", name) or "_"
    if ident[0].isdigit():
        ident = "_" + ident
    if keyword.iskeyword(ident):
        ident += "_"
    return ident


def _call_args(gate) -> list[str]:
    if gate.kind in (GateKind.RX, GateKind.RY, GateKind.RZ):
        return [repr(float(gate.parameter)), str(gate.targets[0])]
    if gate.kind is GateKind.MEASURE:
        q = str(gate.targets[0])
        return [q, q]
    return [str(q) for q in gate.controls + gate.targets]


def render_reference(model: QuantumCircuitModel, circuit_var: str = "qc") -> str:
    render = gate_alias_table()["render"]
    n = len(model.partitions)
    measured = any(g.kind is GateKind.MEASURE for g in model.gates)
    size = f"{n}, {n}" if measured else f"{n}"
    lines = ["from qiskit import QuantumCircuit", "", f"{circuit_var} = QuantumCircuit({size})"]
    for gate in model.gates:
        lines.append(f"{circuit_var}.{render[gate.kind.value]}({', '.join(_call_args(gate))})")
    for name in model.classical_elements:
        lines += ["", "", f"def {python_identifier(name)}():", "    pass"]
    return "\n".join(lines) + "\n"
