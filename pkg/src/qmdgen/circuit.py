"""Canonical in-memory quantum circuit model and its element inventory.

Models come from two sources: the JSON fixture format handled here, and
XMI files handled by :mod:`qmdgen.xmi`. Both end up as a
:class:`QuantumCircuitModel`, which is what the prompt renderer and the
evaluation side consume.
"""

from __future__ import annotations

import enum
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import DanglingReference, MalformedInput, UnsupportedElement


class GateKind(str, enum.Enum):
    H = "H"
    X = "X"
    Y = "Y"
    Z = "Z"
    S = "S"
    T = "T"
    SWAP = "SWAP"
    CX = "CX"
    CCX = "CCX"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    MEASURE = "MEASURE"
    RESET = "RESET"
    BARRIER = "BARRIER"

    @classmethod
    def lookup(cls, name: str) -> "GateKind":
        try:
            return cls(name.strip().upper())
        except ValueError:
            raise UnsupportedElement(f"unsupported gate kind {name!r}") from None


ROTATIONS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ})

# kind -> (controls, targets); None targets means "one or more"
ARITY = {
    GateKind.SWAP: (0, 2),
    GateKind.CX: (1, 1),
    GateKind.CCX: (2, 1),
    GateKind.BARRIER: (0, None),
}
SINGLE_QUBIT = (0, 1)

PARAM_DECIMALS = 4


@dataclass(frozen=True)
class QubitPartition:
    index: int
    name: str


@dataclass(frozen=True)
class GateApplication:
    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    parameter: Optional[float] = None
    seq: int = 0

    @property
    def operands(self) -> tuple[int, ...]:
        return tuple(sorted(self.controls + self.targets))


@dataclass(frozen=True)
class QuantumCircuitModel:
    name: str
    partitions: tuple[QubitPartition, ...]
    gates: tuple[GateApplication, ...]
    classical_elements: tuple[str, ...] = ()

    @property
    def partition_names(self) -> list[str]:
        return [p.name for p in self.partitions]

    def __post_init__(self):
        validate_model(self)


def validate_model(model: QuantumCircuitModel) -> None:
    names = [p.name for p in model.partitions]
    if len(set(names)) != len(names):
        raise MalformedInput(f"duplicate partition names in {model.name!r}: {names}")
    for pos, part in enumerate(model.partitions):
        if part.index != pos:
            raise MalformedInput(f"partition {part.name!r} has index {part.index}, expected {pos}")
    n = len(model.partitions)
    for gate in model.gates:
        _check_gate(gate, n)


def _check_gate(gate: GateApplication, n_partitions: int) -> None:
    label = f"gate #{gate.seq} ({gate.kind.value})"
    for q in gate.controls + gate.targets:
        if not 0 <= q < n_partitions:
            raise DanglingReference(f"{label} references undeclared partition index {q}")
    if set(gate.controls) & set(gate.targets):
        raise MalformedInput(f"{label}: controls and targets overlap")
    if len(set(gate.targets)) != len(gate.targets) or len(set(gate.controls)) != len(gate.controls):
        raise MalformedInput(f"{label}: repeated operand")
    n_controls, n_targets = ARITY.get(gate.kind, SINGLE_QUBIT)
    if len(gate.controls) != n_controls:
        raise MalformedInput(f"{label}: expected {n_controls} control(s), got {len(gate.controls)}")
    if n_targets is None:
        if not gate.targets:
            raise MalformedInput(f"{label}: needs at least one target")
    elif len(gate.targets) != n_targets:
        raise MalformedInput(f"{label}: expected {n_targets} target(s), got {len(gate.targets)}")
    if (gate.parameter is not None) != (gate.kind in ROTATIONS):
        if gate.kind in ROTATIONS:
            raise MalformedInput(f"{label}: rotation gate needs a parameter")
        raise MalformedInput(f"{label}: parameter given for non-rotation gate")
    if gate.parameter is not None and not math.isfinite(gate.parameter):
        raise MalformedInput(f"{label}: parameter must be finite")


def build_model(name, partition_names, gates, classical=()) -> QuantumCircuitModel:
    """Assemble a model from raw parts, ordering gates by their ``seq`` and
    renumbering them to consecutive positions."""
    partitions = tuple(QubitPartition(i, str(p)) for i, p in enumerate(partition_names))
    ordered = sorted(gates, key=lambda g: g.seq)
    seqs = [g.seq for g in ordered]
    if len(set(seqs)) != len(seqs):
        raise MalformedInput(f"duplicate seq values in {name!r}")
    renumbered = tuple(
        GateApplication(g.kind, tuple(g.targets), tuple(g.controls), g.parameter, pos)
        for pos, g in enumerate(ordered)
    )
    return QuantumCircuitModel(str(name), partitions, renumbered, tuple(str(c) for c in classical))


# JSON fixture format


def parse_json_model(source: bytes | str) -> QuantumCircuitModel:
    try:
        data = json.loads(source)
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedInput(f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise MalformedInput("model JSON must be an object")
    try:
        name = data.get("name", "circuit")
        partitions = data["partitions"]
        raw_gates = data.get("gates", [])
        classical = data.get("classical", [])
        if not isinstance(partitions, list) or not isinstance(raw_gates, list):
            raise MalformedInput("'partitions' and 'gates' must be lists")
        gates = []
        for pos, raw in enumerate(raw_gates):
            kind = GateKind.lookup(str(raw["kind"]))
            param = raw.get("param")
            gates.append(
                GateApplication(
                    kind=kind,
                    targets=tuple(_int_list(raw.get("targets", []))),
                    controls=tuple(_int_list(raw.get("controls", []))),
                    parameter=None if param is None else float(param),
                    seq=int(raw.get("seq", pos)),
                )
            )
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad model JSON structure: {exc!r}") from None
    return build_model(name, partitions, gates, classical)


def _int_list(values):
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int):
            raise MalformedInput(f"operand {v!r} is not an integer partition index")
        out.append(v)
    return out


def model_to_json(model: QuantumCircuitModel) -> str:
    gates = []
    for g in model.gates:
        entry = {"seq": g.seq, "kind": g.kind.value, "targets": list(g.targets), "controls": list(g.controls)}
        if g.parameter is not None:
            entry["param"] = g.parameter
        gates.append(entry)
    doc = {
        "name": model.name,
        "partitions": model.partition_names,
        "gates": gates,
        "classical": list(model.classical_elements),
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_model(source: bytes | str, format: str = "json", stereotype_aliases=None) -> QuantumCircuitModel:
    if format == "json":
        return parse_json_model(source)
    if format == "xmi":
        from .xmi import parse_xmi

        return parse_xmi(source, stereotype_aliases)
    raise ValueError(f"unknown model format {format!r}")


def detect_format(path) -> str:
    return "json" if Path(path).suffix.lower() == ".json" else "xmi"


def load_model(path, stereotype_aliases=None) -> QuantumCircuitModel:
    path = Path(path)
    return parse_model(path.read_bytes(), detect_format(path), stereotype_aliases)


# canonical text


def format_param(value: float) -> str:
    return f"{value:.6f}"


def canonical_text(model: QuantumCircuitModel) -> str:
    lines = [f"circuit {model.name}"]
    lines.append("partitions: " + " ".join(f"{p.index}={p.name}" for p in model.partitions))
    if model.classical_elements:
        lines.append("classical: " + " ".join(model.classical_elements))
    for g in model.gates:
        line = f"{g.seq} {g.kind.value} {','.join(map(str, g.controls))}->{','.join(map(str, g.targets))}"
        if g.parameter is not None:
            line += " " + format_param(g.parameter)
        lines.append(line)
    return "\n".join(lines) + "\n"


# element inventory

GateKey = tuple  # (kind, operands, rounded parameter or None)


def gate_key(kind, operands, parameter=None) -> GateKey:
    kind = kind.value if isinstance(kind, GateKind) else str(kind)
    if parameter is not None:
        parameter = round(float(parameter), PARAM_DECIMALS) + 0.0
    return (kind, tuple(sorted(operands)), parameter)


_NON_ALNUM = re.compile(r"[^0-9a-z]")


def classical_key(name: str) -> str:
    """Spelling-insensitive key, so ``applyHadamard`` and ``apply_hadamard`` agree."""
    return _NON_ALNUM.sub("", name.lower())


@dataclass
class ElementInventory:
    gates: Counter = field(default_factory=Counter)
    partition_count: int = 0
    classical: Counter = field(default_factory=Counter)
    diagnostics: list = field(default_factory=list, compare=False, repr=False)

    def kind_only(self) -> "ElementInventory":
        relaxed = Counter()
        for (kind, _ops, _param), count in self.gates.items():
            relaxed[(kind, (), None)] += count
        return ElementInventory(relaxed, self.partition_count, Counter(self.classical))

    def to_dict(self) -> dict:
        return {
            "gates": [
                {"kind": k, "operands": list(ops), "param": p, "count": c}
                for (k, ops, p), c in sorted(self.gates.items(), key=lambda kv: repr(kv[0]))
            ],
            "partition_count": self.partition_count,
            "classical": dict(sorted(self.classical.items())),
        }


def expected_inventory(model: QuantumCircuitModel) -> ElementInventory:
    gates = Counter(gate_key(g.kind, g.operands, g.parameter) for g in model.gates)
    classical = Counter(classical_key(c) for c in model.classical_elements)
    return ElementInventory(gates, len(model.partitions), classical)
