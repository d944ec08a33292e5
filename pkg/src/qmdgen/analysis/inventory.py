"""Recover the generated-element inventory from a parsed program.

Method calls on circuit-valued names are matched against the gate alias
table. ``range`` loops (and loops over literal lists) with at most 64
iterations are unrolled so the loop body is counted once per iteration.
Gate calls inside any other loop are not counted; each one yields an
``UnresolvedOperand`` diagnostic instead.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .._assets import gate_alias_table
from ..circuit import ElementInventory, classical_key, gate_key
from .tree import Node, SyntaxTree

MAX_LOOP_ITERATIONS = 64
MAX_UNROLLED_STATEMENTS = 20000

_PI_NAMES = {"pi"}
_PI_MODULES = {"np", "numpy", "math", "qiskit", "sympy"}
_PARAM_KEYWORDS = ("theta", "phi", "lam", "angle")
_QUBIT_KEYWORDS = (
    "control_qubit1", "control_qubit2", "control_qubit", "qubit1", "qubit2", "target_qubit", "qubit", "qubits",
)


class Unresolved(Exception):
    pass


@dataclass
class GateTable:
    methods: dict
    circuit_constructors: set
    register_constructors: set

    @classmethod
    def default(cls) -> "GateTable":
        data = gate_alias_table()
        return cls(dict(data["methods"]), set(data["circuit_constructors"]), set(data["register_constructors"]))

    @classmethod
    def from_mapping(cls, data: dict) -> "GateTable":
        base = cls.default()
        base.methods.update(data.get("methods", {}))
        base.circuit_constructors |= set(data.get("circuit_constructors", ()))
        base.register_constructors |= set(data.get("register_constructors", ()))
        return base


@dataclass
class _State:
    table: GateTable
    source: str
    circuits: dict = field(default_factory=dict)   # name -> qubit count or None
    registers: dict = field(default_factory=dict)  # name -> [offset, size]
    consts: dict = field(default_factory=dict)
    circuit_ctor_names: set = field(default_factory=set)
    register_ctor_names: set = field(default_factory=set)
    circuit_sizes: list = field(default_factory=list)
    register_total: int = 0
    gates: Counter = field(default_factory=Counter)
    classical: Counter = field(default_factory=Counter)
    diagnostics: list = field(default_factory=list)
    budget: int = MAX_UNROLLED_STATEMENTS
    opaque_loops: int = 0  # depth of enclosing loops that could not be unrolled

    def line_of(self, node: Node) -> int:
        return self.source.count("\n", 0, node.span[0]) + 1


def extract_generated_inventory(tree: SyntaxTree, table: GateTable | None = None) -> ElementInventory:
    table = table or GateTable.default()
    st = _State(table, tree.source)
    st.circuit_ctor_names = set(table.circuit_constructors)
    st.register_ctor_names = set(table.register_constructors)
    _block(st, tree.statements, {})
    sizes = [s for s in st.circuit_sizes if s is not None]
    partition_count = max(sizes + [st.register_total, 0])
    return ElementInventory(st.gates, partition_count, st.classical, st.diagnostics)


def _block(st: _State, stmts, env):
    for stmt in stmts:
        st.budget -= 1
        if st.budget < 0:
            if st.budget == -1:
                st.diagnostics.append({"kind": "UnrollBudgetExceeded", "line": st.line_of(stmt)})
            return
        _statement(st, stmt, env)


def _statement(st: _State, stmt: Node, env):
    kind = stmt.kind
    if kind == "Error":
        return
    if kind in ("FunctionDef", "ClassDef"):
        st.classical[classical_key(stmt["name"])] += 1
        _block(st, stmt["body"].children, env)
        return
    if kind == "Decorated":
        _statement(st, stmt["definition"], env)
        return
    if kind == "For":
        _for(st, stmt, env)
        return
    if kind == "If":
        for test, block in stmt["branches"]:
            _scan_calls(st, test, env)
            _block(st, block.children, env)
        if stmt["orelse"] is not None:
            _block(st, stmt["orelse"].children, env)
        return
    if kind == "While":
        st.opaque_loops += 1
        try:
            _scan_calls(st, stmt["test"], env)
            _block(st, stmt["body"].children, env)
        finally:
            st.opaque_loops -= 1
        if stmt["orelse"] is not None:
            _block(st, stmt["orelse"].children, env)
        return
    if kind == "With":
        for expr, _target in stmt["items"]:
            _scan_calls(st, expr, env)
        _block(st, stmt["body"].children, env)
        return
    if kind == "Try":
        _block(st, stmt["body"].children, env)
        for _etype, _name, block in stmt["handlers"]:
            _block(st, block.children, env)
        for extra in (stmt["orelse"], stmt["finalbody"]):
            if extra is not None:
                _block(st, extra.children, env)
        return
    if kind == "ImportFrom":
        for name, asname in stmt["names"]:
            if name in st.table.circuit_constructors:
                st.circuit_ctor_names.add(asname or name)
            if name in st.table.register_constructors:
                st.register_ctor_names.add(asname or name)
        return
    if kind == "Assign":
        _scan_calls(st, stmt["value"], env)
        for target in stmt["targets"]:
            _bind(st, target, stmt["value"], env)
        return
    if kind in ("AugAssign", "AnnAssign", "ExprStmt", "Return"):
        if stmt["value"] is not None:
            _scan_calls(st, stmt["value"], env)
        if kind == "AnnAssign" and stmt["value"] is not None:
            _bind(st, stmt["target"], stmt["value"], env)
        return


def _ctor_name(st: _State, call: Node):
    func = call["func"]
    if func.kind == "Name":
        name = func.text
    elif func.kind == "Attribute":
        name = func["attr"]
    else:
        return None
    if name in st.circuit_ctor_names or (func.kind == "Attribute" and name in st.table.circuit_constructors):
        return "circuit"
    if name in st.register_ctor_names or (func.kind == "Attribute" and name in st.table.register_constructors):
        return "register"
    return None


def _bind(st: _State, target: Node, value: Node, env):
    if target.kind != "Name":
        return
    name = target.text
    st.circuits.pop(name, None)
    st.registers.pop(name, None)
    st.consts.pop(name, None)
    if value.kind == "Call":
        ctor = _ctor_name(st, value)
        if ctor == "circuit":
            st.circuits[name] = _circuit_size(st, value, env)
            st.circuit_sizes.append(st.circuits[name])
            return
        if ctor == "register":
            args = value["args"]
            try:
                size = _eval_int(st, args[0], env) if args else None
            except Unresolved:
                size = None
            if size is not None:
                st.registers[name] = [0, size]
                st.register_total += size
            return
    if value.kind == "Name" and value.text in st.circuits:
        st.circuits[name] = st.circuits[value.text]
        return
    try:
        st.consts[name] = _eval_number(st, value, env)
    except Unresolved:
        pass


def _circuit_size(st: _State, call: Node, env):
    args = call["args"]
    if not args:
        return 0
    first = args[0]
    if first.kind == "Name" and first.text in st.registers:
        offset = 0
        for arg in args:
            if arg.kind == "Name" and arg.text in st.registers:
                st.registers[arg.text][0] = offset
                offset += st.registers[arg.text][1]
        return offset
    try:
        return _eval_int(st, first, env)
    except Unresolved:
        return None


def _for(st: _State, stmt: Node, env):
    target = stmt["target"]
    names = _target_names(target)
    try:
        values = _iter_values(st, stmt["iter"], env)
    except Unresolved:
        values = None
    if values is None or names is None or len(values) > MAX_LOOP_ITERATIONS:
        inner = dict(env)
        for n in names or []:
            inner.pop(n, None)
        inner.update({n: _UNKNOWN for n in (names or [])})
        st.opaque_loops += 1
        try:
            _block(st, stmt["body"].children, inner)
        finally:
            st.opaque_loops -= 1
    else:
        for value in values:
            inner = dict(env)
            if len(names) == 1:
                inner[names[0]] = value
            else:
                if not isinstance(value, (list, tuple)) or len(value) != len(names):
                    inner.update({n: _UNKNOWN for n in names})
                else:
                    inner.update(dict(zip(names, value)))
            _block(st, stmt["body"].children, inner)
    if stmt["orelse"] is not None:
        _block(st, stmt["orelse"].children, env)


_UNKNOWN = object()


def _target_names(target: Node):
    if target.kind == "Name":
        return [target.text]
    if target.kind in ("Tuple", "List", "Paren"):
        elts = [target["value"]] if target.kind == "Paren" else target["elts"]
        names = []
        for e in elts:
            if e.kind != "Name":
                return None
            names.append(e.text)
        return names
    return None


def _iter_values(st, node: Node, env):
    if node.kind == "Call" and node["func"].kind == "Name" and node["func"].text == "range":
        if node["keywords"]:
            raise Unresolved("range with keywords")
        bounds = [_eval_int(st, a, env) for a in node["args"]]
        if not 1 <= len(bounds) <= 3:
            raise Unresolved("bad range arity")
        r = range(*bounds)
        if len(r) > MAX_LOOP_ITERATIONS:
            raise Unresolved("range too long to unroll")
        return list(r)
    if node.kind in ("List", "Tuple"):
        return [_eval_value(st, e, env) for e in node["elts"]]
    raise Unresolved(f"cannot unroll loop over {node.kind}")


def _eval_value(st, node: Node, env):
    if node.kind in ("List", "Tuple"):
        return tuple(_eval_value(st, e, env) for e in node["elts"])
    if node.kind == "Paren":
        return _eval_value(st, node["value"], env)
    return _eval_number(st, node, env)


def _eval_int(st, node: Node, env) -> int:
    value = _eval_number(st, node, env)
    if isinstance(value, float):
        if not value.is_integer():
            raise Unresolved("non-integer value")
        value = int(value)
    return value


_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "//": lambda a, b: a // b,
    "%": lambda a, b: a % b,
    "**": lambda a, b: a ** b,
}


def _eval_number(st, node: Node, env):
    kind = node.kind
    if kind == "Number":
        text = node.text.replace("_", "")
        try:
            if text.lower().startswith(("0x", "0b", "0o")):
                return int(text, 0)
            if any(c in text for c in ".eE"):
                return float(text)
            if text.endswith(("j", "J")):
                raise Unresolved("complex literal")
            return int(text)
        except ValueError:
            raise Unresolved(f"bad number {node.text!r}") from None
    if kind == "Name":
        if node.text in env:
            value = env[node.text]
            if value is _UNKNOWN or isinstance(value, tuple):
                raise Unresolved(f"{node.text} is not a constant")
            return value
        if node.text in st.consts:
            return st.consts[node.text]
        if node.text in _PI_NAMES:
            return math.pi
        raise Unresolved(f"unknown name {node.text}")
    if kind == "Attribute":
        base = node["value"]
        if node["attr"] == "pi" and base.kind == "Name" and base.text in _PI_MODULES:
            return math.pi
        raise Unresolved("attribute is not a known constant")
    if kind == "Paren":
        return _eval_number(st, node["value"], env)
    if kind == "UnaryOp" and node["op"] in ("-", "+"):
        value = _eval_number(st, node["operand"], env)
        return -value if node["op"] == "-" else value
    if kind == "BinOp" and node["op"] in _BINOPS:
        left = _eval_number(st, node["left"], env)
        right = _eval_number(st, node["right"], env)
        try:
            return _BINOPS[node["op"]](left, right)
        except (ZeroDivisionError, OverflowError):
            raise Unresolved("arithmetic error") from None
    raise Unresolved(f"cannot evaluate {kind}")


def _eval_qubits(st, node: Node, env) -> list[int]:
    kind = node.kind
    if kind in ("List", "Tuple"):
        out = []
        for e in node["elts"]:
            out.extend(_eval_qubits(st, e, env))
        return out
    if kind == "Name" and node.text in st.registers:
        offset, size = st.registers[node.text]
        return list(range(offset, offset + size))
    if kind == "Subscript" and node["value"].kind == "Name" and node["value"].text in st.registers:
        offset, size = st.registers[node["value"].text]
        index = _eval_int(st, node["index"], env)
        if not -size <= index < size:
            raise Unresolved("register index out of range")
        return [offset + index % size]
    if kind == "Call" and node["func"].kind == "Name" and node["func"].text == "range":
        return list(_iter_values(st, node, env))
    if kind == "Name" and node.text in env and isinstance(env[node.text], tuple):
        return [int(v) for v in env[node.text]]
    value = _eval_int(st, node, env)
    if value < 0:
        raise Unresolved("negative qubit index")
    return [value]


def _scan_calls(st: _State, expr: Node, env):
    for node in expr.walk():
        if node.kind != "Call":
            continue
        func = node["func"]
        if func.kind != "Attribute" or func["value"].kind != "Name":
            continue
        receiver = func["value"].text
        if receiver not in st.circuits:
            continue
        entry = st.table.methods.get(func["attr"])
        if entry is not None:
            _gate_call(st, node, receiver, func["attr"], entry, env)


def _gate_call(st: _State, call: Node, receiver, method, entry, env):
    args = list(call["args"])
    keywords = dict((k, v) for k, v in call["keywords"] if k is not None)
    n_params = entry.get("params", 0)
    arity = entry.get("qubits", 1)
    diag = {"kind": "UnresolvedOperand", "method": method, "line": st.line_of(call)}
    if st.opaque_loops:
        st.diagnostics.append(dict(diag, detail="inside a loop that cannot be unrolled"))
        return
    if any(a.kind == "Starred" for a in args):
        st.diagnostics.append(dict(diag, detail="starred argument"))
        return

    params = args[:n_params]
    rest = args[n_params:]
    for kw in _PARAM_KEYWORDS:
        if len(params) < n_params and kw in keywords:
            params.append(keywords[kw])
    for kw in _QUBIT_KEYWORDS:
        if kw in keywords:
            rest.append(keywords[kw])
    if len(params) != n_params:
        st.diagnostics.append(dict(diag, detail="missing rotation parameter"))
        return
    try:
        param_values = [float(_eval_number(st, p, env)) for p in params]
    except Unresolved as exc:
        st.diagnostics.append(dict(diag, kind="UnresolvedParameter", detail=str(exc)))
        return

    size = st.circuits.get(receiver)
    try:
        if arity == "all":
            if size is None:
                raise Unresolved("circuit size unknown")
            operand_lists = [list(range(size))]
            broadcast_single = True
        elif arity == "*":
            if rest:
                flat = []
                for a in rest:
                    flat.extend(_eval_qubits(st, a, env))
                operand_lists = [flat]
            elif size is not None:
                operand_lists = [list(range(size))]
            else:
                raise Unresolved("circuit size unknown")
            broadcast_single = False
        else:
            if len(rest) < arity:
                raise Unresolved(f"expected {arity} qubit argument(s)")
            operand_lists = [_eval_qubits(st, a, env) for a in rest[:arity]]
            broadcast_single = None
    except Unresolved as exc:
        st.diagnostics.append(dict(diag, detail=str(exc)))
        return

    kind = entry["kind"]
    param = param_values[0] if param_values else None
    if broadcast_single is True:
        for q in operand_lists[0]:
            st.gates[gate_key(kind, (q,), param)] += 1
        return
    if broadcast_single is False:
        st.gates[gate_key(kind, tuple(sorted(set(operand_lists[0]))), param)] += 1
        return
    width = max(len(ops) for ops in operand_lists)
    if any(len(ops) not in (1, width) for ops in operand_lists) or width == 0:
        st.diagnostics.append(dict(diag, detail="mismatched broadcast lengths"))
        return
    for i in range(width):
        operands = tuple(ops[0] if len(ops) == 1 else ops[i] for ops in operand_lists)
        st.gates[gate_key(kind, operands, param)] += 1
