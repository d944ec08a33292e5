"""Def-use edges over a parsed program, with position-free normalization.

Statements are visited once, in program order (loop bodies included once).
Each variable use links to the nearest preceding definition visible from
the current scope. For matching, an edge is reduced to
``(variable id, which definition of it, variable being defined)`` where
variable ids are assigned in first-definition order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .tree import Node, SyntaxTree


@dataclass(frozen=True)
class DataFlowEdge:
    use_pos: int
    def_pos: int
    var: str            # normalized id of the variable
    def_ordinal: int    # 0 for the variable's first definition, 1 for the second, ...
    sink: Optional[str]  # normalized id(s) of what the using statement defines

    def normalized(self):
        return (self.var, self.def_ordinal, self.sink)


@dataclass
class DataFlowGraph:
    edges: list[DataFlowEdge] = field(default_factory=list)
    var_ids: dict = field(default_factory=dict)  # (scope, name) -> normalized id

    def normalized(self) -> Counter:
        return Counter(e.normalized() for e in self.edges)

    def __len__(self):
        return len(self.edges)


class _Scope:
    _counter = 0

    def __init__(self, parent=None):
        _Scope._counter += 1
        self.uid = _Scope._counter
        self.parent = parent
        self.defs: dict[str, tuple[int, int]] = {}  # name -> (def_pos, ordinal)

    def lookup(self, name):
        scope = self
        while scope is not None:
            if name in scope.defs:
                return scope, scope.defs[name]
            scope = scope.parent
        return None, None


class _Builder:
    def __init__(self):
        self.graph = DataFlowGraph()
        self.def_counts: Counter = Counter()
        self.scope_ids: dict[int, int] = {}

    def var_id(self, scope, name) -> str:
        key = (self._scope_no(scope), name)
        if key not in self.graph.var_ids:
            self.graph.var_ids[key] = f"var_{len(self.graph.var_ids)}"
        return self.graph.var_ids[key]

    def _scope_no(self, scope) -> int:
        # stable, tree-local scope numbering
        return self.scope_ids.setdefault(scope.uid, len(self.scope_ids))

    def define(self, scope, leaf: Node) -> str:
        vid = self.var_id(scope, leaf.text)
        key = (self._scope_no(scope), leaf.text)
        ordinal = self.def_counts[key]
        self.def_counts[key] += 1
        scope.defs[leaf.text] = (leaf.span[0], ordinal)
        return vid

    def link(self, scope, uses: list[Node], sink):
        for leaf in uses:
            owner, found = scope.lookup(leaf.text)
            if owner is None:
                continue
            def_pos, ordinal = found
            var = self.var_id(owner, leaf.text)
            self.graph.edges.append(DataFlowEdge(leaf.span[0], def_pos, var, ordinal, sink))


def _uses(expr: Optional[Node], bound=frozenset()) -> list[Node]:
    """Name leaves read by ``expr``, in source order."""
    if expr is None:
        return []
    kind = expr.kind
    if kind == "Name":
        return [] if expr.text in bound else [expr]
    if expr.is_leaf:
        return []
    if kind == "Attribute":
        return _uses(expr["value"], bound)
    if kind == "KeywordArg":
        return _uses(expr["value"], bound)
    if kind == "Lambda":
        inner = bound | {p["name"] for p in expr["params"]}
        out = []
        for p in expr["params"]:
            out += _uses(p["default"], bound)
        return out + _uses(expr["body"], inner)
    if kind in ("ListComp", "SetComp", "GeneratorExp", "DictComp"):
        inner = set(bound)
        out = []
        for target, iterable, ifs in expr["generators"]:
            out += _uses(iterable, frozenset(inner))
            inner |= {n.text for n in _target_leaves(target)}
            for cond in ifs:
                out += _uses(cond, frozenset(inner))
        return out + _uses(expr["elt"], frozenset(inner))
    if kind == "Param":
        return _uses(expr["default"], bound)
    out = []
    for child in expr.children:
        out += _uses(child, bound)
    return out


def _target_leaves(target: Node) -> list[Node]:
    """Name leaves bound by an assignment target."""
    if target.kind == "Name":
        return [target]
    if target.kind in ("Tuple", "List"):
        out = []
        for e in target["elts"]:
            out += _target_leaves(e)
        return out
    if target.kind in ("Paren", "Starred"):
        return _target_leaves(target["value"])
    return []


def _target_reads(target: Node) -> list[Node]:
    """Names read when assigning into ``target`` (``a[i] = ...`` reads a and i)."""
    if target.kind in ("Attribute", "Subscript"):
        return _uses(target)
    if target.kind in ("Tuple", "List"):
        out = []
        for e in target["elts"]:
            out += _target_reads(e)
        return out
    if target.kind in ("Paren", "Starred"):
        return _target_reads(target["value"])
    return []


def _sink(ids):
    return ",".join(ids) if ids else None


def extract_dataflow(tree: SyntaxTree) -> DataFlowGraph:
    builder = _Builder()
    _block(builder, _Scope(), tree.statements)
    return builder.graph


def _block(b: _Builder, scope: _Scope, stmts):
    for stmt in stmts:
        _statement(b, scope, stmt)


def _statement(b: _Builder, scope: _Scope, stmt: Node):
    kind = stmt.kind
    if kind == "Error":
        return
    if kind == "Assign":
        uses = _uses(stmt["value"])
        reads = [r for t in stmt["targets"] for r in _target_reads(t)]
        _resolve_then_define(b, scope, uses + reads, [l for t in stmt["targets"] for l in _target_leaves(t)])
    elif kind == "AugAssign":
        target = stmt["target"]
        uses = _uses(target) + _uses(stmt["value"])
        _resolve_then_define(b, scope, uses, _target_leaves(target))
    elif kind == "AnnAssign":
        if stmt["value"] is None:
            return
        uses = _uses(stmt["value"]) + _target_reads(stmt["target"])
        _resolve_then_define(b, scope, uses, _target_leaves(stmt["target"]))
    elif kind in ("ExprStmt", "Return"):
        b.link(scope, _uses(stmt["value"]), None)
    elif kind in ("Raise", "Assert", "Del", "Pass", "Break", "Continue", "Global", "Nonlocal"):
        b.link(scope, _uses(stmt), None)
    elif kind == "Import":
        for alias in (c for c in stmt.children if c.kind == "Alias"):
            _define_alias(b, scope, alias, import_from=False)
    elif kind == "ImportFrom":
        for alias in (c for c in stmt.children if c.kind == "Alias"):
            _define_alias(b, scope, alias, import_from=True)
    elif kind == "Decorated":
        uses = [u for d in stmt["decorators"] for u in _uses(d)]
        _definition(b, scope, stmt["definition"], uses)
    elif kind in ("FunctionDef", "ClassDef"):
        _definition(b, scope, stmt, [])
    elif kind == "For":
        target_leaves = _target_leaves(stmt["target"])
        _resolve_then_define(b, scope, _uses(stmt["iter"]) + _target_reads(stmt["target"]), target_leaves)
        _block(b, scope, stmt["body"].children)
        if stmt["orelse"] is not None:
            _block(b, scope, stmt["orelse"].children)
    elif kind == "While":
        b.link(scope, _uses(stmt["test"]), None)
        _block(b, scope, stmt["body"].children)
        if stmt["orelse"] is not None:
            _block(b, scope, stmt["orelse"].children)
    elif kind == "If":
        for test, block in stmt["branches"]:
            b.link(scope, _uses(test), None)
            _block(b, scope, block.children)
        if stmt["orelse"] is not None:
            _block(b, scope, stmt["orelse"].children)
    elif kind == "With":
        for expr, target in stmt["items"]:
            if target is None:
                b.link(scope, _uses(expr), None)
            else:
                _resolve_then_define(b, scope, _uses(expr), _target_leaves(target))
        _block(b, scope, stmt["body"].children)
    elif kind == "Try":
        _block(b, scope, stmt["body"].children)
        for etype, _name, block in stmt["handlers"]:
            b.link(scope, _uses(etype), None)
            _block(b, scope, block.children)
        for extra in (stmt["orelse"], stmt["finalbody"]):
            if extra is not None:
                _block(b, scope, extra.children)


def _resolve_then_define(b, scope, uses, def_leaves):
    resolved = []
    for leaf in uses:
        owner, found = scope.lookup(leaf.text)
        if owner is not None:
            resolved.append((leaf, owner, found))
    ids = [b.define(scope, leaf) for leaf in def_leaves]
    sink = _sink(ids)
    for leaf, owner, (def_pos, ordinal) in resolved:
        b.graph.edges.append(DataFlowEdge(leaf.span[0], def_pos, b.var_id(owner, leaf.text), ordinal, sink))


def _define_alias(b, scope, alias: Node, import_from: bool):
    names = [c for c in alias.children if c.kind == "Name"]
    if alias["asname"] is not None:
        leaf = names[-1]
    elif import_from:
        leaf = names[0]
    else:
        dotted = alias.children[0]
        leaf = next(c for c in dotted.children if c.kind == "Name")
    b.define(scope, leaf)


def _definition(b, scope, node: Node, decorator_uses):
    if node.kind == "FunctionDef":
        pre = list(decorator_uses)
        for p in node["params"]:
            pre += _uses(p["default"])
    else:
        pre = list(decorator_uses) + [u for base in node["bases"] for u in _uses(base)]
    name_leaf = node.children[1]
    _resolve_then_define(b, scope, pre, [name_leaf])
    inner = _Scope(scope)
    if node.kind == "FunctionDef":
        for p in node["params"]:
            leaf = next(c for c in p.children if c.kind == "Name")
            b.define(inner, leaf)
    _block(b, inner, node["body"].children)
