"""Syntax tree node type shared by the parser and the metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

LEAF_KINDS = frozenset({"Name", "Number", "String", "Keyword", "Op", "ErrorToken"})
ANONYMIZED_LEAVES = frozenset({"Name", "Number", "String", "ErrorToken"})

STATEMENT_KINDS = frozenset({
    "Import", "ImportFrom", "FunctionDef", "ClassDef", "Decorated", "For", "While", "If",
    "With", "Try", "Return", "Pass", "Break", "Continue", "Raise", "Assert", "Global",
    "Nonlocal", "Del", "Assign", "AugAssign", "AnnAssign", "ExprStmt", "Error",
})


@dataclass(eq=False)
class Node:
    kind: str
    children: tuple["Node", ...] = ()
    text: Optional[str] = None
    span: tuple[int, int] = (0, 0)
    fields: dict = field(default_factory=dict, repr=False)

    @property
    def is_leaf(self) -> bool:
        return self.kind in LEAF_KINDS

    def __getitem__(self, role):
        return self.fields.get(role)

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> Iterator["Node"]:
        if self.is_leaf:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()

    def height(self) -> int:
        if not self.children:
            return 1
        return 1 + max(c.height() for c in self.children)

    def shape(self):
        """Structure with identifier and literal leaves anonymized."""
        if self.is_leaf:
            return self.kind if self.kind in ANONYMIZED_LEAVES else f"{self.kind}:{self.text}"
        return (self.kind,) + tuple(c.shape() for c in self.children)

    def dump(self, indent: int = 0) -> str:
        pad = "  " * indent
        if self.is_leaf:
            return f"{pad}{self.kind} {self.text!r}"
        return "\n".join([f"{pad}{self.kind}"] + [c.dump(indent + 1) for c in self.children])


@dataclass
class SyntaxTree:
    root: Node
    source: str
    degraded: bool = False
    errors: list = field(default_factory=list)

    @property
    def statements(self) -> tuple[Node, ...]:
        return self.root.children

    def walk(self):
        return self.root.walk()
