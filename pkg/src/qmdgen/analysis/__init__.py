"""Static analysis of generated programs: parsing, inventory and dataflow."""

from .dataflow import DataFlowEdge, DataFlowGraph, extract_dataflow
from .inventory import GateTable, extract_generated_inventory
from .parser import parse_source
from .tree import Node, SyntaxTree

__all__ = [
    "DataFlowEdge",
    "DataFlowGraph",
    "GateTable",
    "Node",
    "SyntaxTree",
    "extract_dataflow",
    "extract_generated_inventory",
    "parse_source",
]
