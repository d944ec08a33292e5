"""Generate Qiskit code from quantum circuit models with an LLM and score it."""

__version__ = "0.1.0"

from .circuit import (  # noqa: E402
    ElementInventory,
    GateApplication,
    GateKind,
    QuantumCircuitModel,
    QubitPartition,
    canonical_text,
    expected_inventory,
    load_model,
    parse_model,
)
from .errors import QmdgenError  # noqa: E402
from .reference import render_reference  # noqa: E402

__all__ = [
    "ElementInventory",
    "GateApplication",
    "GateKind",
    "QmdgenError",
    "QuantumCircuitModel",
    "QubitPartition",
    "__version__",
    "canonical_text",
    "expected_inventory",
    "load_model",
    "parse_model",
    "render_reference",
]
