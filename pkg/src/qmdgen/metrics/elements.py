"""Element-wise matching and Precision/Recall/F-measure."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass, fields
from decimal import ROUND_HALF_UP, Decimal
from typing import Optional

from ..circuit import ElementInventory
from ..errors import EmptyRows

CATEGORIES = ("gates", "partitions", "classical")


@dataclass(frozen=True)
class CategoryCounts:
    relevant: int = 0
    irrelevant: int = 0
    missing: int = 0

    def __add__(self, other: "CategoryCounts") -> "CategoryCounts":
        return CategoryCounts(
            self.relevant + other.relevant,
            self.irrelevant + other.irrelevant,
            self.missing + other.missing,
        )


@dataclass(frozen=True)
class MatchCounts:
    gates: CategoryCounts
    partitions: CategoryCounts
    classical: CategoryCounts

    @property
    def combined(self) -> CategoryCounts:
        return self.gates + self.partitions + self.classical

    def to_dict(self) -> dict:
        out = {name: asdict(getattr(self, name)) for name in CATEGORIES}
        out["combined"] = asdict(self.combined)
        return out


def _multiset_counts(expected: Counter, generated: Counter) -> CategoryCounts:
    relevant = sum((expected & generated).values())
    return CategoryCounts(
        relevant=relevant,
        irrelevant=sum(generated.values()) - relevant,
        missing=sum(expected.values()) - relevant,
    )


def match_inventories(expected: ElementInventory, generated: ElementInventory, match_operands: bool = True) -> MatchCounts:
    if not match_operands:
        expected, generated = expected.kind_only(), generated.kind_only()
    e, g = expected.partition_count, generated.partition_count
    return MatchCounts(
        gates=_multiset_counts(expected.gates, generated.gates),
        partitions=CategoryCounts(min(e, g), max(0, g - e), max(0, e - g)),
        classical=_multiset_counts(expected.classical, generated.classical),
    )


def _ratio(relevant: int, other: int, opposite: int) -> float:
    """relevant / (relevant + other), with the empty-vs-empty convention."""
    denom = relevant + other
    if denom == 0:
        return 1.0 if opposite == 0 else 0.0
    return relevant / denom


def f_measure(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def compute_prf(counts) -> tuple[float, float, float]:
    """Precision, recall and F-measure for a :class:`CategoryCounts`
    (a :class:`MatchCounts` is scored on its combined counts)."""
    if isinstance(counts, MatchCounts):
        counts = counts.combined
    p = _ratio(counts.relevant, counts.irrelevant, counts.missing)
    r = _ratio(counts.relevant, counts.missing, counts.irrelevant)
    return p, r, f_measure(p, r)


def q_average(gate_scores, partition_scores) -> tuple[float, float, float]:
    return tuple((a + b) / 2 for a, b in zip(gate_scores, partition_scores))


def round_half_up(value: float, places: int = 2) -> Decimal:
    quantum = Decimal(1).scaleb(-places)
    return Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)


def fmt2(value: Optional[float]) -> str:
    return "n/a" if value is None else str(round_half_up(value, 2))


@dataclass(frozen=True)
class MetricRow:
    precision: float
    recall: float
    f_measure: float
    q_precision: float
    q_recall: float
    q_f_measure: float
    codebleu: Optional[float] = None
    gate_precision: float = 0.0
    gate_recall: float = 0.0
    gate_f_measure: float = 0.0
    partition_precision: float = 0.0
    partition_recall: float = 0.0
    partition_f_measure: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MetricRow":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


def score_counts(counts: MatchCounts, codebleu: Optional[float] = None) -> MetricRow:
    gate = compute_prf(counts.gates)
    part = compute_prf(counts.partitions)
    p, r, f = compute_prf(counts.combined)
    qp, qr, qf = q_average(gate, part)
    return MetricRow(
        precision=p, recall=r, f_measure=f,
        q_precision=qp, q_recall=qr, q_f_measure=qf,
        codebleu=codebleu,
        gate_precision=gate[0], gate_recall=gate[1], gate_f_measure=gate[2],
        partition_precision=part[0], partition_recall=part[1], partition_f_measure=part[2],
    )


def aggregate(rows) -> MetricRow:
    """Field-wise arithmetic mean over the values exactly as given.

    ``codebleu`` is averaged over the rows that have it; it stays ``None``
    when no row does.
    """
    rows = list(rows)
    if not rows:
        raise EmptyRows("cannot aggregate zero rows")
    out = {}
    for f in fields(MetricRow):
        values = [getattr(r, f.name) for r in rows if getattr(r, f.name) is not None]
        out[f.name] = math.fsum(values) / len(values) if values else None
    return MetricRow(**out)
