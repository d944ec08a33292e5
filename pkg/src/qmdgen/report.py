"""Experiment report structures and their markdown/CSV/JSON renderings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

from .metrics.elements import MetricRow, aggregate, fmt2

REPORT_FORMAT_VERSION = 1

# (header, MetricRow field) in table order
TABLE_COLUMNS = (
    ("CodeBLEU", "codebleu"),
    ("Q-Recall", "q_recall"),
    ("Q-Precision", "q_precision"),
    ("Q-F-measure", "q_f_measure"),
    ("Recall", "recall"),
    ("Precision", "precision"),
    ("F-measure", "f_measure"),
)
CSV_FIELDS = [f for _h, f in TABLE_COLUMNS] + [
    "gate_recall", "gate_precision", "gate_f_measure",
    "partition_recall", "partition_precision", "partition_f_measure",
]


@dataclass
class RunRecord:
    run: int
    row: Optional[MetricRow] = None
    error: Optional[str] = None
    cached: bool = False

    def to_dict(self) -> dict:
        return {
            "run": self.run,
            "row": self.row.to_dict() if self.row else None,
            "error": self.error,
            "cached": self.cached,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        row = MetricRow.from_dict(d["row"]) if d.get("row") else None
        return cls(d["run"], row, d.get("error"), bool(d.get("cached", False)))


@dataclass
class CellResult:
    instance: str
    kind: str
    rag: str
    records: list = field(default_factory=list)

    @property
    def label(self) -> str:
        return f"{self.instance}__{self.kind}__rag-{self.rag}"

    @property
    def rows(self) -> list:
        return [r.row for r in self.records if r.row is not None]

    @property
    def average(self) -> Optional[MetricRow]:
        rows = self.rows
        return aggregate(rows) if rows else None

    def to_dict(self) -> dict:
        avg = self.average
        return {
            "instance": self.instance,
            "prompt": self.kind,
            "rag": self.rag,
            "runs": [r.to_dict() for r in self.records],
            "average": avg.to_dict() if avg else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CellResult":
        return cls(d["instance"], d["prompt"], d["rag"], [RunRecord.from_dict(r) for r in d["runs"]])


@dataclass
class ExperimentReport:
    cells: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def cell(self, instance, kind, rag) -> CellResult:
        for c in self.cells:
            if (c.instance, c.kind, c.rag) == (instance, str(kind), rag):
                return c
        raise KeyError((instance, kind, rag))


def _md_row(label, row: Optional[MetricRow]) -> str:
    if row is None:
        values = ["ERROR"] + ["-"] * (len(TABLE_COLUMNS) - 1)
    else:
        values = [fmt2(getattr(row, f)) for _h, f in TABLE_COLUMNS]
    return "| " + " | ".join([str(label)] + values) + " |"


def _md_table_head(first_cols) -> list[str]:
    headers = list(first_cols) + [h for h, _f in TABLE_COLUMNS]
    return ["| " + " | ".join(headers) + " |", "|" + "|".join("---" for _ in headers) + "|"]


def render_markdown(report: ExperimentReport) -> str:
    out = ["# Experiment report", ""]
    for cell in report.cells:
        out.append(f"## {cell.instance} | {cell.kind} prompt | RAG {cell.rag}")
        out.append("")
        out += _md_table_head(["RUN"])
        for rec in cell.records:
            out.append(_md_row(rec.run, rec.row))
        out.append(_md_row("Average", cell.average))
        failures = [r for r in cell.records if r.error]
        if failures:
            out.append("")
            for rec in failures:
                out.append(f"- run {rec.run} failed: {rec.error}")
        out.append("")
    if report.cells:
        out.append("## Summary of averages")
        out.append("")
        out += _md_table_head(["Instance", "Prompt", "RAG"])
        for cell in report.cells:
            out.append(_md_row(f"{cell.instance} | {cell.kind} | {cell.rag}", cell.average))
        out.append("")
    return "\n".join(out)


def _full(value) -> str:
    return "" if value is None else repr(float(value))


def render_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["instance", "prompt", "rag", "run"] + CSV_FIELDS + ["error"])
    for cell in report.cells:
        entries = [(rec.run, rec.row, rec.error or "") for rec in cell.records]
        entries.append(("average", cell.average, ""))
        for run, row, error in entries:
            values = [_full(getattr(row, f)) if row else "" for f in CSV_FIELDS]
            writer.writerow([cell.instance, cell.kind, cell.rag, run] + values + [error])
    return buf.getvalue()


def report_to_dict(report: ExperimentReport) -> dict:
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "provenance": report.provenance,
        "cells": [c.to_dict() for c in report.cells],
    }


def render_json(report: ExperimentReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


RENDERERS = {"markdown": render_markdown, "md": render_markdown, "csv": render_csv, "json": render_json}


def render_report(report: ExperimentReport, format: str = "markdown") -> str:
    try:
        renderer = RENDERERS[format]
    except KeyError:
        raise ValueError(f"unknown report format {format!r}") from None
    return renderer(report)


def load_report(text: str) -> ExperimentReport:
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError("report must be a JSON object")
    if data.get("format_version") != REPORT_FORMAT_VERSION:
        raise ValueError(f"unsupported report format version {data.get('format_version')!r}")
    return ExperimentReport([CellResult.from_dict(c) for c in data["cells"]], data.get("provenance", {}))
