"""Plain-text and CSV report writers.

Every report starts with ``#``-prefixed provenance lines (seed, config hash,
mode, ...) followed by the body.  Nothing time- or host-dependent is written,
so identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .asset_data import format_number
from .evaluation.metrics import MetricsReport, round_half_up


def cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "nan" if math.isnan(x) else format_number(x)
    if isinstance(x, int):
        return str(x)
    return str(getattr(x, "value", x))


def header_lines(meta: dict) -> list[str]:
    return [f"# {k}: {cell(v)}" for k, v in meta.items()]


def write_csv(path, meta: dict, columns, rows) -> None:
    buf = io.StringIO()
    for line in header_lines(meta):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([cell(v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def write_text(path, meta: dict, body: str) -> None:
    lines = header_lines(meta) + ["", body.rstrip("\n"), ""]
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def read_csv(path) -> tuple[dict, list[dict]]:
    """Inverse of :func:`write_csv`: (provenance, rows as dicts of strings)."""
    meta, body = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))


def metrics_rows(report: MetricsReport):
    """Per-class and macro rows, unrounded."""
    return [("Asset Failed Status", *report.failed.as_tuple()),
            ("Asset Working Status", *report.working.as_tuple()),
            ("Average", *report.macro.as_tuple())]


def macro_table(rows, label: str = "Method") -> str:
    """Side-by-side macro precision/recall/F1, two decimals, half-up."""
    width = max([len(label)] + [len(str(name)) for name, _ in rows]) + 2
    out = [f"{label:<{width}}{'Precision':>10}{'Recall':>10}{'F1-Score':>10}"]
    for name, rep in rows:
        m = rep.macro
        out.append(f"{str(name):<{width}}{round_half_up(m.precision):>10.2f}"
                   f"{round_half_up(m.recall):>10.2f}{round_half_up(m.f1):>10.2f}")
    return "\n".join(out)


def f1_row_table(label: str, columns, values) -> str:
    """One-row table of average F1 scores, as in the sensitivity tables."""
    head = [label] + [str(c) for c in columns]
    row = ["Average F1-Score"] + [f"{round_half_up(v):.2f}" for v in values]
    widths = [max(len(a), len(b)) + 2 for a, b in zip(head, row)]
    return "\n".join("".join(f"{x:<{w}}" for x, w in zip(line, widths)).rstrip()
                     for line in (head, row))
