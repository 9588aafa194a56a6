"""Deterministic text rendering for reports and data tables.

Every number is printed with 17 significant digits, enough to round-trip
a double exactly, so identical runs produce byte-identical files and
reports diff cleanly across machines.
"""
from __future__ import annotations

import numpy as np


def fmt(value) -> str:
    """Canonical text for one value."""
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    if value is None:
        return "none"
    if isinstance(value, np.ndarray):
        return "[" + ", ".join(fmt(v) for v in value.tolist()) + "]"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(fmt(v) for v in value) + "]"
    return str(value)


def render_report(title: str, items) -> str:
    """Key-value report block.  `items` is an ordered (key, value) list."""
    lines = [f"# {title}"]
    for key, value in items:
        lines.append(f"{key}: {fmt(value)}")
    return "\n".join(lines) + "\n"


def render_csv(header, rows) -> str:
    """Comma-separated table; column order is fixed by the header row."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def check_line(name: str, passed: bool, detail: str = "") -> str:
    mark = "PASS" if passed else "FAIL"
    suffix = f"  {detail}" if detail else ""
    return f"[{mark}] {name}{suffix}"
