"""Canonical JSON and CSV rendering of command results.

JSON keys are sorted, floats are printed with 15 significant digits and
rationals become ``{"rational": "p/q", "decimal": x}``, so equal inputs give
byte-identical text.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

import numpy as np

from .core import IndexSet, decimal15, rational_str


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = f"{x:.15g}"
    return "0" if text == "-0" else text


def _decimal_text(x: Fraction) -> str:
    d = decimal15(x)
    # plain notation when it stays short, exponent form otherwise
    text = format(d, "f") if -6 <= d.adjusted() < 15 else format(d, "E")
    if "." in text and "E" not in text:
        text = text.rstrip("0").rstrip(".")
    return text or "0"


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return '{"decimal":%s,"rational":"%s"}' % (_decimal_text(obj), rational_str(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return format_float(x)
        return json.dumps(format_float(x))
    if isinstance(obj, Decimal):
        return _decimal_text(Fraction(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, IndexSet):
        return json.dumps(str(obj))
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + _encode(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def canonical_json(obj) -> str:
    return _encode(obj)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return rational_str(v)
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    return str(v)


@dataclass
class Envelope:
    command: str
    params: dict
    results: list
    columns: list = field(default_factory=list)

    def to_json(self) -> str:
        return canonical_json(
            {"command": self.command, "params": self.params, "results": self.results, "format": "json"}
        )

    def to_csv(self) -> str:
        """One row per result.  A rational column ``x`` is written as p/q
        with its decimal value in an extra ``x_decimal`` column."""
        cols = self.columns or (sorted(self.results[0]) if self.results else [])
        rational_cols = {
            c for c in cols if any(isinstance(r.get(c), Fraction) for r in self.results)
        }
        header = []
        for c in cols:
            header.append(c)
            if c in rational_cols:
                header.append(c + "_decimal")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for r in self.results:
            row = []
            for c in cols:
                v = r.get(c)
                row.append(_cell(v))
                if c in rational_cols:
                    row.append(_decimal_text(v) if isinstance(v, Fraction) else _cell(v))
            writer.writerow(row)
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json() + "\n"
