"""Deterministic JSON/CSV writers and the sweep report container.

Floats are written with 17 significant digits and keys in insertion order,
so identical inputs give byte-identical files. CSV files start with a
single ``# {json}`` line holding the effective configuration.
"""

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BoundSweepReport",
    "to_jsonable",
    "dumps",
    "write_json",
    "write_csv",
    "read_header",
    "format_float",
]


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def to_jsonable(obj):
    """Plain Python structure for dataclasses, numpy types and containers."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _encode(o, level, indent):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(o, dict):
        if not o:
            yield "{}"
            return
        yield "{"
        first = True
        for k, v in o.items():
            if not first:
                yield sep
            first = False
            yield pad + json.dumps(str(k)) + ": "
            yield from _encode(v, level + 1, indent)
        yield end + "}"
    elif isinstance(o, (list, tuple)):
        if not o:
            yield "[]"
            return
        # numeric rows stay on one line
        flat = all(not isinstance(v, (dict, list, tuple)) for v in o)
        yield "["
        for i, v in enumerate(o):
            if i:
                yield ", " if flat or indent is None else sep
            if not flat:
                yield pad
            yield from _encode(v, level + 1, indent)
        yield ("" if flat else end) + "]"
    elif isinstance(o, bool) or o is None:
        yield json.dumps(o)
    elif isinstance(o, float):
        yield format_float(o)
    elif isinstance(o, int):
        yield str(o)
    else:
        yield json.dumps(o)


def dumps(obj, indent=2):
    """Deterministic JSON text (17 significant digits, no key sorting)."""
    return "".join(_encode(to_jsonable(obj), 0, indent)) + "\n"


def write_json(path, obj, indent=2):
    text = dumps(obj, indent)
    if path is None or path == "-":
        return text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


def write_csv(path, columns, rows, header=None):
    """CSV with an optional ``# {json}`` config line; returns the text."""
    buf = io.StringIO()
    if header is not None:
        buf.write("# " + dumps(header, indent=None))
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(format_float(v) if isinstance(v, (float, np.floating))
                           else str(v) for v in row) + "\n")
    text = buf.getvalue()
    if path is not None and path != "-":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def read_header(path_or_text):
    """The config dict stored on the first ``# `` line of a CSV file."""
    if "\n" in path_or_text:
        first = path_or_text.split("\n", 1)[0]
    else:
        with open(path_or_text, encoding="utf-8") as fh:
            first = fh.readline()
    if not first.startswith("# "):
        raise ValueError("no config header found")
    return json.loads(first[2:])


@dataclass
class BoundSweepReport:
    """Values of a target quantity over a parameter grid and their supremum.

    ``grid`` is an (P, 2) array of parameter points, ``values`` the target
    at each point (absolute values are taken for the supremum).
    """

    target: str
    grid: np.ndarray
    values: np.ndarray
    empirical_sup: float = None
    argmax: tuple = None
    bound_formula: float = None
    verdict: str = "INFORMATIONAL"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float).reshape(-1, 2)
        self.values = np.asarray(self.values, dtype=float).ravel()
        if len(self.values) != len(self.grid):
            raise ValueError("grid and values differ in length")
        if self.empirical_sup is None and len(self.values):
            mags = np.abs(self.values)
            i = int(np.argmax(mags))
            self.empirical_sup = float(mags[i])
            self.argmax = tuple(float(v) for v in self.grid[i])

    def to_dict(self, include_grid=False):
        out = {
            "target": self.target,
            "empirical_sup": self.empirical_sup,
            "argmax": list(self.argmax) if self.argmax is not None else None,
            "bound_formula": self.bound_formula,
            "verdict": self.verdict,
            "points": int(len(self.values)),
            "meta": self.meta,
        }
        if include_grid:
            out["grid"] = self.grid.tolist()
            out["values"] = self.values.tolist()
        return out

    def csv_rows(self):
        return [(a, b, v) for (a, b), v in zip(self.grid, self.values)]
