"""Machine-readable check reports."""

from __future__ import annotations

import csv
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def plain(obj):
    """Convert numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def refinement_orders(errors, factor: float = 2.0) -> list:
    """Observed orders ``log(e_k / e_{k+1}) / log(factor)``."""
    out = []
    for a, b in zip(errors, errors[1:]):
        out.append(math.log(a / b) / math.log(factor) if a > 0 and b > 0 else None)
    return out


def ratios(errors) -> list:
    return [a / b if b > 0 else math.inf for a, b in zip(errors, errors[1:])]


@dataclass
class CheckReport:
    """Outcome of a named numerical check.

    ``passed`` is true exactly when every entry of ``criteria`` is true.
    """

    name: str
    inputs: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)
    tolerance: dict = field(default_factory=dict)
    criteria: dict = field(default_factory=dict)
    orders: dict = field(default_factory=dict)
    table: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.criteria) and all(bool(v) for v in self.criteria.values())

    def require(self, criterion: str, ok) -> bool:
        self.criteria[criterion] = bool(ok)
        return bool(ok)

    def to_dict(self) -> dict:
        return plain({
            "name": self.name,
            "passed": self.passed,
            "inputs": self.inputs,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "criteria": self.criteria,
            "orders": self.orders,
            "table": self.table,
            "notes": self.notes,
            "wall_time": self.wall_time,
        })

    @classmethod
    def from_dict(cls, d: dict) -> CheckReport:
        return cls(**{k: v for k, v in d.items() if k != "passed"})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def summary_line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}"


@contextmanager
def timed(report: CheckReport):
    start = time.perf_counter()
    try:
        yield report
    finally:
        report.wall_time = time.perf_counter() - start


def fmt17(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt17(v) for v in row])
    return path


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(plain(obj), indent=2) + "\n")
    return path
