"""Verification report items and canonical serialization."""
from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from typing import Any, Iterator

import numpy as np

__all__ = ["item", "int_item", "timed", "Report", "dumps"]


def _plain(x: Any) -> Any:
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(np.real(x)), "im": float(np.imag(x))}
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    return x


def item(name: str, residual: float, tolerance: float, expected: Any = None,
         actual: Any = None, runtime_ms: float | None = None) -> dict[str, Any]:
    """Residual-based item: PASS iff ``residual <= tolerance``."""
    residual = float(residual)
    ok = math.isfinite(residual) and residual <= tolerance
    return {"name": name, "status": "PASS" if ok else "FAIL", "residual": residual,
            "expected": _plain(expected), "actual": _plain(actual), "runtime_ms": runtime_ms}


def int_item(name: str, expected: Any, actual: Any, runtime_ms: float | None = None) -> dict[str, Any]:
    """Exact-equality item (integers, tuples of integers, sets as sorted lists)."""
    ok = _plain(expected) == _plain(actual)
    return {"name": name, "status": "PASS" if ok else "FAIL", "residual": 0.0 if ok else 1.0,
            "expected": _plain(expected), "actual": _plain(actual), "runtime_ms": runtime_ms}


@contextmanager
def timed() -> Iterator[dict[str, float]]:
    box = {"ms": 0.0}
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        box["ms"] = (time.perf_counter() - t0) * 1e3


class Report:
    """Collection of items for one suite."""

    def __init__(self, suite: str, environment: dict[str, Any] | None = None):
        self.suite = suite
        self.items: list[dict[str, Any]] = []
        self.environment = dict(environment or {})

    def add(self, *items: dict[str, Any]) -> None:
        self.items.extend(items)

    def extend(self, items) -> None:
        self.items.extend(items)

    @property
    def passed(self) -> bool:
        return all(it["status"] != "FAIL" for it in self.items)

    def to_dict(self, timings: bool = False) -> dict[str, Any]:
        items = []
        for it in sorted(self.items, key=lambda x: x["name"]):
            it = dict(it)
            if not timings:
                it["runtime_ms"] = None
            items.append(it)
        return {"suite": self.suite, "items": items, "environment": self.environment,
                "status": "PASS" if self.passed else "FAIL"}

    def summary(self) -> str:
        lines = [f"{it['status']:4s}  {it['name']}  residual={it['residual']:.3g}" for it in
                 sorted(self.items, key=lambda x: x["name"])]
        lines.append(f"{self.suite}: {'PASS' if self.passed else 'FAIL'} "
                     f"({sum(it['status'] == 'PASS' for it in self.items)}/{len(self.items)})")
        return "\n".join(lines)


def _fmt(x: Any) -> Any:
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        # the shortest repr of a 12-digit rounded float has at most 12 digits
        return float(format(x, ".12g"))
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_fmt(v) for v in x]
    return x


def dumps(obj: dict[str, Any]) -> str:
    """Canonical JSON: sorted keys, floats with 12 significant digits."""
    return json.dumps(_fmt(_plain(obj)), sort_keys=True, indent=1) + "\n"
