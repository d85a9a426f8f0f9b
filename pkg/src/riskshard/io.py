"""File formats: scenario CSV, measure JSON, balance-sheet JSON, allocation CSV."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import measures as ms
from .distortion import DistortionError
from .regulator import BalanceSheet
from .scenario import DiscreteDistribution, ScenarioError
from .sharing import Allocation

PROB_SUM_TOL = 1e-9


class InputError(ValueError):
    """Malformed user input; the message names the file and line when known."""


def _number(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise InputError(f"{where}: cannot parse {text!r} as a number") from None
    if not math.isfinite(v):
        raise InputError(f"{where}: value {text!r} is not finite")
    return v


def _distribution(values, probs, where: str) -> DiscreteDistribution:
    if not values:
        raise InputError(f"{where}: no scenarios")
    total = sum(probs)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise InputError(f"{where}: probabilities sum to {total!r}, expected 1 within {PROB_SUM_TOL}")
    try:
        return DiscreteDistribution(values, [p / total for p in probs])
    except ScenarioError as exc:
        raise InputError(f"{where}: {exc}") from None


def parse_scenarios(text: str, name: str = "<scenarios>") -> DiscreteDistribution:
    rows = list(csv.reader(text.splitlines()))
    if not rows or [c.strip() for c in rows[0]] != ["value", "probability"]:
        raise InputError(f"{name}:1: header must be 'value,probability'")
    values, probs = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        where = f"{name}:{lineno}"
        if len(row) != 2:
            raise InputError(f"{where}: expected 2 columns, got {len(row)}")
        v, p = _number(row[0].strip(), where), _number(row[1].strip(), where)
        if p < 0:
            raise InputError(f"{where}: negative probability {p!r}")
        values.append(v)
        probs.append(p)
    return _distribution(values, probs, name)


def read_scenarios(path) -> DiscreteDistribution:
    path = Path(path)
    return parse_scenarios(_read(path), str(path))


def parse_measures(obj, name: str = "<measures>") -> list[ms.RiskMeasure]:
    items = obj if isinstance(obj, list) else [obj]
    out = []
    for i, cfg in enumerate(items):
        if not isinstance(cfg, dict):
            raise InputError(f"{name}: entry {i} is not an object")
        try:
            out.append(ms.from_config(cfg))
        except (ms.MeasureError, DistortionError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{name}: entry {i}: {exc}") from None
    if not out:
        raise InputError(f"{name}: empty measure list")
    return out


def read_measures(path) -> list[ms.RiskMeasure]:
    path = Path(path)
    return parse_measures(_load_json(path), str(path))


def parse_balance_sheet(obj, name: str = "<balance-sheet>") -> BalanceSheet:
    try:
        a0 = _number(str(obj["A0"]), f"{name}: A0")
        l0 = _number(str(obj["L0"]), f"{name}: L0")
        entries = obj["scenarios"]
        values = [_number(str(s["E1"]), f"{name}: scenario {i} E1") for i, s in enumerate(entries)]
        probs = [_number(str(s["p"]), f"{name}: scenario {i} p") for i, s in enumerate(entries)]
    except (KeyError, TypeError) as exc:
        raise InputError(f"{name}: missing or malformed field {exc}") from None
    if any(p < 0 for p in probs):
        raise InputError(f"{name}: negative probability")
    return BalanceSheet(a0, l0, _distribution(values, probs, name))


def read_balance_sheet(path) -> BalanceSheet:
    path = Path(path)
    return parse_balance_sheet(_load_json(path), str(path))


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _load_json(path: Path):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None


def allocation_csv(alloc: Allocation) -> str:
    lines = ["part_index,u_left,u_right,value"]
    for i, a, b, v in alloc.rows():
        lines.append(f"{i},{float(a)!r},{float(b)!r},{float(v)!r}")
    return "\n".join(lines) + "\n"


def dumps(obj) -> str:
    """Deterministic JSON (sorted keys, repr-precision floats)."""
    return json.dumps(plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def plain(obj):
    """Convert numpy scalars and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
