"""Exhaustive grid search over two-entity splittings of a small position.

Independent of the closed-form constructions: it only evaluates the two
risk measures on every candidate split and keeps the minimum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .measures import RiskMeasure
from .scenario import MERGE_TOL, DiscreteDistribution, QuantileProfile, from_scenarios

DEFAULT_GRID = 0.25
DEFAULT_BOUND = 6.0
MAX_CANDIDATES = 20_000_000
CHUNK = 200_000


class OracleSizeError(ValueError):
    """The requested search space exceeds the configured guard."""


@dataclass
class OracleResult:
    value: float
    first_part: QuantileProfile
    second_part: QuantileProfile
    candidates: int
    grid: np.ndarray


def cell_values(x: QuantileProfile, cells: int) -> np.ndarray:
    edges = np.linspace(0.0, 1.0, cells + 1)
    for b in x.breaks[1:-1]:
        if np.min(np.abs(edges - b)) > MERGE_TOL:
            raise ValueError(f"position is not constant on {cells} equiprobable cells")
    return x.refine(edges)


def _tie_groups(values: np.ndarray) -> list[list[int]]:
    groups: dict[float, list[int]] = {}
    for i, v in enumerate(values.tolist()):
        groups.setdefault(v, []).append(i)
    return list(groups.values())


def _candidate_count(groups, grid_size: int) -> int:
    from math import comb
    total = 1
    for g in groups:
        total *= comb(grid_size + len(g) - 1, len(g))
    return total


def _candidates(groups, grid: np.ndarray, cells: int):
    # within a group of equal cells only nondecreasing assignments are kept;
    # permuting such cells leaves both laws unchanged
    tables = [np.array(list(itertools.combinations_with_replacement(range(grid.size), len(g))))
              for g in groups]
    shape = tuple(t.shape[0] for t in tables)
    total = int(np.prod(shape))
    for start in range(0, total, CHUNK):
        idx = np.unravel_index(np.arange(start, min(start + CHUNK, total)), shape)
        block = np.empty((idx[0].size, cells))
        for g, t, j in zip(groups, tables, idx):
            block[:, g] = grid[t[j]]
        yield block


def brute_force_infconv(x, measures: list[RiskMeasure], grid_step: float = DEFAULT_GRID,
                        bound: float = DEFAULT_BOUND, cells: int = 4,
                        max_candidates: int = MAX_CANDIDATES) -> OracleResult:
    """Minimum of ``rho1(X1) + rho2(X - X1)`` over grid-valued ``X1``.

    ``X`` must be constant on ``cells`` equiprobable cells; ``X1`` takes one
    grid value from ``[essinf X - bound, esssup X + bound]`` per cell.
    """
    if len(measures) != 2:
        raise ValueError("the oracle handles exactly two entities")
    if isinstance(x, DiscreteDistribution):
        x = from_scenarios(x)
    if grid_step <= 0 or bound < 0:
        raise ValueError("grid step must be positive and bound nonnegative")
    vals = cell_values(x, cells)
    lo, hi = float(vals.min()) - bound, float(vals.max()) + bound
    grid = lo + grid_step * np.arange(int(np.floor((hi - lo) / grid_step + 1e-9)) + 1)
    groups = _tie_groups(vals)
    count = _candidate_count(groups, grid.size)
    if count > max_candidates:
        raise OracleSizeError(f"{count} candidate splits exceed the limit of {max_candidates}")
    rho1, rho2 = measures
    best, best_row = np.inf, None
    for block in _candidates(groups, grid, cells):
        totals = rho1.evaluate_rows(block) + rho2.evaluate_rows(vals[None, :] - block)
        j = int(np.argmin(totals))
        if totals[j] < best:
            best, best_row = float(totals[j]), block[j].copy()
    edges = np.linspace(0.0, 1.0, cells + 1)
    first = QuantileProfile(edges, best_row)
    second = QuantileProfile(edges, vals - best_row)
    return OracleResult(best, first, second, count, grid)
