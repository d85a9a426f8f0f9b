"""Distortion functions and the two evaluators of distortion risk measures.

A :class:`DistortionFunction` is a left-continuous, nondecreasing,
piecewise-linear function on ``[0, 1]`` with upward jumps allowed at
segment boundaries.  Each segment covers ``(x0, x1]`` and is linear from
its right-limit ``y0`` at ``x0`` to its value ``y1`` at ``x1``; the value
at ``x1`` belongs to the segment, which makes left-continuity structural.

Two independent evaluators are provided:

* :func:`choquet_eval` integrates layers of the distorted survival function;
* :func:`mixture_eval` integrates the quantile function against the
  Lebesgue-Stieltjes measure ``g(dlam)``.

They agree for every left-continuous ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .scenario import (
    MERGE_TOL,
    SNAP_TOL,
    DiscreteDistribution,
    Position,
    law_of,
)

VALUE_TOL = 1e-12


class DistortionError(ValueError):
    """Invalid distortion function or parameter."""


@dataclass(frozen=True)
class Segment:
    x0: float
    x1: float
    y0: float
    y1: float

    @property
    def slope(self) -> float:
        return (self.y1 - self.y0) / (self.x1 - self.x0)

    def at(self, x):
        return self.y0 + self.slope * (np.asarray(x, dtype=float) - self.x0)


class DistortionFunction:
    """Left-continuous nondecreasing piecewise-linear ``g`` with ``g(0) = 0``."""

    def __init__(self, segments: Iterable[Segment | tuple], name: str | None = None,
                 config: dict | None = None):
        segs = [s if isinstance(s, Segment) else Segment(*map(float, s)) for s in segments]
        if not segs:
            raise DistortionError("a distortion function needs at least one segment")
        if abs(segs[0].x0) > MERGE_TOL or abs(segs[-1].x1 - 1.0) > MERGE_TOL:
            raise DistortionError("segments must cover (0, 1]")
        prev_y = 0.0
        prev_x = 0.0
        for s in segs:
            if abs(s.x0 - prev_x) > MERGE_TOL:
                raise DistortionError(f"segments are not contiguous at {prev_x}")
            if s.x1 - s.x0 <= MERGE_TOL:
                raise DistortionError(f"degenerate segment ({s.x0}, {s.x1}]")
            if s.y1 < s.y0 - VALUE_TOL:
                raise DistortionError(f"negative slope on ({s.x0}, {s.x1}]")
            if s.y0 < prev_y - VALUE_TOL:
                raise DistortionError(f"downward jump at {s.x0}")
            prev_y, prev_x = s.y1, s.x1
        if prev_y > 1.0 + VALUE_TOL:
            raise DistortionError(f"g(1) = {prev_y} exceeds 1")
        self.segments: tuple[Segment, ...] = tuple(segs)
        self.name = name
        self._config = config
        self._x1 = np.array([s.x1 for s in segs])

    # evaluation -----------------------------------------------------------

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        flat = np.atleast_1d(xa)
        out = np.zeros(flat.shape)
        for k, xv in enumerate(flat):
            out[k] = self._value(float(xv))
        return float(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)

    def _value(self, x: float) -> float:
        if x <= SNAP_TOL:
            return 0.0
        if x >= 1.0:
            return self.segments[-1].y1
        j = int(np.searchsorted(self._x1, x - SNAP_TOL, side="left"))
        s = self.segments[min(j, len(self.segments) - 1)]
        if abs(x - s.x1) <= SNAP_TOL:
            return s.y1
        return float(s.at(x))

    def right_limit(self, x: float) -> float:
        """``g(x+)``; equal to ``g(1)`` at the right end."""
        if x >= 1.0 - SNAP_TOL:
            return self.segments[-1].y1
        for s in self.segments:
            if abs(x - s.x0) <= SNAP_TOL:
                return s.y0
            if s.x0 < x < s.x1:
                return float(s.at(x))
        return self.segments[-1].y1

    @property
    def total(self) -> float:
        return self.segments[-1].y1

    @property
    def proper(self) -> bool:
        return abs(self.total - 1.0) <= VALUE_TOL

    @property
    def improper(self) -> bool:
        return not self.proper

    @property
    def knots(self) -> np.ndarray:
        return np.array([0.0] + [s.x1 for s in self.segments])

    def jumps(self) -> list[tuple[float, float]]:
        out, prev = [], 0.0
        for s in self.segments:
            if s.y0 - prev > VALUE_TOL:
                out.append((s.x0, s.y0 - prev))
            prev = s.y1
        return out

    def simplify(self) -> "DistortionFunction":
        """Merge neighbouring collinear segments without a jump between them."""
        merged = [self.segments[0]]
        for s in self.segments[1:]:
            last = merged[-1]
            if abs(s.y0 - last.y1) <= VALUE_TOL and abs(s.slope - last.slope) <= 1e-9 * max(1.0, abs(last.slope)):
                merged[-1] = Segment(last.x0, s.x1, last.y0, s.y1)
            else:
                merged.append(s)
        return DistortionFunction(merged, name=self.name, config=self._config)

    def to_config(self) -> dict:
        if self._config is not None:
            return dict(self._config)
        segs, prev = [], 0.0
        for s in self.segments:
            segs.append({"x0": s.x0, "x1": s.x1, "y_right": s.y1, "jump_before": s.y0 - prev})
            prev = s.y1
        return {"kind": "piecewise", "segments": segs}

    def __repr__(self) -> str:
        if self.name:
            return f"DistortionFunction<{self.name}>"
        body = ", ".join(f"({s.x0:g},{s.x1:g}]:{s.y0:g}->{s.y1:g}" for s in self.segments)
        return f"DistortionFunction[{body}]"


# constructors -------------------------------------------------------------

def make_var(alpha: float) -> DistortionFunction:
    if not 0.0 < alpha < 1.0:
        raise DistortionError(f"V@R level must lie in (0, 1), got {alpha}")
    return DistortionFunction([(0.0, alpha, 0.0, 0.0), (alpha, 1.0, 1.0, 1.0)],
                              name=f"var({alpha:g})", config={"kind": "var", "alpha": alpha})


def make_avar(beta: float) -> DistortionFunction:
    if not 0.0 < beta <= 1.0:
        raise DistortionError(f"AV@R level must lie in (0, 1], got {beta}")
    segs = [(0.0, beta, 0.0, 1.0)]
    if beta < 1.0:
        segs.append((beta, 1.0, 1.0, 1.0))
    return DistortionFunction(segs, name=f"avar({beta:g})", config={"kind": "avar", "beta": beta})


def make_rvar(alpha: float, beta: float) -> DistortionFunction:
    if alpha <= 0.0 or beta <= 0.0 or alpha + beta > 1.0 + MERGE_TOL:
        raise DistortionError(f"RV@R needs alpha, beta > 0 and alpha + beta <= 1, got ({alpha}, {beta})")
    top = min(alpha + beta, 1.0)
    segs = [(0.0, alpha, 0.0, 0.0), (alpha, top, 0.0, 1.0)]
    if top < 1.0:
        segs.append((top, 1.0, 1.0, 1.0))
    return DistortionFunction(segs, name=f"rvar({alpha:g},{beta:g})",
                              config={"kind": "rvar", "alpha": alpha, "beta": beta})


def zero_distortion() -> DistortionFunction:
    return DistortionFunction([(0.0, 1.0, 0.0, 0.0)], name="zero")


def from_config(cfg: dict) -> DistortionFunction:
    kind = cfg.get("kind")
    try:
        if kind == "var":
            return make_var(float(cfg["alpha"]))
        if kind == "avar":
            return make_avar(float(cfg["beta"]))
        if kind == "rvar":
            return make_rvar(float(cfg["alpha"]), float(cfg["beta"]))
        if kind == "piecewise":
            segs, prev = [], 0.0
            for item in cfg["segments"]:
                y0 = prev + float(item.get("jump_before", 0.0))
                y1 = float(item["y_right"])
                segs.append((float(item["x0"]), float(item["x1"]), y0, y1))
                prev = y1
            return DistortionFunction(segs)
    except KeyError as exc:
        raise DistortionError(f"distortion config {kind!r} is missing {exc}") from None
    raise DistortionError(f"unknown distortion kind {kind!r}")


# parameter and active part ------------------------------------------------

def parameter(g: DistortionFunction) -> float:
    """Length of the initial interval on which ``g`` vanishes."""
    if not g.proper:
        raise DistortionError("the parameter is defined for proper distortion functions only")
    for s in g.segments:
        if s.y1 > VALUE_TOL:
            alpha = s.x0
            break
    else:  # pragma: no cover - a proper g reaches 1
        raise DistortionError("g vanishes identically")
    assert g(alpha) <= VALUE_TOL and g.right_limit(alpha) >= 0.0
    return alpha


def active_part(g: DistortionFunction) -> DistortionFunction:
    """``x -> g(x + alpha)`` on ``[0, 1 - alpha]``, continued by 1."""
    alpha = parameter(g)
    segs = [Segment(s.x0 - alpha, s.x1 - alpha, s.y0, s.y1)
            for s in g.segments if s.x0 >= alpha - MERGE_TOL]
    segs[0] = Segment(0.0, segs[0].x1, segs[0].y0, segs[0].y1)
    if alpha > MERGE_TOL:
        segs.append(Segment(1.0 - alpha, 1.0, 1.0, 1.0))
    return DistortionFunction(segs)


def is_concave_active_part(g: DistortionFunction, tol: float = 1e-12) -> bool:
    """Concavity of the active part on ``(0, 1 - alpha]``.

    A jump at ``0+`` is allowed (a concave function may sit below its
    right limit at the boundary); any upward jump further in, or an
    increase of slope, fails.
    """
    segs = active_part(g).segments
    for prev, cur in zip(segs, segs[1:]):
        if cur.y0 - prev.y1 > tol:
            return False
        if cur.slope > prev.slope + tol * max(1.0, abs(prev.slope)):
            return False
    return True


# Stieltjes measure ---------------------------------------------------------

@dataclass(frozen=True)
class StieltjesMeasure:
    """Measure ``g(dlam)`` on ``[0, 1]``: piecewise-constant density plus atoms.

    Conventions: ``mu([a, b)) = g(b) - g(a)`` and the atom at ``x`` is
    ``g(x+) - g(x)``.
    """

    density: tuple[tuple[float, float, float], ...]
    atoms: tuple[tuple[float, float], ...]

    def total(self) -> float:
        return sum(r * (b - a) for a, b, r in self.density) + sum(m for _, m in self.atoms)

    def restrict(self, lo: float, hi: float) -> "StieltjesMeasure":
        """Restriction to the half-open interval ``[lo, hi)``."""
        dens = []
        for a, b, r in self.density:
            a2, b2 = max(a, lo), min(b, hi)
            if b2 - a2 > 0:
                dens.append((a2, b2, r))
        atoms = tuple((x, m) for x, m in self.atoms if lo - SNAP_TOL <= x < hi - SNAP_TOL)
        return StieltjesMeasure(tuple(dens), atoms)

    def integrate_var(self, x: Position, shift: float = 0.0) -> float:
        """``int var_at(X, lam + shift) mu(dlam)`` in closed form."""
        dist = law_of(x)
        total = 0.0
        for loc, mass in self.atoms:
            total += mass * dist.var_at(loc + shift)
        for a, b, rate in self.density:
            if rate:
                total += rate * (dist.integrated_var(b + shift) - dist.integrated_var(a + shift))
        return total


def stieltjes_of(g: DistortionFunction) -> StieltjesMeasure:
    dens = tuple((s.x0, s.x1, s.slope) for s in g.segments if s.slope > 0.0)
    return StieltjesMeasure(dens, tuple(g.jumps()))


# evaluators -------------------------------------------------------------------

def mixture_eval(g: DistortionFunction, x: Position) -> float:
    """``int_[0,1] var_at(X, lam) g(dlam)``."""
    return stieltjes_of(g).integrate_var(x)


def choquet_eval(g: DistortionFunction, x: Position) -> float:
    """Choquet integral of X with respect to the set function ``A -> g(P[A])``."""
    dist: DiscreteDistribution = law_of(x)
    v, p = dist.values, dist.probabilities
    # survival[j] = P(X > v_j)
    tail = np.cumsum(p[::-1])[::-1]
    survival = np.append(tail[1:], 0.0)
    gs = g(survival[:-1]) if v.size > 1 else np.zeros(0)
    return float(g.total * v[0] + np.dot(gs, np.diff(v)))


def evaluate_on_equal_cells(g: DistortionFunction, rows: np.ndarray) -> np.ndarray:
    """Risk of each row of ``rows`` viewed as a position on equiprobable cells."""
    rows = np.atleast_2d(rows)
    k = rows.shape[1]
    levels = g(np.arange(k + 1) / k)
    weights = np.diff(levels)
    desc = -np.sort(-rows, axis=1)
    return desc @ weights


def coerce(g: DistortionFunction | dict) -> DistortionFunction:
    return g if isinstance(g, DistortionFunction) else from_config(g)


def pointwise_min(fs: Sequence[DistortionFunction]) -> DistortionFunction:
    """Exact lower envelope of piecewise-linear left-continuous functions.

    Crossings of linear pieces are solved analytically, so the envelope is
    again piecewise linear with the correct left-continuous values.
    """
    if len(fs) == 1:
        return fs[0]
    knots = np.unique(np.concatenate([f.knots for f in fs]))
    pts = [knots[0]]
    for k in knots[1:]:
        if k - pts[-1] > MERGE_TOL:
            pts.append(k)
    pts[-1] = 1.0
    segs: list[Segment] = []
    for a, b in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (a + b)
        lines = []
        for f in fs:
            s = _segment_at(f, mid)
            lines.append((s.y0 + s.slope * (a - s.x0), s.slope))  # (value at a+, slope)
        cuts = {a, b}
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                (ci, si), (cj, sj) = lines[i], lines[j]
                if si != sj:
                    t = a + (cj - ci) / (si - sj)
                    if a + MERGE_TOL < t < b - MERGE_TOL:
                        cuts.add(t)
        cuts = sorted(cuts)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            m = 0.5 * (lo + hi)
            best = min(range(len(lines)), key=lambda i: (lines[i][0] + lines[i][1] * (m - a), i))
            c, sl = lines[best]
            y0 = min(l[0] + l[1] * (lo - a) for l in lines) if lo == a else c + sl * (lo - a)
            y1 = c + sl * (hi - a)
            if hi == b:
                y1 = min(l[0] + l[1] * (b - a) for l in lines)
            segs.append(Segment(lo, hi, y0, max(y1, y0)))
    return DistortionFunction(segs).simplify()


def _segment_at(f: DistortionFunction, x: float) -> Segment:
    for s in f.segments:
        if s.x0 <= x <= s.x1:
            return s
    return f.segments[-1]
