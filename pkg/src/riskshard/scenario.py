"""Finite positions as step functions of a latent uniform coordinate.

A position X is stored as a :class:`QuantileProfile`: breakpoints
``0 = t0 < t1 < ... < tk = 1`` and a value on each half-open piece
``[t_{j-1}, t_j)``.  Every position in one computation lives on the same
coordinate ``u``, so sums and products are exact pointwise operations.

Quantiles follow the loss convention used throughout the package::

    var_at(X, lam) = inf{z : F_X(z) >= 1 - lam}

which is nonincreasing and right-continuous in ``lam`` and equals the
essential infimum for ``lam >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence, Union

import numpy as np

MERGE_TOL = 1e-12
SNAP_TOL = 1e-13
PROB_TOL = 1e-12


class ScenarioError(ValueError):
    """Invalid distribution or profile data."""


def _merge_close(points: np.ndarray, tol: float = MERGE_TOL) -> np.ndarray:
    keep = [points[0]]
    for p in points[1:]:
        if p - keep[-1] > tol:
            keep.append(p)
    return np.asarray(keep, dtype=float)


def _same_value(a: float, b: float) -> bool:
    return abs(a - b) <= MERGE_TOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """A law with finitely many atoms.

    Atoms are canonicalized on construction: sorted by value, duplicate
    values merged and probabilities renormalized to sum to one.
    """

    values: np.ndarray
    probabilities: np.ndarray

    def __init__(self, values: Iterable[float], probabilities: Iterable[float],
                 tol: float = PROB_TOL):
        v = np.asarray(list(values), dtype=float)
        p = np.asarray(list(probabilities), dtype=float)
        if v.ndim != 1 or v.shape != p.shape or v.size == 0:
            raise ScenarioError("values and probabilities must be nonempty 1-d arrays of equal length")
        if not np.all(np.isfinite(v)):
            raise ScenarioError("values must be finite")
        if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
            raise ScenarioError("probabilities must be positive")
        total = float(p.sum())
        if abs(total - 1.0) > tol:
            raise ScenarioError(f"probabilities sum to {total!r}, not 1")
        order = np.argsort(v, kind="stable")
        v, p = v[order], p[order] / total
        vals, probs = [v[0]], [p[0]]
        for vi, pi in zip(v[1:], p[1:]):
            if _same_value(vi, vals[-1]):
                probs[-1] += pi
            else:
                vals.append(vi)
                probs.append(pi)
        va = np.asarray(vals, dtype=float)
        pa = np.asarray(probs, dtype=float)
        va.flags.writeable = False
        pa.flags.writeable = False
        object.__setattr__(self, "values", va)
        object.__setattr__(self, "probabilities", pa)

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[float, float]], tol: float = PROB_TOL):
        atoms = list(atoms)
        return cls([a[0] for a in atoms], [a[1] for a in atoms], tol=tol)

    @classmethod
    def point_mass(cls, value: float) -> "DiscreteDistribution":
        return cls([value], [1.0])

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.probabilities.tolist()))

    def __len__(self) -> int:
        return int(self.values.size)

    def __repr__(self) -> str:
        return f"DiscreteDistribution({self.atoms!r})"

    def equals(self, other: "DiscreteDistribution", tol: float = 1e-12) -> bool:
        return (len(self) == len(other)
                and np.allclose(self.values, other.values, atol=tol, rtol=0)
                and np.allclose(self.probabilities, other.probabilities, atol=tol, rtol=0))

    def essinf(self) -> float:
        return float(self.values[0])

    def esssup(self) -> float:
        return float(self.values[-1])

    def mean(self) -> float:
        return float(np.dot(self.values, self.probabilities))

    def cdf(self, z: float) -> float:
        return float(self.probabilities[self.values <= z].sum())

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "DiscreteDistribution":
        """Law of ``fn(X)`` for a vectorized ``fn``."""
        return DiscreteDistribution(fn(self.values.copy()), self.probabilities)

    @cached_property
    def _upper(self) -> tuple[np.ndarray, np.ndarray]:
        # values in decreasing order with cumulative upper-tail mass
        desc = self.values[::-1].copy()
        cum = np.cumsum(self.probabilities[::-1])
        cum[-1] = 1.0
        return desc, cum

    def var_at(self, lam: float) -> float:
        if lam < 0:
            raise ScenarioError(f"quantile level must be >= 0, got {lam!r}")
        if lam >= 1.0:
            return self.essinf()
        desc, cum = self._upper
        j = int(np.searchsorted(cum, lam + SNAP_TOL, side="right"))
        return float(desc[min(j, desc.size - 1)])

    def integrated_var(self, lam: float) -> float:
        """``int_0^lam var_at(X, s) ds``; beyond 1 the integrand is essinf."""
        desc, cum = self._upper
        knots = np.concatenate(([0.0], cum))
        acc = np.concatenate(([0.0], np.cumsum(desc * np.diff(knots))))
        if lam >= 1.0:
            return float(acc[-1] + (lam - 1.0) * self.essinf())
        return float(np.interp(max(lam, 0.0), knots, acc))


@dataclass(frozen=True, eq=False)
class QuantileProfile:
    """Step function of the latent coordinate ``u`` in ``[0, 1)``."""

    breaks: np.ndarray
    values: np.ndarray

    def __init__(self, breaks: Sequence[float], values: Sequence[float]):
        b = np.asarray(breaks, dtype=float)
        v = np.asarray(values, dtype=float)
        if b.ndim != 1 or v.ndim != 1 or b.size != v.size + 1 or v.size == 0:
            raise ScenarioError("need k+1 breakpoints for k values")
        if abs(b[0]) > MERGE_TOL or abs(b[-1] - 1.0) > MERGE_TOL:
            raise ScenarioError("breakpoints must start at 0 and end at 1")
        if not np.all(np.isfinite(v)):
            raise ScenarioError("profile values must be finite")
        if np.any(np.diff(b) < -MERGE_TOL):
            raise ScenarioError("breakpoints must be increasing")
        b = b.copy()
        b[0], b[-1] = 0.0, 1.0
        # drop slivers narrower than the merge tolerance
        keep_b, keep_v = [0.0], []
        for j in range(v.size):
            right = b[j + 1]
            if j == v.size - 1:
                right = 1.0
            if right - keep_b[-1] > MERGE_TOL:
                keep_b.append(right)
                keep_v.append(v[j])
            elif j == v.size - 1:
                if not keep_v:
                    raise ScenarioError("profile has no piece of positive width")
                keep_b[-1] = 1.0
        b = np.asarray(keep_b)
        v = np.asarray(keep_v)
        b.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, c: float) -> "QuantileProfile":
        return cls([0.0, 1.0], [c])

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[float, float, float]]) -> "QuantileProfile":
        """Build from contiguous ``(u_left, u_right, value)`` triples."""
        pieces = list(pieces)
        breaks = [pieces[0][0]] + [p[1] for p in pieces]
        return cls(breaks, [p[2] for p in pieces])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breaks)

    @property
    def pieces(self) -> list[tuple[float, float, float]]:
        b = self.breaks.tolist()
        return [(b[j], b[j + 1], float(x)) for j, x in enumerate(self.values.tolist())]

    def __len__(self) -> int:
        return int(self.values.size)

    def __repr__(self) -> str:
        return f"QuantileProfile({self.pieces!r})"

    def __call__(self, u):
        idx = np.searchsorted(self.breaks, u, side="right") - 1
        idx = np.clip(idx, 0, self.values.size - 1)
        out = self.values[idx]
        return float(out) if np.ndim(out) == 0 else out

    @cached_property
    def law(self) -> DiscreteDistribution:
        return DiscreteDistribution(self.values, self.widths, tol=1e-9)

    def essinf(self) -> float:
        return float(self.values.min())

    def esssup(self) -> float:
        return float(self.values.max())

    def mean(self) -> float:
        return float(np.dot(self.values, self.widths))

    def simplify(self) -> "QuantileProfile":
        """Merge neighbouring pieces that carry the same value."""
        b, v = [0.0], []
        for j, x in enumerate(self.values):
            if v and x == v[-1]:
                b[-1] = self.breaks[j + 1]
            else:
                v.append(x)
                b.append(self.breaks[j + 1])
        return QuantileProfile(b, v)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "QuantileProfile":
        return QuantileProfile(self.breaks, fn(self.values.copy()))

    def refine(self, breaks: np.ndarray) -> np.ndarray:
        """Values on the pieces of a finer breakpoint grid."""
        breaks = np.asarray(breaks, dtype=float)
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        return self.values[np.clip(np.searchsorted(self.breaks, mids, side="right") - 1,
                                   0, self.values.size - 1)]

    def _binary(self, other, op) -> "QuantileProfile":
        if not isinstance(other, QuantileProfile):
            return QuantileProfile(self.breaks, op(self.values, float(other)))
        grid = _common_breaks([self, other])
        return QuantileProfile(grid, op(self.refine(grid), other.refine(grid)))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, c: float):
        return QuantileProfile(self.breaks, self.values / float(c))

    def __neg__(self):
        return QuantileProfile(self.breaks, -self.values)

    def minimum(self, other) -> "QuantileProfile":
        return self._binary(other, np.minimum)

    def maximum(self, other) -> "QuantileProfile":
        return self._binary(other, np.maximum)

    def allclose(self, other: "QuantileProfile", atol: float = 1e-12) -> bool:
        grid = _common_breaks([self, other])
        return bool(np.allclose(self.refine(grid), other.refine(grid), atol=atol, rtol=0))


Position = Union[QuantileProfile, DiscreteDistribution]


def _common_breaks(profiles: Sequence[QuantileProfile]) -> np.ndarray:
    pts = np.unique(np.concatenate([p.breaks for p in profiles]))
    grid = _merge_close(pts)
    grid[-1] = 1.0
    if grid.size == 1:
        grid = np.array([0.0, 1.0])
    return grid


def law_of(x: Position) -> DiscreteDistribution:
    if isinstance(x, DiscreteDistribution):
        return x
    if isinstance(x, QuantileProfile):
        return x.law
    raise TypeError(f"expected a profile or a distribution, got {type(x).__name__}")


def from_scenarios(dist: DiscreteDistribution) -> QuantileProfile:
    """Inverse-transform embedding ``u -> var_at(X, u)``.

    Atoms are laid out in decreasing order of value, each on a band whose
    width is its probability, so the result is nonincreasing in ``u``.
    """
    desc = dist.values[::-1]
    widths = dist.probabilities[::-1]
    breaks = np.concatenate(([0.0], np.cumsum(widths)))
    breaks[-1] = 1.0
    return QuantileProfile(breaks, desc)


def distribution_of(x: QuantileProfile) -> DiscreteDistribution:
    return x.law


def var_at(x: Position, lam: float) -> float:
    return law_of(x).var_at(lam)


def essinf(x: Position) -> float:
    return law_of(x).essinf() if isinstance(x, DiscreteDistribution) else x.essinf()


def esssup(x: Position) -> float:
    return law_of(x).esssup() if isinstance(x, DiscreteDistribution) else x.esssup()


def combine(profiles: Sequence[QuantileProfile], coefficients: Sequence[float]) -> QuantileProfile:
    if len(profiles) != len(coefficients) or not profiles:
        raise ScenarioError("need one coefficient per profile")
    grid = _common_breaks(profiles)
    total = np.zeros(grid.size - 1)
    for p, c in zip(profiles, coefficients):
        total = total + float(c) * p.refine(grid)
    return QuantileProfile(grid, total)


def band_indicator(a: float, b: float) -> QuantileProfile:
    """Profile equal to 1 on ``[a, b)`` and 0 elsewhere."""
    if a > b:
        raise ScenarioError(f"empty band needs a <= b, got ({a}, {b})")
    a, b = min(max(a, 0.0), 1.0), min(max(b, 0.0), 1.0)
    pieces = []
    if a > MERGE_TOL:
        pieces.append((0.0, a, 0.0))
    if b - a > MERGE_TOL:
        pieces.append((a if pieces else 0.0, b, 1.0))
    if 1.0 - (pieces[-1][1] if pieces else 0.0) > MERGE_TOL:
        pieces.append((pieces[-1][1] if pieces else 0.0, 1.0, 0.0))
    return QuantileProfile.from_pieces(pieces)


class PiecewiseLinear:
    """Continuous piecewise-linear function through ``(xs, ys)`` knots.

    Outside ``[xs[0], xs[-1]]`` the function is undefined and calling it
    raises :class:`ScenarioError`.
    """

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        if self.xs.size == 0 or self.xs.shape != self.ys.shape:
            raise ScenarioError("knots must be nonempty and aligned")
        if np.any(np.diff(self.xs) <= 0):
            raise ScenarioError("knot abscissae must be strictly increasing")

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def is_increasing(self) -> bool:
        return bool(np.all(np.diff(self.ys) >= -MERGE_TOL))

    def __call__(self, y):
        y_arr = np.asarray(y, dtype=float)
        lo, hi = self.domain
        slack = MERGE_TOL * max(1.0, abs(lo), abs(hi))
        if np.any(y_arr < lo - slack) or np.any(y_arr > hi + slack):
            raise ScenarioError(f"argument outside the domain [{lo}, {hi}]")
        if self.xs.size == 1:
            out = np.full_like(y_arr, self.ys[0])
        else:
            out = np.interp(y_arr, self.xs, self.ys)
        return float(out) if out.ndim == 0 else out

    def __repr__(self) -> str:
        return f"PiecewiseLinear(xs={self.xs.tolist()}, ys={self.ys.tolist()})"


def identity_map(lo: float, hi: float) -> PiecewiseLinear:
    if hi <= lo:
        return PiecewiseLinear([lo], [lo])
    return PiecewiseLinear([lo, hi], [lo, hi])


def apply_monotone(x: QuantileProfile, h: Union[PiecewiseLinear, Callable]) -> QuantileProfile:
    """Pointwise composition ``h(x)``; ``h`` must be increasing on the range of ``x``."""
    vals = np.unique(x.values)
    if isinstance(h, PiecewiseLinear):
        lo, hi = h.domain
        slack = MERGE_TOL * max(1.0, abs(lo), abs(hi))
        if vals[0] < lo - slack or vals[-1] > hi + slack:
            raise ScenarioError(f"profile range [{vals[0]}, {vals[-1]}] not inside [{lo}, {hi}]")
    image = np.asarray(h(vals), dtype=float)
    if np.any(np.diff(image) < -MERGE_TOL * max(1.0, float(np.abs(image).max()))):
        raise ScenarioError("map is not increasing on the range of the profile")
    return x.map(lambda v: np.asarray(h(v), dtype=float))


class Rearrangement:
    """Measure-preserving reordering of a profile into decreasing order.

    ``sorted`` is the nonincreasing profile with the same law; it plays the
    role of ``var_at(X, U)`` for a uniform ``U`` that is a function of the
    original coordinate.  ``pull_back`` maps any profile defined in the
    sorted coordinate back onto the original one.
    """

    def __init__(self, x: QuantileProfile):
        pieces = x.pieces
        order = sorted(range(len(pieces)), key=lambda j: (-pieces[j][2], j))
        start = 0.0
        targets = [0.0] * len(pieces)
        sorted_pieces = []
        for j in order:
            left, right, value = pieces[j]
            w = right - left
            targets[j] = start
            sorted_pieces.append((start, start + w, value))
            start += w
        self.source = x
        self._pieces = pieces
        self._targets = targets
        self.sorted = QuantileProfile.from_pieces(sorted_pieces)

    def pull_back(self, p: QuantileProfile) -> QuantileProfile:
        out = []
        for (left, right, _), s in zip(self._pieces, self._targets):
            w = right - left
            inner = p.breaks[(p.breaks > s + MERGE_TOL) & (p.breaks < s + w - MERGE_TOL)]
            cuts = np.concatenate(([s], inner, [s + w]))
            for a, b in zip(cuts[:-1], cuts[1:]):
                out.append((left + (a - s), left + (b - s), p(0.5 * (a + b))))
        fixed = []
        for k, (a, b, v) in enumerate(out):
            a = fixed[-1][1] if fixed else 0.0
            b = 1.0 if k == len(out) - 1 else b
            fixed.append((a, b, v))
        return QuantileProfile.from_pieces(fixed).simplify()


def is_nonincreasing(x: QuantileProfile) -> bool:
    return bool(np.all(np.diff(x.values) <= 0.0))


def check_finite(x: Position) -> None:
    vals = law_of(x).values
    if not all(math.isfinite(v) for v in vals.tolist()):
        raise ScenarioError("position has non-finite values")
