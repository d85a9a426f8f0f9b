"""Distribution-based monetary risk measures.

Losses count positive.  Every measure evaluates the law of its argument
only, so a :class:`~riskshard.scenario.QuantileProfile` and the
:class:`~riskshard.scenario.DiscreteDistribution` it induces give the same
number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from . import distortion as dist_mod
from .distortion import DistortionFunction
from .scenario import (
    SNAP_TOL,
    DiscreteDistribution,
    Position,
    QuantileProfile,
    ScenarioError,
    law_of,
)

VAR_TYPE_TOL = 1e-9


class MeasureError(ValueError):
    """Invalid measure configuration or failed evaluation."""


class RiskMeasure:
    """Base class; subclasses implement :meth:`_evaluate_law`."""

    kind = "abstract"

    def evaluate(self, x: Position) -> float:
        d = law_of(x)
        if not np.all(np.isfinite(d.values)):
            raise ScenarioError("risk measures need finite-valued positions")
        return self._evaluate_law(d)

    __call__ = evaluate

    def _evaluate_law(self, d: DiscreteDistribution) -> float:
        raise NotImplementedError

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        """Vectorized risk of positions given on equiprobable cells (one per row)."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        k = rows.shape[1]
        return np.array([self._evaluate_law(DiscreteDistribution(r, np.full(k, 1.0 / k)))
                         for r in rows])

    def config(self) -> dict:
        raise NotImplementedError

    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class DistortionMeasure(RiskMeasure):
    g: DistortionFunction
    kind = "distortion"

    def _evaluate_law(self, d: DiscreteDistribution) -> float:
        return dist_mod.mixture_eval(self.g, d)

    def choquet(self, x: Position) -> float:
        return dist_mod.choquet_eval(self.g, x)

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        return dist_mod.evaluate_on_equal_cells(self.g, rows)

    @property
    def parameter(self) -> float:
        return dist_mod.parameter(self.g)

    def config(self) -> dict:
        return self.g.to_config()

    def label(self) -> str:
        return self.g.name or "distortion"


@dataclass(frozen=True)
class Entropic(RiskMeasure):
    """``log E exp(X)``."""

    kind = "entropic"

    def _evaluate_law(self, d: DiscreteDistribution) -> float:
        top = d.esssup()
        return float(top + math.log(np.dot(d.probabilities, np.exp(d.values - top))))

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        top = rows.max(axis=1)
        return top + np.log(np.mean(np.exp(rows - top[:, None]), axis=1))

    def config(self) -> dict:
        return {"kind": "entropic"}


@dataclass(frozen=True)
class Expectile(RiskMeasure):
    """Capital requirement of the acceptance set ``E(X^-) / E(X^+) >= gamma``.

    Solved by bisection on the strictly increasing gap
    ``E((X-m)^-) - gamma * E((X-m)^+)``; a zero upper part counts as
    acceptable.
    """

    gamma: float
    kind = "expectile"

    def __post_init__(self):
        if not self.gamma > 0:
            raise MeasureError(f"expectile needs gamma > 0, got {self.gamma}")

    def gap(self, d: DiscreteDistribution, m: float) -> float:
        z = d.values - m
        neg = float(np.dot(d.probabilities, np.maximum(-z, 0.0)))
        pos = float(np.dot(d.probabilities, np.maximum(z, 0.0)))
        return neg - self.gamma * pos

    def accepts(self, x: Position, m: float) -> bool:
        """Whether ``X - m`` lies in the acceptance set."""
        d = law_of(x)
        z = d.values - m
        pos = float(np.dot(d.probabilities, np.maximum(z, 0.0)))
        if pos == 0.0:
            return True
        neg = float(np.dot(d.probabilities, np.maximum(-z, 0.0)))
        return neg / pos >= self.gamma

    def _evaluate_law(self, d: DiscreteDistribution) -> float:
        lo, hi = d.essinf() - 1.0, d.esssup() + 1.0
        f_lo, f_hi = self.gap(d, lo), self.gap(d, hi)
        if not (f_lo < 0.0 < f_hi):
            raise MeasureError(f"expectile bracket [{lo}, {hi}] does not enclose the root "
                               f"(gaps {f_lo}, {f_hi})")
        return float(bisect(lambda m: self.gap(d, m), lo, hi, xtol=1e-12, maxiter=200))

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        lo = rows.min(axis=1) - 1.0
        hi = rows.max(axis=1) + 1.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            z = rows - mid[:, None]
            g = np.mean(np.maximum(-z, 0.0), axis=1) - self.gamma * np.mean(np.maximum(z, 0.0), axis=1)
            up = g >= 0.0
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
            if np.max(hi - lo) < 1e-12:
                break
        return 0.5 * (lo + hi)

    def config(self) -> dict:
        return {"kind": "expectile", "gamma": self.gamma}

    def label(self) -> str:
        return f"expectile({self.gamma:g})"


@dataclass(frozen=True)
class Truncated(RiskMeasure):
    """``base`` applied to X capped above at its V@R at level ``alpha``."""

    base: RiskMeasure
    alpha: float
    kind = "truncated"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise MeasureError(f"truncation level must lie in (0, 1), got {self.alpha}")

    def _evaluate_law(self, d: DiscreteDistribution) -> float:
        q = d.var_at(self.alpha)
        return self.base._evaluate_law(d.map(lambda v: np.minimum(v, q)))

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        k = rows.shape[1]
        desc = -np.sort(-rows, axis=1)
        cum = np.arange(1, k + 1) / k
        j = min(int(np.searchsorted(cum, self.alpha + SNAP_TOL, side="right")), k - 1)
        return self.base.evaluate_rows(np.minimum(rows, desc[:, j:j + 1]))

    def config(self) -> dict:
        return {"kind": "truncated", "alpha": self.alpha, "base": self.base.config()}

    def label(self) -> str:
        return f"truncated({self.base.label()},{self.alpha:g})"


def distortion(g: DistortionFunction | dict) -> DistortionMeasure:
    return DistortionMeasure(dist_mod.coerce(g))


def from_config(cfg: dict) -> RiskMeasure:
    kind = cfg.get("kind")
    if kind in ("var", "avar", "rvar", "piecewise"):
        return DistortionMeasure(dist_mod.from_config(cfg))
    if kind == "entropic":
        return Entropic()
    try:
        if kind == "expectile":
            return Expectile(float(cfg["gamma"]))
        if kind == "truncated":
            return Truncated(from_config(cfg["base"]), float(cfg["alpha"]))
    except KeyError as exc:
        raise MeasureError(f"measure config {kind!r} is missing {exc}") from None
    raise MeasureError(f"unknown measure kind {kind!r}")


def evaluate(rho: RiskMeasure, x: Position) -> float:
    return rho.evaluate(x)


def truncate_at_var(x: Position, alpha: float):
    """``X 1{V@R_alpha(X) >= X} + V@R_alpha(X) 1{V@R_alpha(X) < X}``, i.e. ``min(X, V@R_alpha(X))``."""
    q = law_of(x).var_at(alpha)
    if isinstance(x, QuantileProfile):
        return x.minimum(q)
    return x.map(lambda v: np.minimum(v, q))


def structural_var_type_parameter(rho: RiskMeasure) -> float | None:
    """Largest level at which ``rho`` is known to be V@R-type without witnesses."""
    if isinstance(rho, DistortionMeasure) and rho.g.proper:
        a = dist_mod.parameter(rho.g)
        return a if a > 0 else None
    if isinstance(rho, Truncated):
        inner = structural_var_type_parameter(rho.base)
        return max(rho.alpha, inner) if inner is not None else rho.alpha
    return None


def default_witnesses() -> list[DiscreteDistribution]:
    rng = np.random.default_rng(7)
    out = [
        DiscreteDistribution([0.0, 10.0], [0.95, 0.05]),
        DiscreteDistribution([-1.0, 0.0, 1.0, 50.0], [0.3, 0.3, 0.3, 0.1]),
        DiscreteDistribution([np.log(10.0), 0.0], [0.1, 0.9]),
    ]
    for _ in range(5):
        k = int(rng.integers(2, 12))
        p = rng.dirichlet(np.ones(k))
        out.append(DiscreteDistribution(rng.normal(0.0, 3.0, k), p))
    return out


def is_var_type(rho: RiskMeasure, alpha: float, witnesses: Sequence[Position] = ()) -> bool:
    """Check ``rho(X) == rho(min(X, V@R_alpha(X)))``.

    Distortion measures with parameter at least ``alpha`` and truncations at
    level at least ``alpha`` pass structurally.  Anything else is tested on
    the witnesses (plus a fixed battery), which can refute but never prove
    the property.
    """
    if alpha <= 0:
        raise MeasureError("V@R-type parameter must be positive")
    known = structural_var_type_parameter(rho)
    if known is not None and known >= alpha - 1e-12:
        return True
    for w in list(witnesses) + default_witnesses():
        if abs(rho.evaluate(w) - rho.evaluate(truncate_at_var(w, alpha))) > VAR_TYPE_TOL:
            return False
    return True


def withdraw_surplus(x: Position, alpha: float, m: float):
    """``X - m 1{V@R_{1-alpha}(X) >= X}``."""
    q = law_of(x).var_at(1.0 - alpha)
    return x.map(lambda v: np.where(v <= q, v - m, v))


def surplus_profile(rho: RiskMeasure, x: Position, alpha: float,
                    ms: Sequence[float]) -> list[tuple[float, float]]:
    if not 0.0 < alpha < 1.0:
        raise MeasureError(f"surplus level must lie in (0, 1), got {alpha}")
    return [(float(m), rho.evaluate(withdraw_surplus(x, alpha, m))) for m in ms]


def is_strongly_surplus_sensitive_distortion(g: DistortionFunction, level: float | None = None) -> bool:
    """True iff ``g(x) < 1`` for every ``x < 1``; the level plays no role."""
    if not g.proper:
        raise dist_mod.DistortionError("surplus sensitivity is checked for proper distortions")
    last = g.segments[-1]
    if last.y0 >= 1.0 - dist_mod.VALUE_TOL:
        return False
    return all(s.y1 < 1.0 - dist_mod.VALUE_TOL for s in g.segments[:-1])


def is_strongly_surplus_sensitive(rho: RiskMeasure, level: float,
                                  ms: Sequence[float] = (1e2, 1e3, 1e4)) -> bool:
    """Structural for distortions; otherwise a numerical slope test.

    The numerical test withdraws ``m`` from the lowest ``level`` fraction of
    a uniform grid position and requires the risk to fall at a nonvanishing
    linear rate, which bounded-below profiles such as the entropic one fail.
    """
    if isinstance(rho, DistortionMeasure):
        return is_strongly_surplus_sensitive_distortion(rho.g, level)
    k = 200
    witness = DiscreteDistribution(np.arange(k) / k, np.full(k, 1.0 / k))
    hs = [h for _, h in surplus_profile(rho, witness, level, ms)]
    if not all(b < a for a, b in zip(hs, hs[1:])):
        return False
    slopes = [(hs[i + 1] - hs[i]) / (ms[i + 1] - ms[i]) for i in range(len(ms) - 1)]
    return slopes[-1] < -1e-3 * level
