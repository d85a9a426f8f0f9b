"""Risk-sharing allocations for networks of distortion and V@R-type measures.

All constructions are carried out on the decreasing rearrangement of the
total position ``X`` (where ``X = var_at(X, U)`` holds literally) and then
pulled back to the caller's latent coordinate, so every allocation sums to
``X`` pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import distortion as dm
from .distortion import DistortionFunction, Segment
from .measures import (
    DistortionMeasure,
    RiskMeasure,
    is_strongly_surplus_sensitive,
    is_var_type,
)
from .scenario import (
    MERGE_TOL,
    DiscreteDistribution,
    PiecewiseLinear,
    QuantileProfile,
    Rearrangement,
    apply_monotone,
    band_indicator,
    combine,
    from_scenarios,
)

TIE_TOL = 1e-12


class HypothesisError(ValueError):
    """A construction was requested outside the regime where it applies."""

    def __init__(self, message: str, condition: str):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True, eq=False)
class Allocation:
    """Parts on a shared latent coordinate that add up to ``total``."""

    parts: tuple[QuantileProfile, ...]
    total: QuantileProfile

    def __post_init__(self):
        scale = max(1.0, float(np.abs(self.total.values).max()))
        if not combine(list(self.parts), [1.0] * len(self.parts)).allclose(self.total, atol=1e-12 * scale):
            raise ValueError("allocation parts do not sum to the total position")

    def __len__(self) -> int:
        return len(self.parts)

    def rows(self) -> list[tuple[int, float, float, float]]:
        """``(part_index, u_left, u_right, value)`` with 1-based part indices."""
        return [(i + 1, a, b, v) for i, p in enumerate(self.parts) for a, b, v in p.pieces]

    def bounds(self) -> list[tuple[float, float]]:
        return [(p.essinf(), p.esssup()) for p in self.parts]


@dataclass
class SharingResult:
    allocation: Allocation
    predicted_total: float
    part_risks: list[float]
    regime: str
    relation: str = "equal"  # or "upper_bound"
    hypotheses: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def realized_total(self) -> float:
        return float(sum(self.part_risks))

    @property
    def discrepancy(self) -> float:
        return self.realized_total - self.predicted_total

    def consistent(self, tol: float = 1e-9) -> bool:
        if self.relation == "upper_bound":
            return self.realized_total <= self.predicted_total + tol
        return abs(self.discrepancy) <= tol


class CombinedDistortion(NamedTuple):
    f: DistortionFunction
    g: DistortionFunction
    d: float


def _as_distortions(gs) -> list[DistortionFunction]:
    out = []
    for g in gs:
        if isinstance(g, DistortionMeasure):
            g = g.g
        g = dm.coerce(g)
        if not g.proper:
            raise HypothesisError("network distortion functions must satisfy g(1) = 1", "proper distortion")
        out.append(g)
    if not out:
        raise ValueError("need at least one distortion function")
    return out


def parameters(gs) -> list[float]:
    return [dm.parameter(g) for g in _as_distortions(gs)]


def combined_g(gs) -> CombinedDistortion:
    """Lower envelope ``f`` of the active parts and its shift ``g`` by ``d``."""
    gs = _as_distortions(gs)
    d = float(sum(dm.parameter(g) for g in gs))
    f = dm.pointwise_min([dm.active_part(g) for g in gs])
    if d >= 1.0 - MERGE_TOL:
        return CombinedDistortion(f, dm.zero_distortion(), d)
    if d <= MERGE_TOL:
        return CombinedDistortion(f, f, d)
    segs = [Segment(0.0, d, 0.0, 0.0)]
    for s in f.segments:
        if s.x0 >= 1.0 - d - MERGE_TOL:
            break
        x1 = min(s.x1, 1.0 - d)
        segs.append(Segment(s.x0 + d, x1 + d, s.y0, float(s.at(x1))))
    segs[-1] = Segment(segs[-1].x0, 1.0, segs[-1].y0, segs[-1].y1)
    return CombinedDistortion(f, DistortionFunction(segs), d)


class SelectorSystem:
    """Winner selection among the active parts.

    ``r_i(lam) = 1`` exactly when ``i`` is the first index whose active part
    attains the envelope at ``1 - lam``.  ``regions`` lists the open
    ``lam``-intervals with constant winner (breakpoints have measure zero),
    and ``R[i](y)`` integrates ``r_i`` over ``[0, y]``.
    """

    def __init__(self, gs):
        self.gs = _as_distortions(gs)
        self.actives = [dm.active_part(g) for g in self.gs]
        self.f = dm.pointwise_min(self.actives)
        pts = np.unique(np.concatenate([a.knots for a in self.actives] + [self.f.knots]))
        xs = [pts[0]]
        for p in pts[1:]:
            if p - xs[-1] > MERGE_TOL:
                xs.append(p)
        xs[-1] = 1.0
        regions = []
        for a, b in zip(xs[:-1], xs[1:]):
            regions.append((1.0 - b, 1.0 - a, self.winner_at_level(0.5 * (a + b))))
        regions.sort()
        self.regions: list[tuple[float, float, int]] = regions
        lam_knots = [0.0] + [r[1] for r in regions]
        self.R = []
        for i in range(len(self.gs)):
            acc = [0.0]
            for lo, hi, w in regions:
                acc.append(acc[-1] + (hi - lo if w == i else 0.0))
            self.R.append(PiecewiseLinear(lam_knots, acc))

    def __len__(self) -> int:
        return len(self.gs)

    @property
    def breakpoints(self) -> list[float]:
        return sorted({0.0, 1.0, *[r[0] for r in self.regions]})

    def winner_at_level(self, s: float) -> int:
        """First index whose active part is minimal at ``s``."""
        vals = [a(s) for a in self.actives]
        low = min(vals)
        return next(i for i, v in enumerate(vals) if v <= low + TIE_TOL)

    def r(self, i: int, lam: float) -> int:
        return int(self.winner_at_level(1.0 - lam) == i)

    def transfer_functions(self, law: DiscreteDistribution) -> list[PiecewiseLinear]:
        """Comonotone layer split of a nonnegative position with the given law.

        The layer ``[s, s + ds)`` goes to the winner at the survival level
        ``P(Z > s)``, i.e. ``R_i(y) = int_0^y r_i(F_Z(s)) ds``.
        """
        vals = law.values
        if vals[0] < -MERGE_TOL:
            raise ValueError("transfer functions need a nonnegative position")
        knots = np.concatenate(([0.0], vals[vals > MERGE_TOL]))
        probs = law.probabilities
        acc = np.zeros((len(self.gs), knots.size))
        for j in range(knots.size - 1):
            level = float(probs[vals >= knots[j + 1] - MERGE_TOL].sum())
            w = self.winner_at_level(level)
            acc[:, j + 1] = acc[:, j]
            acc[w, j + 1] += knots[j + 1] - knots[j]
        return [PiecewiseLinear(knots, acc[i]) for i in range(len(self.gs))]


def build_selectors(gs) -> SelectorSystem:
    return SelectorSystem(gs)


def _normalize(x: QuantileProfile | DiscreteDistribution) -> QuantileProfile:
    if isinstance(x, DiscreteDistribution):
        return from_scenarios(x)
    return x


def _band_bounds(alphas: Sequence[float]) -> list[tuple[float, float]]:
    cum = np.concatenate(([0.0], np.cumsum(alphas)))
    return [(min(cum[i], 1.0), min(cum[i + 1], 1.0)) for i in range(len(alphas))]


def upper_bound(x, gs) -> float:
    """Closed-form total risk attained by :func:`build_main_allocation`."""
    x = _normalize(x)
    comb = combined_g(gs)
    e = x.essinf()
    return dm.mixture_eval(comb.g, x - e) + e


def build_main_allocation(x, gs) -> SharingResult:
    """Allocation attaining the closed-form bound for distortion measures.

    Each entity ``i`` takes the worst states on its own band of width
    ``alpha_i`` (which its measure ignores), the remaining part ``Y 1{U >= d}``
    is split comonotonically by layer winners, and the best-case constant is
    spread evenly.
    """
    x = _normalize(x)
    gs = _as_distortions(gs)
    n = len(gs)
    alphas = [dm.parameter(g) for g in gs]
    comb = combined_g(gs)
    d = comb.d

    rearr = Rearrangement(x)
    xs = rearr.sorted
    e = xs.essinf()
    y = xs - e
    ytil = y * band_indicator(min(d, 1.0), 1.0)
    selectors = SelectorSystem(gs)
    transfers = selectors.transfer_functions(ytil.law)
    parts = []
    for (lo, hi), R in zip(_band_bounds(alphas), transfers):
        part = y * band_indicator(lo, hi) + apply_monotone(ytil, R) + e / n
        parts.append(rearr.pull_back(part))
    alloc = Allocation(tuple(parts), x)

    predicted = e if d >= 1.0 - MERGE_TOL else dm.mixture_eval(comb.g, y) + e
    risks = [dm.mixture_eval(g, p) for g, p in zip(gs, parts)]
    hyp = optimality_hypotheses(gs)
    regime = "best_case" if d >= 1.0 - MERGE_TOL else ("optimal" if hyp["holds"] else "bound")
    details = {
        "d": d,
        "alphas": alphas,
        "essinf": e,
        "combined_g_vanishes": d >= 1.0 - MERGE_TOL,
        "part_bounds": alloc.bounds(),
    }
    if d >= 1.0 - MERGE_TOL:
        details["note"] = "g ≡ 0 regime: total risk collapses to the best case essinf X"
    return SharingResult(alloc, predicted, risks, regime, hypotheses=hyp, details=details)


def optimality_hypotheses(gs) -> dict:
    gs = _as_distortions(gs)
    alphas = [dm.parameter(g) for g in gs]
    d = float(sum(alphas))
    full = [bool(g(min(1.0, 1.0 - d + a)) >= 1.0 - dm.VALUE_TOL) for g, a in zip(gs, alphas)]
    concave = [dm.is_concave_active_part(g) for g in gs]
    return {
        "d": d,
        "d_below_one": d < 1.0,
        "full_at_shifted_level": full,
        "concave_active_parts": concave,
        "holds": d < 1.0 and all(full) and all(concave),
    }


def optimal_value(x, gs) -> float:
    """Value of the risk-sharing problem when the optimality conditions hold."""
    hyp = optimality_hypotheses(gs)
    if not hyp["d_below_one"]:
        raise HypothesisError(f"d < 1 violated (d = {hyp['d']:g})", "d < 1")
    if not all(hyp["full_at_shifted_level"]):
        bad = [i for i, ok in enumerate(hyp["full_at_shifted_level"]) if not ok]
        raise HypothesisError(f"g_i(1 - d + alpha_i) = 1 violated for entities {bad}",
                              "g_i(1 - d + alpha_i) = 1")
    if not all(hyp["concave_active_parts"]):
        bad = [i for i, ok in enumerate(hyp["concave_active_parts"]) if not ok]
        raise HypothesisError(f"active parts not concave for entities {bad}", "concave active parts")
    return dm.mixture_eval(combined_g(gs).g, _normalize(x))


def escape_index(gs) -> int | None:
    gs = _as_distortions(gs)
    alphas = [dm.parameter(g) for g in gs]
    d = float(sum(alphas))
    for i, (g, a) in enumerate(zip(gs, alphas)):
        if g(max(0.0, 1.0 - d + a)) < 1.0 - dm.VALUE_TOL:
            return i
    return None


def build_escape_allocation(x, gs, m: float) -> SharingResult:
    """Leveraged allocation whose total risk decreases linearly in ``m``.

    The first entity ``k`` with ``g_k(1 - d + alpha_k) < 1`` owes ``m`` on the
    bands of all other entities, which hold the matching claims on top of the
    worst states.
    """
    if m < 0:
        raise ValueError("leverage m must be nonnegative")
    x = _normalize(x)
    gs = _as_distortions(gs)
    n = len(gs)
    k = escape_index(gs)
    if k is None:
        raise HypothesisError("no entity has g_i(1 - d + alpha_i) < 1", "exists i: g_i(1 - d + alpha_i) < 1")
    alphas = [dm.parameter(g) for g in gs]
    d = float(sum(alphas))
    order = [k] + [i for i in range(n) if i != k]

    rearr = Rearrangement(x)
    xs = rearr.sorted
    e = xs.essinf()
    z = xs - e
    a_k = alphas[k]
    parts_u: dict[int, QuantileProfile] = {}
    parts_u[k] = (z * band_indicator(0.0, min(a_k, 1.0))
                  + z * band_indicator(min(d, 1.0), 1.0)
                  - m * band_indicator(min(a_k, 1.0), min(d, 1.0)))
    bounds = _band_bounds([alphas[i] for i in order])
    for i, (lo, hi) in zip(order[1:], bounds[1:]):
        parts_u[i] = (z + m) * band_indicator(lo, hi)
    parts = [rearr.pull_back(parts_u[i] + e / n) for i in range(n)]
    alloc = Allocation(tuple(parts), x)

    g_k = gs[k]
    level = max(0.0, 1.0 - d + a_k)
    shortfall = 1.0 - g_k(level)
    c = escape_constant(x, gs, k)
    predicted = c - m * shortfall + e
    risks = [dm.mixture_eval(g, p) for g, p in zip(gs, parts)]
    details = {
        "escape_index": k,
        "renumbered_order": order,
        "d": d,
        "constant_c": c,
        "slope": -shortfall,
        "m": m,
        "boundary_convention": "atom of g_k at 1 - d + alpha_k is charged to the -m layer",
    }
    return SharingResult(alloc, predicted, risks, "escape", hypotheses={"escape_index": k}, details=details)


def escape_constant(x, gs, k: int) -> float:
    """``int_[alpha_k, 1-d+alpha_k) V@R_{lam+d-alpha_k}(X - essinf X) g_k(dlam)``."""
    x = _normalize(x)
    gs = _as_distortions(gs)
    alphas = [dm.parameter(g) for g in gs]
    d = float(sum(alphas))
    a_k = alphas[k]
    z = x - x.essinf()
    mu = dm.stieltjes_of(gs[k]).restrict(a_k, 1.0 - d + a_k)
    return mu.integrate_var(z, shift=d - a_k)


def concealed_loss_pair(m: float, x: QuantileProfile | None = None,
                        event_prob: float = 1.0 / 8.0, scale: float = 6.0) -> Allocation:
    """Two-entity transfer: entity 1 receives ``scale*m`` on an event of small
    probability, entity 2 pays it, so entity 2 books a large gain its V@R-type
    measure can see while entity 1's loss stays beyond its quantile level."""
    x = QuantileProfile.constant(0.0) if x is None else _normalize(x)
    first = scale * m * band_indicator(0.0, event_prob)
    return Allocation((first, x - first), x)


def _var_type_pairs(measures) -> list[tuple[RiskMeasure, float]]:
    out = []
    for item in measures:
        rho, alpha = item
        out.append((rho, float(alpha)))
    return out


def build_var_type_allocation(x, measures, witnesses: Sequence = ()) -> SharingResult:
    """Hide the whole downside when the V@R-type parameters add up to 1 or more."""
    x = _normalize(x)
    pairs = _var_type_pairs(measures)
    alphas = [a for _, a in pairs]
    d = float(sum(alphas))
    if d < 1.0 - MERGE_TOL:
        raise HypothesisError(f"d >= 1 violated (d = {d:g})", "d >= 1")
    rearr = Rearrangement(x)
    xs = rearr.sorted
    e = xs.essinf()
    y = xs - e
    n = len(pairs)
    parts = [rearr.pull_back(y * band_indicator(lo, hi) + e / n) for lo, hi in _band_bounds(alphas)]
    checks = []
    for (rho, a), p in zip(pairs, parts):
        checks.append(is_var_type(rho, a, [x, p, *witnesses]))
    if not all(checks):
        bad = [i for i, ok in enumerate(checks) if not ok]
        raise HypothesisError(f"measures {bad} failed the V@R-type check", "V@R-type")
    alloc = Allocation(tuple(parts), x)
    zero = QuantileProfile.constant(0.0)
    predicted = sum(rho.evaluate(zero) for rho, _ in pairs) + e
    risks = [rho.evaluate(p) for (rho, _), p in zip(pairs, parts)]
    return SharingResult(alloc, predicted, risks, "var_type",
                         hypotheses={"d": d, "var_type_checks": checks},
                         details={"alphas": alphas, "essinf": e, "part_bounds": alloc.bounds()})


def build_surplus_escape(x, var_type, extra: RiskMeasure, m: float) -> SharingResult:
    """``n`` V@R-type entities plus one strongly surplus-sensitive entity.

    The extra entity owes ``m`` on the worst states ``{U < d}``; the V@R-type
    entities hold the claim on top of their bands, where it is invisible to
    them.  The reported prediction is an upper bound.
    """
    if m < 0:
        raise ValueError("leverage m must be nonnegative")
    x = _normalize(x)
    pairs = _var_type_pairs(var_type)
    alphas = [a for _, a in pairs]
    d = float(sum(alphas))
    if not 0.0 < d < 1.0:
        raise HypothesisError(f"0 < d < 1 violated (d = {d:g})", "0 < d < 1")
    if not is_strongly_surplus_sensitive(extra, d):
        raise HypothesisError(f"{extra.label()} is not strongly surplus sensitive at level {d:g}",
                              "strong surplus sensitivity")
    rearr = Rearrangement(x)
    xs = rearr.sorted
    e = xs.essinf()
    y = xs - e
    n = len(pairs)
    bounds = _band_bounds(alphas)
    parts_u = []
    for i, (lo, hi) in enumerate(bounds):
        part = (y + m) * band_indicator(lo, hi) + e / n
        if i == n - 1:
            part = part + y * band_indicator(d, 1.0)
        parts_u.append(part)
    parts_u.append(-m * band_indicator(0.0, d))
    checks = [is_var_type(rho, a, [x, p]) for (rho, a), p in zip(pairs, parts_u)]
    if not all(checks):
        bad = [i for i, ok in enumerate(checks) if not ok]
        raise HypothesisError(f"measures {bad} failed the V@R-type check", "V@R-type")
    parts = [rearr.pull_back(p) for p in parts_u]
    alloc = Allocation(tuple(parts), x)
    zero = QuantileProfile.constant(0.0)
    measures = [rho for rho, _ in pairs] + [extra]
    risks = [rho.evaluate(p) for rho, p in zip(measures, parts)]
    extra_risk = risks[-1]
    bound = sum(rho.evaluate(zero) for rho, _ in pairs) + y.law.var_at(d) + e + extra_risk
    return SharingResult(alloc, bound, risks, "surplus_escape", relation="upper_bound",
                         hypotheses={"d": d, "var_type_checks": checks, "strongly_surplus_sensitive": True},
                         details={"m": m, "extra_risk": extra_risk, "var_d_of_y": y.law.var_at(d)})


def build_naive_allocation(x, measures) -> SharingResult:
    """No transfers: every entity carries ``X / n``."""
    x = _normalize(x)
    n = len(measures)
    parts = [x / n for _ in range(n)]
    alloc = Allocation(tuple(parts), x)
    risks = [rho.evaluate(p) for rho, p in zip(measures, parts)]
    return SharingResult(alloc, float(sum(risks)), risks, "naive", details={"n": n})


def infconv_truncation_curve(x, gs, ks: Sequence[float]) -> list[tuple[float, float]]:
    """Bound for ``X v (-k)`` along a truncation sequence (``d >= 1`` required).

    For positions unbounded below the sequence diverges like ``-k``; for
    bounded data it levels off at ``essinf X``.
    """
    if combined_g(gs).d < 1.0 - MERGE_TOL:
        raise HypothesisError("the truncation curve uses the d >= 1 bound", "d >= 1")
    x = _normalize(x)
    return [(float(k), upper_bound(x.maximum(-float(k)), gs)) for k in ks]
