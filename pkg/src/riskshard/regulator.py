"""Solvency capital requirements for single firms and corporate networks."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field

from .measures import DistortionMeasure, RiskMeasure, structural_var_type_parameter
from .scenario import DiscreteDistribution, QuantileProfile, from_scenarios
from .sharing import (
    HypothesisError,
    SharingResult,
    build_escape_allocation,
    build_main_allocation,
    build_naive_allocation,
    build_surplus_escape,
    build_var_type_allocation,
)

STRATEGIES = ("main", "var_type", "escape", "surplus_escape", "naive")


@dataclass(frozen=True)
class BalanceSheet:
    """Time-0 assets and liabilities with the law of next year's net asset value."""

    A0: float
    L0: float
    scenarios1: DiscreteDistribution

    @property
    def E0(self) -> float:
        return self.A0 - self.L0

    def loss(self) -> QuantileProfile:
        """``X = -E1`` on the latent coordinate."""
        return from_scenarios(self.scenarios1.map(lambda v: -v))

    def capital_decrease(self) -> DiscreteDistribution:
        """Law of ``-(E1 - E0)``."""
        e0 = self.E0
        return self.scenarios1.map(lambda v: e0 - v)

    def ruin_probability(self) -> float:
        d = self.scenarios1
        return float(d.probabilities[d.values < 0.0].sum())


def scr(bs: BalanceSheet, rho: RiskMeasure) -> float:
    return rho.evaluate(bs.capital_decrease())


@dataclass
class SolvencyCheck:
    scr: float
    E0: float
    solvent: bool
    ruin_probability: float
    probability_test: bool | None = None
    agree: bool | None = None
    boundary: bool = False

    def __bool__(self) -> bool:
        return self.solvent


def solvency_check(bs: BalanceSheet, rho: RiskMeasure) -> SolvencyCheck:
    """``SCR <= E0``; for V@R also the ruin-probability form of the same test."""
    value = scr(bs, rho)
    out = SolvencyCheck(value, bs.E0, value <= bs.E0 + 1e-12, bs.ruin_probability())
    cfg = rho.config() if isinstance(rho, DistortionMeasure) else {}
    if cfg.get("kind") == "var":
        alpha = float(cfg["alpha"])
        out.probability_test = out.ruin_probability <= alpha + 1e-13
        out.agree = out.probability_test == out.solvent
        out.boundary = abs(out.ruin_probability - alpha) <= 1e-13
    return out


@dataclass
class EntityLine:
    entity: int
    E0: float
    risk: float
    SCR: float
    solvent: bool
    lower: float
    upper: float


@dataclass
class NetworkReport:
    entities: list[EntityLine]
    total_scr: float
    predicted_total_scr: float
    consolidated_scr: float
    best_case_scr: float
    regime: str
    strategy: str
    E0: float
    relation: str = "equal"
    hypotheses: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def consistent(self, tol: float = 1e-9) -> bool:
        if self.relation == "upper_bound":
            return self.total_scr <= self.predicted_total_scr + tol
        return abs(self.total_scr - self.predicted_total_scr) <= tol

    def to_dict(self) -> dict:
        return asdict(self)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["entity", "SCR", "regime"])
        for line in self.entities:
            w.writerow([line.entity, repr(line.SCR), self.regime])
        w.writerow(["total", repr(self.total_scr), self.regime])
        w.writerow(["consolidated", repr(self.consolidated_scr), self.regime])
        w.writerow(["best_case", repr(self.best_case_scr), self.regime])
        return buf.getvalue()


def var_type_parameters(measures: list[RiskMeasure]) -> list[float]:
    alphas = []
    for rho in measures:
        a = structural_var_type_parameter(rho)
        if a is None:
            raise HypothesisError(f"{rho.label()} has no known V@R-type parameter", "V@R-type")
        alphas.append(a)
    return alphas


def allocate(x: QuantileProfile, measures: list[RiskMeasure], strategy: str, m: float = 1.0) -> SharingResult:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if strategy in ("main", "escape"):
        if not all(isinstance(r, DistortionMeasure) for r in measures):
            raise HypothesisError(f"strategy {strategy} needs distortion measures", "distortion measures")
        gs = [r.g for r in measures]
        return build_main_allocation(x, gs) if strategy == "main" else build_escape_allocation(x, gs, m)
    if strategy == "var_type":
        return build_var_type_allocation(x, list(zip(measures, var_type_parameters(measures))))
    if strategy == "surplus_escape":
        if len(measures) < 2:
            raise HypothesisError("surplus escape needs at least one V@R-type entity and one extra entity",
                                  "n >= 1 plus extra")
        head = measures[:-1]
        return build_surplus_escape(x, list(zip(head, var_type_parameters(head))), measures[-1], m)
    return build_naive_allocation(x, measures)


def network_report(bs_total: BalanceSheet, measures: list[RiskMeasure], strategy: str = "main",
                   m: float = 1.0, reference: RiskMeasure | None = None) -> NetworkReport:
    """Per-entity and total SCRs of a network sharing ``X = -E1``.

    ``E0`` is split evenly across entities; only the total matters.
    """
    x = bs_total.loss()
    result = allocate(x, measures, strategy, m)
    n = len(result.allocation)
    e0 = bs_total.E0
    lines = []
    for i, (risk, (lo, hi)) in enumerate(zip(result.part_risks, result.allocation.bounds())):
        lines.append(EntityLine(i + 1, e0 / n, risk, e0 / n + risk, risk <= 1e-12, lo, hi))
    reference = reference or measures[0]
    esssup_e1 = bs_total.scenarios1.esssup()
    return NetworkReport(
        entities=lines,
        total_scr=e0 + result.realized_total,
        predicted_total_scr=e0 + result.predicted_total,
        consolidated_scr=scr(bs_total, reference),
        best_case_scr=e0 - esssup_e1,
        regime=result.regime,
        strategy=strategy,
        E0=e0,
        relation=result.relation,
        hypotheses=_jsonable(result.hypotheses),
        details=_jsonable(result.details),
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def tail_loss_firm() -> BalanceSheet:
    """Firm with NAV 10 that loses 50 with probability 0.4% and gains 2 otherwise."""
    return BalanceSheet(110.0, 100.0, DiscreteDistribution([-50.0, 12.0], [0.004, 0.996]))


__all__ = [
    "BalanceSheet",
    "NetworkReport",
    "SolvencyCheck",
    "STRATEGIES",
    "allocate",
    "network_report",
    "scr",
    "solvency_check",
    "tail_loss_firm",
]
