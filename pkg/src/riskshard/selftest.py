"""Invariant suite on built-in fixtures, run by ``riskshard selftest``."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import distortion as dm
from . import fixtures
from .measures import DistortionMeasure, Entropic, surplus_profile
from .regulator import solvency_check, tail_loss_firm
from .sharing import (
    build_escape_allocation,
    build_main_allocation,
    concealed_loss_pair,
    optimal_value,
)

Check = tuple[str, bool, str]


def _concealed_loss() -> Check:
    g = dm.make_rvar(0.25, 0.75)
    worst = 0.0
    for m in (1.0, 5.0, 40.0):
        alloc = concealed_loss_pair(m)
        r1, r2 = dm.mixture_eval(g, alloc.parts[0]), dm.mixture_eval(g, alloc.parts[1])
        worst = max(worst, abs(r1), abs(r2 + m))
    return "concealed loss pair rho1 = 0, rho2 = -m", worst <= 1e-12, f"max error {worst:.3e}"


def _entropic_witness() -> Check:
    x = fixtures.entropic_witness()
    ms = [0.0, 1.0, 5.0, 20.0]
    got = surplus_profile(Entropic(), x, 0.2, ms)
    err = max(abs(h - math.log1p(0.9 * math.exp(-m))) for m, h in got)
    ok = err <= 1e-10 and all(h >= 0.0 for _, h in got)
    return "entropic surplus witness log(1 + 0.9 e^-m)", ok, f"max error {err:.3e}"


def _var_pair_collapse() -> Check:
    x = fixtures.four_scenario_position()
    res = build_main_allocation(x, [dm.make_var(0.5), dm.make_var(0.5)])
    err = abs(res.realized_total - x.essinf())
    return "two V@R(0.5) entities reach essinf X", err <= 1e-12 and res.consistent(), f"error {err:.3e}"


def _escape_slope() -> Check:
    gs = fixtures.concealed_loss_measures()
    x = fixtures.four_scenario_position()
    totals = [build_escape_allocation(x, gs, m).realized_total for m in (1.0, 2.0, 4.0, 8.0)]
    slopes = np.diff(totals) / np.diff([1.0, 2.0, 4.0, 8.0])
    err = float(np.max(np.abs(slopes + 1.0 / 3.0)))
    return "escape total has slope -1/3", err <= 1e-10, f"max slope error {err:.3e}"


def _optimal_rvar() -> Check:
    rng = np.random.default_rng(fixtures.DEFAULT_SEED)
    gs = [dm.make_rvar(0.1, 0.5), dm.make_rvar(0.1, 0.5)]
    worst = 0.0
    for _ in range(10):
        x = fixtures.random_distribution(rng, max_atoms=10)
        res = build_main_allocation(x, gs)
        worst = max(worst, abs(res.realized_total - optimal_value(x, gs)))
    return "RV@R(0.1,0.5) pair attains the optimal value", worst <= 1e-9, f"max error {worst:.3e}"


def _dual_evaluators(seed: int) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        g = fixtures.random_distortion(rng, alpha=float(rng.uniform(0.0, 0.5)))
        x = fixtures.random_distribution(rng)
        worst = max(worst, abs(dm.mixture_eval(g, x) - dm.choquet_eval(g, x)))
    return "mixture and Choquet evaluators agree", worst <= 1e-10, f"max residual {worst:.3e}"


def _main_equality(seed: int) -> Check:
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(40):
        gs = fixtures.random_distortion_list(rng, max_d=1.3)
        x = fixtures.random_distribution(rng)
        worst = max(worst, abs(build_main_allocation(x, gs).discrepancy))
    return "main allocation realizes its predicted total", worst <= 1e-9, f"max error {worst:.3e}"


def _scr_example() -> Check:
    bs = tail_loss_firm()
    v = solvency_check(bs, DistortionMeasure(dm.make_var(0.005)))
    a = solvency_check(bs, DistortionMeasure(dm.make_avar(0.005)))
    ok = (abs(v.scr + 2.0) <= 1e-12 and v.solvent and bool(v.agree)
          and abs(a.scr - 47.6) <= 1e-9 and not a.solvent)
    return "SCR example: V@R solvent, AV@R insolvent", ok, f"V@R SCR {v.scr!r}, AV@R SCR {a.scr!r}"


def checks(seed: int) -> list[Callable[[], Check]]:
    return [
        _concealed_loss,
        _entropic_witness,
        _var_pair_collapse,
        _escape_slope,
        _optimal_rvar,
        lambda: _dual_evaluators(seed),
        lambda: _main_equality(seed),
        _scr_example,
    ]


def run(seed: int = fixtures.DEFAULT_SEED) -> list[Check]:
    return [c() for c in checks(seed)]
