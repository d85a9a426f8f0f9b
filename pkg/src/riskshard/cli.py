"""``riskshard`` command-line front end.

Exit codes: 0 ok, 2 input error, 3 hypothesis violation, 4 invariant failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import distortion as dm
from . import io as rio
from . import selftest
from .fixtures import DEFAULT_SEED
from .measures import DistortionMeasure, MeasureError, RiskMeasure, structural_var_type_parameter
from .oracle import OracleSizeError, brute_force_infconv
from .regulator import STRATEGIES, allocate, network_report, solvency_check
from .scenario import ScenarioError, from_scenarios
from .sharing import HypothesisError, upper_bound

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_INVARIANT = 0, 2, 3, 4
TOTAL_TOL = 1e-9
DUAL_TOL = 1e-10
TAIL_WARNING = "tail beyond V@R ignored"


def _fmt(v: float) -> str:
    return repr(float(v))


def _write(out: Path | None, name: str, text: str) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise rio.InputError(f"--{n.replace('_', '-')} is required for {args.command}")


def classify(rho: RiskMeasure, law) -> dict:
    info: dict = {"label": rho.label()}
    alpha = structural_var_type_parameter(rho)
    info["var_type"] = alpha is not None
    info["parameter"] = alpha
    if isinstance(rho, DistortionMeasure):
        info["concave_active_part"] = dm.is_concave_active_part(rho.g) if rho.g.proper else None
        info["parameter"] = dm.parameter(rho.g)
    if alpha is not None:
        q = law.var_at(alpha)
        info["tail_beyond_var"] = float(law.probabilities[law.values > q].sum())
    return info


def cmd_eval(args) -> int:
    _need(args, "scenarios", "measures")
    law = rio.read_scenarios(args.scenarios)
    measures = rio.read_measures(args.measures)
    report = []
    status = EXIT_OK
    for i, rho in enumerate(measures, start=1):
        value = rho.evaluate(law)
        entry = {"index": i, "value": value, **classify(rho, law)}
        line = f"measure {i} {entry['label']}: value {_fmt(value)}"
        if isinstance(rho, DistortionMeasure):
            residual = abs(dm.mixture_eval(rho.g, law) - dm.choquet_eval(rho.g, law))
            entry["dual_residual"] = residual
            line += f", dual residual {residual:.3e}"
            if residual > DUAL_TOL:
                status = EXIT_INVARIANT
        line += f", V@R-type {'yes' if entry['var_type'] else 'no'}"
        if entry["parameter"] is not None:
            line += f", parameter {_fmt(entry['parameter'])}"
        if entry.get("concave_active_part") is not None:
            line += f", concave active part {'yes' if entry['concave_active_part'] else 'no'}"
        print(line)
        if entry.get("tail_beyond_var", 0.0) > 0.0:
            entry["warning"] = TAIL_WARNING
            print(f"  warning: {TAIL_WARNING} (probability {_fmt(entry['tail_beyond_var'])})")
        report.append(entry)
    _write(args.out, "eval.json", rio.dumps({"measures": report, "seed": args.seed}))
    if status != EXIT_OK:
        print("error: dual evaluators disagree", file=sys.stderr)
    return status


def cmd_allocate(args) -> int:
    _need(args, "scenarios", "measures")
    law = rio.read_scenarios(args.scenarios)
    measures = rio.read_measures(args.measures)
    x = from_scenarios(law)
    result = allocate(x, measures, args.strategy, args.m)
    report = {
        "strategy": args.strategy,
        "m": args.m,
        "regime": result.regime,
        "relation": result.relation,
        "part_risks": result.part_risks,
        "predicted_total": result.predicted_total,
        "realized_total": result.realized_total,
        "hypotheses": result.hypotheses,
        "details": result.details,
        "seed": args.seed,
    }
    print(f"strategy {args.strategy}, regime {result.regime}")
    for i, r in enumerate(result.part_risks, start=1):
        print(f"part {i}: risk {_fmt(r)}")
    rel = "<=" if result.relation == "upper_bound" else "=="
    print(f"realized total {_fmt(result.realized_total)} {rel} predicted {_fmt(result.predicted_total)}")
    if "note" in result.details:
        print(f"note: {result.details['note']}")
    ok = result.consistent(TOTAL_TOL)
    if args.strategy == "escape":
        shifted = allocate(x, measures, args.strategy, args.m + 1.0)
        slope = shifted.realized_total - result.realized_total
        linear = abs(slope - result.details["slope"]) <= TOTAL_TOL
        report["linear_check"] = {"observed_slope": slope, "expected_slope": result.details["slope"],
                                  "passed": linear}
        print(f"linear check: slope {_fmt(slope)} vs {_fmt(result.details['slope'])} "
              f"{'passed' if linear else 'FAILED'}")
        ok = ok and linear
    report["consistent"] = ok
    _write(args.out, "allocation.csv", rio.allocation_csv(result.allocation))
    _write(args.out, "report.json", rio.dumps(report))
    if not ok:
        print("error: predicted and realized totals disagree", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_scr(args) -> int:
    _need(args, "balance_sheet", "measures")
    bs = rio.read_balance_sheet(args.balance_sheet)
    measures = rio.read_measures(args.measures)
    if len(measures) == 1 and args.strategy_given is False:
        chk = solvency_check(bs, measures[0])
        print(f"SCR {_fmt(chk.scr)}, E0 {_fmt(chk.E0)}, solvent {str(chk.solvent).lower()}")
        report = {"scr": chk.scr, "E0": chk.E0, "solvent": chk.solvent,
                  "ruin_probability": chk.ruin_probability, "seed": args.seed}
        if chk.probability_test is not None:
            print(f"ruin probability {_fmt(chk.ruin_probability)} <= level: "
                  f"{str(chk.probability_test).lower()}, predicates agree {str(chk.agree).lower()}"
                  + (" (boundary case)" if chk.boundary else ""))
            report.update(probability_test=chk.probability_test, agree=chk.agree, boundary=chk.boundary)
        _write(args.out, "scr.json", rio.dumps(report))
        if chk.agree is False and not chk.boundary:
            print("error: solvency predicates disagree", file=sys.stderr)
            return EXIT_INVARIANT
        return EXIT_OK
    rep = network_report(bs, measures, args.strategy, args.m)
    for line in rep.entities:
        print(f"entity {line.entity}: SCR {_fmt(line.SCR)}, solvent {str(line.solvent).lower()}")
    print(f"total SCR {_fmt(rep.total_scr)}, consolidated {_fmt(rep.consolidated_scr)}, "
          f"best case {_fmt(rep.best_case_scr)}, regime {rep.regime}")
    _write(args.out, "network.json", rio.dumps({**rep.to_dict(), "seed": args.seed}))
    _write(args.out, "network.csv", rep.to_csv())
    if not rep.consistent(TOTAL_TOL):
        print("error: predicted and realized totals disagree", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def equal_cells(law, limit: int = 64, minimum: int = 4) -> int:
    """Smallest ``k >= minimum`` such that every probability is a multiple of ``1/k``.

    At least ``minimum`` cells are used so that a split can move mass onto
    small events even when ``X`` itself has few atoms.
    """
    for k in range(1, limit + 1):
        scaled = law.probabilities * k
        if np.all(np.abs(scaled - np.round(scaled)) <= 1e-9):
            return k * -(-minimum // k)
    fracs = [Fraction(float(p)).limit_denominator(limit) for p in law.probabilities]
    raise rio.InputError(f"oracle needs probabilities that are multiples of 1/k with k <= {limit}; got {fracs}")


def cmd_oracle(args) -> int:
    _need(args, "scenarios", "measures")
    law = rio.read_scenarios(args.scenarios)
    measures = rio.read_measures(args.measures)
    if len(measures) != 2:
        raise rio.InputError("the oracle compares exactly two measures")
    x = from_scenarios(law)
    res = brute_force_infconv(x, measures, grid_step=args.grid, bound=args.bound, cells=equal_cells(law))
    report = {"oracle_value": res.value, "candidates": res.candidates, "grid": args.grid,
              "bound": args.bound, "seed": args.seed}
    print(f"oracle minimum {_fmt(res.value)} over {res.candidates} candidate splits")
    if all(isinstance(r, DistortionMeasure) for r in measures):
        closed = upper_bound(x, [r.g for r in measures])
        gap = res.value - closed
        sign = "below" if gap < -TOTAL_TOL else ("above" if gap > TOTAL_TOL else "equal to")
        print(f"closed form {_fmt(closed)}, gap {_fmt(gap)} (oracle {sign} closed form)")
        report.update(closed_form=closed, gap=gap, gap_sign=sign)
    _write(args.out, "oracle.json", rio.dumps(report))
    return EXIT_OK


def cmd_selftest(args) -> int:
    print(f"seed {args.seed}")
    results = selftest.run(args.seed)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name} ({detail})")
    _write(args.out, "selftest.json",
           rio.dumps({"seed": args.seed, "checks": [{"name": n, "passed": ok, "detail": d}
                                                    for n, ok, d in results]}))
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_INVARIANT



COMMANDS = {
    "eval": cmd_eval,
    "allocate": cmd_allocate,
    "scr": cmd_scr,
    "oracle": cmd_oracle,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="riskshard", description="Risk sharing with V@R-type measures.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--scenarios", type=Path)
    p.add_argument("--measures", type=Path)
    p.add_argument("--balance-sheet", type=Path)
    p.add_argument("--strategy", choices=STRATEGIES, default=None)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--grid", type=float, default=0.25)
    p.add_argument("--bound", type=float, default=6.0)
    p.add_argument("--out", type=Path)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.strategy_given = args.strategy is not None
    if args.strategy is None:
        args.strategy = "main"
    if args.m < 0:
        print("error: --m must be nonnegative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except HypothesisError as exc:
        print(f"hypothesis violated [{exc.condition}]: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (rio.InputError, ScenarioError, MeasureError, dm.DistortionError, OracleSizeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
