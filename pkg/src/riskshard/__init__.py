"""Risk sharing and solvency capital for networks with V@R-type risk measures."""

from .distortion import (
    DistortionFunction,
    choquet_eval,
    make_avar,
    make_rvar,
    make_var,
    mixture_eval,
)
from .measures import DistortionMeasure, Entropic, Expectile, RiskMeasure, Truncated, is_var_type
from .oracle import brute_force_infconv
from .regulator import BalanceSheet, network_report, scr, solvency_check
from .scenario import DiscreteDistribution, QuantileProfile, from_scenarios, var_at
from .sharing import (
    build_escape_allocation,
    build_main_allocation,
    build_surplus_escape,
    build_var_type_allocation,
    optimal_value,
    upper_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BalanceSheet",
    "DiscreteDistribution",
    "DistortionFunction",
    "DistortionMeasure",
    "Entropic",
    "Expectile",
    "QuantileProfile",
    "RiskMeasure",
    "Truncated",
    "brute_force_infconv",
    "build_escape_allocation",
    "build_main_allocation",
    "build_surplus_escape",
    "build_var_type_allocation",
    "choquet_eval",
    "from_scenarios",
    "is_var_type",
    "make_avar",
    "make_rvar",
    "make_var",
    "mixture_eval",
    "network_report",
    "optimal_value",
    "scr",
    "solvency_check",
    "upper_bound",
    "var_at",
]
