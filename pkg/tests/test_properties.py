import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from riskshard import distortion as dm
from riskshard import sharing as sh
from riskshard.fixtures import random_distortion, random_distortion_list
from riskshard.scenario import DiscreteDistribution, QuantileProfile, from_scenarios

values = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def distributions(draw, max_atoms=12):
    k = draw(st.integers(min_value=1, max_value=max_atoms))
    vals = draw(st.lists(values, min_size=k, max_size=k))
    weights = draw(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=k, max_size=k))
    w = np.array(weights)
    return DiscreteDistribution(vals, w / w.sum())


@st.composite
def profiles(draw, max_pieces=8):
    k = draw(st.integers(min_value=1, max_value=max_pieces))
    cuts = sorted(set(draw(st.lists(st.floats(min_value=0.01, max_value=0.99), min_size=k - 1, max_size=k - 1))))
    breaks = [0.0, *cuts, 1.0]
    vals = draw(st.lists(values, min_size=len(breaks) - 1, max_size=len(breaks) - 1))
    return QuantileProfile(breaks, vals)


@given(distributions(), st.floats(min_value=0, max_value=1), st.floats(min_value=0, max_value=1))
def test_var_is_nonincreasing(d, a, b):
    lo, hi = min(a, b), max(a, b)
    assert d.var_at(lo) >= d.var_at(hi)
    assert d.var_at(1.0) == d.essinf()


@given(distributions())
def test_scenario_round_trip(d):
    assert from_scenarios(d).law.equals(d)


@given(profiles(), profiles())
def test_profile_sum_difference(a, b):
    assert ((a + b) - b).allclose(a, atol=1e-9)


@settings(max_examples=60)
@given(seeds, distributions(max_atoms=20))
def test_dual_evaluators_agree(seed, d):
    rng = np.random.default_rng(seed)
    g = random_distortion(rng, alpha=float(rng.uniform(0, 0.8)), max_pieces=5)
    assert abs(dm.mixture_eval(g, d) - dm.choquet_eval(g, d)) <= 1e-10 * max(1.0, np.abs(d.values).max())


@settings(max_examples=60)
@given(seeds, distributions(max_atoms=15), st.floats(min_value=-20, max_value=20))
def test_distortion_cash_invariance(seed, d, c):
    rng = np.random.default_rng(seed)
    g = random_distortion(rng)
    shifted = d.map(lambda v: v + c)
    assert np.isclose(dm.mixture_eval(g, shifted), dm.mixture_eval(g, d) + c, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seeds, profiles())
def test_main_allocation_exact(seed, x):
    rng = np.random.default_rng(seed)
    gs = random_distortion_list(rng, max_d=1.3)
    res = sh.build_main_allocation(x, gs)
    scale = max(1.0, float(np.abs(x.values).max()))
    assert abs(res.discrepancy) <= 1e-9 * scale
    assert np.isclose(res.predicted_total, sh.upper_bound(x, gs), atol=1e-10 * scale)


@settings(max_examples=40, deadline=None)
@given(seeds, profiles())
def test_main_allocation_beats_single_entity(seed, x):
    # transfers never make the network worse than any single entity holding X
    rng = np.random.default_rng(seed)
    gs = random_distortion_list(rng, max_d=0.9)
    res = sh.build_main_allocation(x, gs)
    e = x.essinf()
    for g in gs:
        assert res.realized_total <= dm.mixture_eval(g, x - e) + e + 1e-9
