import math

import numpy as np
import pytest

from riskshard import distortion as dm
from riskshard import measures as ms
from riskshard.fixtures import entropic_witness, random_distribution
from riskshard.scenario import DiscreteDistribution, QuantileProfile, from_scenarios


def test_entropic_cash_and_witness():
    e = ms.Entropic()
    assert np.isclose(e(QuantileProfile.constant(3.5)), 3.5)
    assert np.isclose(e(entropic_witness()), math.log(1.9), atol=1e-14)


def test_entropic_is_stable_for_large_values():
    d = DiscreteDistribution([800.0, 0.0], [0.5, 0.5])
    assert np.isclose(ms.Entropic()(d), 800.0 + math.log(0.5))


def test_expectile_symmetric():
    d = DiscreteDistribution([-1.0, 1.0], [0.5, 0.5])
    assert abs(ms.Expectile(1.0)(d)) <= 1e-10


def test_expectile_bisection_matches_root():
    rng = np.random.default_rng(2)
    for _ in range(20):
        d = random_distribution(rng, max_atoms=10)
        gamma = float(rng.uniform(0.2, 5.0))
        m = ms.Expectile(gamma)(d)
        v, p = d.values, d.probabilities
        neg = np.sum(p * np.maximum(m - v, 0))
        pos = np.sum(p * np.maximum(v - m, 0))
        # acceptance ratio crosses gamma at the root
        assert np.isclose(neg, gamma * pos, atol=1e-8)


def test_expectile_rows_match_scalar():
    rng = np.random.default_rng(4)
    rho = ms.Expectile(2.0)
    rows = rng.normal(size=(30, 4))
    vec = rho.evaluate_rows(rows)
    for r, v in zip(rows, vec):
        assert np.isclose(v, rho(DiscreteDistribution(r, [0.25] * 4)), atol=1e-9)


def test_truncated_applies_truncation():
    rho = ms.Truncated(ms.Entropic(), 0.2)
    d = DiscreteDistribution([100.0, 1.0, 0.0], [0.1, 0.3, 0.6])
    # V@R_0.2 = 1, so the atom at 100 is replaced by 1
    assert np.isclose(rho(d), math.log(0.4 * math.e + 0.6))


def test_var_type_classification():
    assert ms.is_var_type(ms.distortion(dm.make_var(0.1)), 0.1)
    heavy = DiscreteDistribution([20.0, 0.0], [0.05, 0.95])
    assert not ms.is_var_type(ms.Entropic(), 0.1, [heavy])
    assert ms.is_var_type(ms.Truncated(ms.Entropic(), 0.2), 0.2, [heavy])
    # structural pass for truncation at a coarser level
    assert ms.is_var_type(ms.Truncated(ms.Entropic(), 0.3), 0.2)
    # witness-based check also accepts it
    assert ms.is_var_type(ms.Truncated(ms.Expectile(2.0), 0.3), 0.2, [heavy])


def test_truncated_identity_holds_on_witnesses():
    rng = np.random.default_rng(12)
    rho = ms.Truncated(ms.Entropic(), 0.25)
    for _ in range(50):
        d = random_distribution(rng, max_atoms=12)
        assert np.isclose(rho(d), rho(ms.truncate_at_var(d, 0.25)), atol=1e-12)


def test_entropic_surplus_profile():
    x = entropic_witness()
    for m, h in ms.surplus_profile(ms.Entropic(), x, 0.2, [0.0, 0.5, 3.0, 40.0]):
        assert np.isclose(h, math.log1p(0.9 * math.exp(-m)), atol=1e-12)


def test_expectation_surplus_profile_is_linear():
    rng = np.random.default_rng(13)
    x = random_distribution(rng, max_atoms=20)
    rho = ms.distortion(dm.make_avar(1.0))
    d = 0.3
    q = x.var_at(1.0 - d)
    share = float(x.probabilities[x.values <= q].sum())
    for m, h in ms.surplus_profile(rho, x, d, [0.0, 1.0, 10.0]):
        assert np.isclose(h, x.mean() - m * share)


def test_strong_surplus_sensitivity():
    assert ms.is_strongly_surplus_sensitive_distortion(dm.make_avar(1.0))
    assert not ms.is_strongly_surplus_sensitive_distortion(dm.make_avar(0.5))
    assert ms.is_strongly_surplus_sensitive_distortion(dm.make_rvar(0.25, 0.75))
    assert not ms.is_strongly_surplus_sensitive(ms.Entropic(), 0.2)
    assert ms.is_strongly_surplus_sensitive(ms.Expectile(2.0), 0.2)


def test_from_config():
    assert isinstance(ms.from_config({"kind": "entropic"}), ms.Entropic)
    assert ms.from_config({"kind": "expectile", "gamma": 2}).gamma == 2.0
    t = ms.from_config({"kind": "truncated", "alpha": 0.2, "base": {"kind": "entropic"}})
    assert isinstance(t, ms.Truncated) and t.alpha == 0.2
    v = ms.from_config({"kind": "var", "alpha": 0.005})
    assert v.config() == {"kind": "var", "alpha": 0.005}
    with pytest.raises(ms.MeasureError):
        ms.from_config({"kind": "nope"})
    with pytest.raises(ms.MeasureError):
        ms.from_config({"kind": "expectile"})


def test_profile_and_law_agree():
    rng = np.random.default_rng(21)
    d = random_distribution(rng)
    for rho in (ms.Entropic(), ms.Expectile(1.5), ms.distortion(dm.make_rvar(0.1, 0.4))):
        assert np.isclose(rho(d), rho(from_scenarios(d)), atol=1e-12)
