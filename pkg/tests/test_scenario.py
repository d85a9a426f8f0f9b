import numpy as np
import pytest

from riskshard.scenario import (
    DiscreteDistribution,
    PiecewiseLinear,
    QuantileProfile,
    Rearrangement,
    ScenarioError,
    apply_monotone,
    band_indicator,
    combine,
    distribution_of,
    essinf,
    esssup,
    from_scenarios,
    var_at,
)

FOUR = DiscreteDistribution([0.0, 1.0, 2.0, 3.0], [0.25] * 4)
CONCEALED_X2 = DiscreteDistribution([-6.0, 0.0], [1 / 8, 7 / 8])


def test_distribution_canonical_form():
    d = DiscreteDistribution([2.0, 1.0, 2.0 + 1e-14], [0.2, 0.5, 0.3])
    assert np.allclose(d.values, [1.0, 2.0])
    assert np.allclose(d.probabilities, [0.5, 0.5])


def test_distribution_rejects_bad_input():
    with pytest.raises(ScenarioError):
        DiscreteDistribution([0.0, np.nan], [0.5, 0.5])
    with pytest.raises(ScenarioError):
        DiscreteDistribution([0.0, 1.0], [-0.5, 1.5])


def test_from_scenarios_point_mass():
    x = from_scenarios(DiscreteDistribution([0.0], [1.0]))
    assert len(x) == 1
    assert x(0.3) == 0.0


def test_from_scenarios_concealed_loss():
    x = from_scenarios(CONCEALED_X2)
    assert np.allclose(x.breaks, [0.0, 7 / 8, 1.0])
    assert np.allclose(x.values, [0.0, -6.0])


def test_from_scenarios_decreasing_order():
    x = from_scenarios(FOUR)
    assert np.allclose(x.breaks, [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(x.values, [3, 2, 1, 0])


def test_var_at_examples():
    assert var_at(CONCEALED_X2, 7 / 8) == -6.0
    assert var_at(CONCEALED_X2, 0.5) == 0.0
    assert var_at(FOUR, 1.0) == 0.0
    assert var_at(FOUR, 0.5) == 1.0
    # right-continuity at an atom boundary
    assert var_at(FOUR, 0.25) == 2.0
    assert var_at(FOUR, 0.0) == 3.0


def test_var_matches_sorted_sample_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        k = int(rng.integers(1, 20))
        vals = rng.integers(-5, 6, size=k).astype(float)
        d = DiscreteDistribution(vals, np.full(k, 1.0 / k))
        s = np.sort(vals)[::-1]
        for j in range(k):
            # V@R at j/k is the (j+1)-th largest sample
            assert var_at(d, j / k) == s[j]


def test_extremes():
    assert essinf(QuantileProfile.constant(5.0)) == 5.0
    assert esssup(QuantileProfile.constant(5.0)) == 5.0
    assert (essinf(FOUR), esssup(FOUR)) == (0.0, 3.0)
    assert (essinf(CONCEALED_X2), esssup(CONCEALED_X2)) == (-6.0, 0.0)


def test_combine():
    x = from_scenarios(FOUR)
    assert combine([x], [1.0]).allclose(x)
    assert combine([x, -x], [1.0, 1.0]).allclose(QuantileProfile.constant(0.0))
    one = combine([band_indicator(0, 0.5), band_indicator(0.5, 1)], [1.0, 1.0])
    assert one.allclose(QuantileProfile.constant(1.0))


def test_band_indicator():
    assert band_indicator(0, 1).allclose(QuantileProfile.constant(1.0))
    b = band_indicator(0.25, 0.5)
    assert (b(0.2), b(0.25), b(0.49), b(0.5)) == (0.0, 1.0, 1.0, 0.0)
    assert band_indicator(0.3, 0.3).allclose(QuantileProfile.constant(0.0))
    with pytest.raises(ValueError):
        band_indicator(0.6, 0.3)


def test_distribution_of():
    assert distribution_of(QuantileProfile.constant(2.0)).equals(DiscreteDistribution([2.0], [1.0]))
    d = distribution_of(band_indicator(0.0, 0.25))
    assert d.equals(DiscreteDistribution([0.0, 1.0], [0.75, 0.25]))
    assert distribution_of(from_scenarios(FOUR)).equals(FOUR)


def test_apply_monotone():
    x = from_scenarios(FOUR)
    assert apply_monotone(x, PiecewiseLinear([0, 3], [0, 3])).allclose(x)
    c = QuantileProfile.constant(4.0)
    assert apply_monotone(c, PiecewiseLinear([0, 4], [0, 2])).allclose(QuantileProfile.constant(2.0))
    h = PiecewiseLinear([0, 1, 3], [0, 1, 1])
    out = apply_monotone(x, h)
    assert np.allclose(out.refine([0, 0.25, 0.5, 0.75, 1]), [1, 1, 1, 0])
    with pytest.raises(ScenarioError):
        apply_monotone(x, PiecewiseLinear([0, 2], [0, 2]))


def test_profile_arithmetic_on_misaligned_breaks():
    a = QuantileProfile([0, 0.3, 1], [1.0, 2.0])
    b = QuantileProfile([0, 0.6, 1], [10.0, 20.0])
    s = a + b
    assert np.allclose(s.breaks, [0, 0.3, 0.6, 1])
    assert np.allclose(s.values, [11, 12, 22])
    assert (a * 2 - a).allclose(a)


def test_rearrangement_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(20):
        k = int(rng.integers(1, 8))
        inner = np.sort(rng.uniform(size=k - 1))
        x = QuantileProfile(np.concatenate(([0], inner, [1])), rng.integers(-3, 4, size=k).astype(float))
        r = Rearrangement(x)
        assert r.sorted.law.equals(x.law)
        assert np.all(np.diff(r.sorted.values) <= 0)
        assert r.pull_back(r.sorted).allclose(x)
