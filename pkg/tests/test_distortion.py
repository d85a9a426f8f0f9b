import numpy as np
import pytest

from riskshard import distortion as dm
from riskshard.distortion import DistortionError, DistortionFunction
from riskshard.fixtures import random_distortion, random_distribution
from riskshard.scenario import DiscreteDistribution, QuantileProfile, var_at

FOUR = DiscreteDistribution([0.0, 1.0, 2.0, 3.0], [0.25] * 4)
CONCEALED_X2 = DiscreteDistribution([-6.0, 0.0], [1 / 8, 7 / 8])


def test_var_shape():
    g = dm.make_var(0.5)
    assert g(0.0) == 0.0
    assert g(0.5) == 0.0
    assert g(0.5 + 1e-9) == 1.0
    assert g(1.0) == 1.0


def test_rvar_shape():
    g = dm.make_rvar(0.25, 0.75)
    assert g(0.25) == 0.0
    assert np.isclose(g(0.75), 2 / 3)
    assert np.isclose(g(0.4), (0.4 - 0.25) / 0.75)
    assert g(1.0) == 1.0


def test_avar_one_is_identity():
    g = dm.make_avar(1.0)
    xs = np.linspace(0, 1, 11)
    assert np.allclose(g(xs), xs)


def test_invalid_parameters():
    with pytest.raises(DistortionError):
        dm.make_var(1.0)
    with pytest.raises(DistortionError):
        dm.make_rvar(0.5, 0.6)
    with pytest.raises(DistortionError):
        DistortionFunction([(0, 0.5, 0.5, 0.2), (0.5, 1, 0.2, 1)])


def test_parameter_and_active_part():
    g = dm.make_var(0.5)
    assert dm.parameter(g) == 0.5
    act = dm.active_part(g)
    assert act(1e-9) == 1.0 and act(1.0) == 1.0

    assert dm.parameter(dm.make_avar(0.3)) == 0.0
    assert np.allclose(dm.active_part(dm.make_avar(0.3))(np.linspace(0, 1, 7)),
                       dm.make_avar(0.3)(np.linspace(0, 1, 7)))

    g = dm.make_rvar(0.1, 0.5)
    assert np.isclose(dm.parameter(g), 0.1)
    act = dm.active_part(g)
    assert np.isclose(act(0.25), 0.5)
    assert np.isclose(act(0.5), 1.0)
    assert act(0.95) == 1.0


def test_concavity():
    assert dm.is_concave_active_part(dm.make_rvar(0.2, 0.3))
    # a jump at the start of the active part is allowed
    assert dm.is_concave_active_part(dm.make_var(0.3))
    convex = DistortionFunction([(0, 0.5, 0, 0.25), (0.5, 1, 0.25, 1)])
    assert not dm.is_concave_active_part(convex)
    inner_jump = DistortionFunction([(0, 0.5, 0, 0.25), (0.5, 1, 0.5, 1)])
    assert not dm.is_concave_active_part(inner_jump)


def test_stieltjes_decomposition():
    mu = dm.stieltjes_of(dm.make_var(0.3))
    assert mu.density == ()
    assert mu.atoms == ((0.3, 1.0),)

    mu = dm.stieltjes_of(dm.make_rvar(0.2, 0.5))
    assert mu.atoms == ()
    assert len(mu.density) == 1
    a, b, r = mu.density[0]
    assert np.allclose([a, b, r], [0.2, 0.7, 2.0])

    assert dm.stieltjes_of(dm.zero_distortion()).total() == 0.0


def test_mixture_examples():
    assert dm.mixture_eval(dm.make_var(0.5), FOUR) == 1.0
    assert np.isclose(dm.mixture_eval(dm.make_rvar(0.25, 0.75), CONCEALED_X2), -1.0)
    d = DiscreteDistribution([-1.0, 4.0, 2.5], [0.2, 0.3, 0.5])
    assert np.isclose(dm.mixture_eval(dm.make_avar(1.0), d), d.mean())


def test_choquet_examples():
    assert dm.choquet_eval(dm.make_rvar(0.3, 0.5), QuantileProfile.constant(2.5)) == 2.5
    tail = DiscreteDistribution([100.0, 0.0], [0.004, 0.996])
    assert dm.choquet_eval(dm.make_var(0.005), tail) == 0.0
    sym = DiscreteDistribution([-1.0, 1.0], [0.5, 0.5])
    assert np.isclose(dm.choquet_eval(dm.make_avar(0.5), sym), 1.0)


def test_avar_tail_average_oracle():
    rng = np.random.default_rng(5)
    for _ in range(30):
        k = 20
        vals = rng.normal(size=k)
        d = DiscreteDistribution(vals, np.full(k, 1 / k))
        j = int(rng.integers(1, k + 1))
        expected = np.sort(vals)[::-1][:j].mean()
        assert np.isclose(dm.mixture_eval(dm.make_avar(j / k), d), expected)
        assert np.isclose(dm.choquet_eval(dm.make_avar(j / k), d), expected)


def test_var_distortion_reproduces_var():
    rng = np.random.default_rng(8)
    for _ in range(30):
        d = random_distribution(rng, max_atoms=15, integer=True)
        a = float(rng.uniform(0.01, 0.99))
        assert dm.mixture_eval(dm.make_var(a), d) == var_at(d, a)
        assert np.isclose(dm.choquet_eval(dm.make_var(a), d), var_at(d, a))


def test_equal_cell_rows_match_scalar_evaluation():
    rng = np.random.default_rng(9)
    g = random_distortion(rng)
    rows = rng.integers(-4, 5, size=(50, 4)).astype(float)
    vec = dm.evaluate_on_equal_cells(g, rows)
    for r, v in zip(rows, vec):
        assert np.isclose(v, dm.mixture_eval(g, DiscreteDistribution(r, np.full(4, 0.25))), atol=1e-12)


def test_pointwise_min_crossing():
    a = DistortionFunction([(0, 1, 0, 1)])
    b = DistortionFunction([(0, 0.5, 0, 0.25), (0.5, 1, 0.25, 1)])
    c = DistortionFunction([(0, 0.2, 0.4, 0.6), (0.2, 1, 0.6, 1)])
    f = dm.pointwise_min([a, b, c])
    xs = np.linspace(0, 1, 1001)
    assert np.allclose(f(xs), np.minimum(np.minimum(a(xs), b(xs)), c(xs)), atol=1e-12)
    # flat after a jump at 0+, crossing the diagonal at x = 0.3
    flat = DistortionFunction([(0, 0.5, 0.3, 0.3), (0.5, 1, 0.3, 1)])
    f2 = dm.pointwise_min([a, flat])
    assert np.any(np.abs(f2.knots - 0.3) < 1e-15)
    assert np.isclose(f2(0.3), 0.3) and np.isclose(f2(0.4), 0.3) and np.isclose(f2(0.2), 0.2)


def test_config_round_trip():
    for g in (dm.make_var(0.005), dm.make_avar(0.4), dm.make_rvar(0.1, 0.5)):
        h = dm.from_config(g.to_config())
        assert np.allclose(h(np.linspace(0, 1, 101)), g(np.linspace(0, 1, 101)))
    pw = DistortionFunction([(0, 0.2, 0, 0), (0.2, 0.6, 0.3, 0.5), (0.6, 1, 0.8, 1)])
    cfg = pw.to_config()
    assert cfg["kind"] == "piecewise"
    h = dm.from_config(cfg)
    assert np.allclose(h(np.linspace(0, 1, 101)), pw(np.linspace(0, 1, 101)))
    assert h.jumps() == pw.jumps()
