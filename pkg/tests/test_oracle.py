import numpy as np
import pytest

from riskshard import distortion as dm
from riskshard import measures as ms
from riskshard.fixtures import concealed_loss_measures
from riskshard.oracle import OracleSizeError, brute_force_infconv
from riskshard.scenario import DiscreteDistribution, QuantileProfile


def test_rvar_pair_finds_concealed_gain():
    res = brute_force_infconv(QuantileProfile.constant(0.0), [ms.distortion(g) for g in concealed_loss_measures()])
    assert res.value <= -1.0
    assert (res.first_part + res.second_part).allclose(QuantileProfile.constant(0.0))


def test_avar_pair_has_no_gain():
    rho = ms.distortion(dm.make_avar(0.5))
    assert brute_force_infconv(QuantileProfile.constant(0.0), [rho, rho]).value == 0.0


def test_constant_position():
    rho = ms.distortion(dm.make_avar(0.4))
    res = brute_force_infconv(QuantileProfile.constant(1.5), [rho, rho], bound=2.0)
    assert np.isclose(res.value, 1.5)


def test_tie_reduction_matches_full_enumeration():
    # a position with distinct cells enumerates the full product
    x = DiscreteDistribution([0.0, 1.0, 2.0, 3.0], [0.25] * 4)
    rho = [ms.distortion(dm.make_rvar(0.1, 0.5))] * 2
    small = brute_force_infconv(x, rho, grid_step=1.0, bound=1.0)
    assert small.candidates == small.grid.size ** 4
    tied = brute_force_infconv(QuantileProfile.constant(0.0), rho, grid_step=1.0, bound=1.0)
    assert tied.candidates == 15  # multisets of size 4 from 3 grid values


def test_size_guard():
    rho = ms.distortion(dm.make_avar(0.5))
    x = DiscreteDistribution([0.0, 1.0, 2.0, 3.0], [0.25] * 4)
    with pytest.raises(OracleSizeError):
        brute_force_infconv(x, [rho, rho], grid_step=0.01, bound=10.0)


def test_requires_equal_cells():
    rho = ms.distortion(dm.make_avar(0.5))
    with pytest.raises(ValueError):
        brute_force_infconv(DiscreteDistribution([0.0, 1.0], [0.3, 0.7]), [rho, rho])
