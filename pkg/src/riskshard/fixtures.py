"""Seeded random instances and the small fixed examples used by selftest and tests."""

from __future__ import annotations

import numpy as np

from .distortion import DistortionFunction, Segment, make_rvar
from .scenario import DiscreteDistribution, QuantileProfile, from_scenarios

DEFAULT_SEED = 20240601


def random_distribution(rng: np.random.Generator, max_atoms: int = 50, scale: float = 5.0,
                        integer: bool = False) -> DiscreteDistribution:
    k = int(rng.integers(1, max_atoms + 1))
    if integer:
        values = rng.integers(-int(scale), int(scale) + 1, size=k).astype(float)
    else:
        values = rng.normal(0.0, scale, size=k)
    return DiscreteDistribution(values, rng.dirichlet(np.ones(k)))


def random_profile(rng: np.random.Generator, max_pieces: int = 12, scale: float = 5.0) -> QuantileProfile:
    """Step function on a random partition, not sorted in any direction."""
    k = int(rng.integers(1, max_pieces + 1))
    inner = np.sort(rng.uniform(0.0, 1.0, size=k - 1))
    breaks = np.concatenate(([0.0], inner, [1.0]))
    return QuantileProfile(breaks, rng.normal(0.0, scale, size=k))


def random_distortion(rng: np.random.Generator, alpha: float | None = None,
                      max_pieces: int = 4, jump_prob: float = 0.4,
                      concave: bool = False) -> DistortionFunction:
    """Proper piecewise-linear distortion with parameter ``alpha``.

    ``alpha = 0`` gives a distortion that is positive on ``(0, 1]``.  With
    ``concave`` the active part has no jumps after the origin and decreasing
    slopes.
    """
    if alpha is None:
        alpha = float(rng.uniform(0.02, 0.4))
    k = int(rng.integers(1, max_pieces + 1))
    xs = np.concatenate(([alpha], np.sort(rng.uniform(alpha, 1.0, size=k - 1)), [1.0]))
    # avoid slivers
    keep = [xs[0]]
    for x in xs[1:]:
        if x - keep[-1] > 1e-3:
            keep.append(x)
    keep[-1] = 1.0
    xs = np.array(keep)
    n = xs.size - 1
    segs = [Segment(0.0, alpha, 0.0, 0.0)] if alpha > 0 else []
    if concave:
        jump0 = float(rng.uniform(0.0, 0.5)) if alpha > 0 else 0.0
        slopes = np.sort(rng.uniform(0.0, 1.0, size=n))[::-1]
        rises = slopes * np.diff(xs)
        rises = rises / rises.sum() * (1.0 - jump0) if rises.sum() > 0 else np.full(n, (1.0 - jump0) / n)
        y = jump0
        for j in range(n):
            segs.append(Segment(xs[j], xs[j + 1], y, y + rises[j]))
            y += rises[j]
    else:
        incs = rng.uniform(0.0, 1.0, size=2 * n)
        incs[0::2] *= rng.uniform(size=n) < jump_prob  # jumps
        if alpha > 0 and rng.uniform() < 0.5:
            incs[0] = rng.uniform(0.0, 1.0)
        if incs.sum() <= 0:
            incs[-1] = 1.0
        incs = incs / incs.sum()
        y = 0.0
        for j in range(n):
            y0 = y + incs[2 * j]
            y1 = y0 + incs[2 * j + 1]
            segs.append(Segment(xs[j], xs[j + 1], y0, y1))
            y = y1
    last = segs[-1]
    segs[-1] = Segment(last.x0, last.x1, min(last.y0, 1.0), 1.0)
    return DistortionFunction(segs)


def random_distortion_list(rng: np.random.Generator, max_n: int = 4, max_d: float = 0.95,
                           **kwargs) -> list[DistortionFunction]:
    n = int(rng.integers(1, max_n + 1))
    alphas = np.minimum(rng.dirichlet(np.ones(n)) * rng.uniform(0.05, max_d), 0.95)
    return [random_distortion(rng, alpha=float(a), **kwargs) for a in alphas]


def concealed_loss_measures():
    """The RV@R(1/4, 3/4) pair of the concealed-loss example."""
    return [make_rvar(0.25, 0.75), make_rvar(0.25, 0.75)]


def four_scenario_position() -> QuantileProfile:
    return from_scenarios(DiscreteDistribution([0.0, 1.0, 2.0, 3.0], [0.25] * 4))


def entropic_witness() -> DiscreteDistribution:
    return DiscreteDistribution([np.log(10.0), 0.0], [0.1, 0.9])
