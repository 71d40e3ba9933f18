"""Adversarial losses, accuracy penalty, and the discrete-distribution
oracles for the optimal discriminator / chi-square identity."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcmi import (
    DiscreteDist,
    accuracy_penalty,
    chi2_generator_objective,
    discriminator_loss,
    generator_loss,
    optimal_discriminator,
)


def random_dist_pair(rng, size):
    """Two distributions on a shared support of the given size."""
    support = tuple(range(size))
    p = rng.random(size) + 1e-3
    g = rng.random(size) + 1e-3
    return DiscreteDist(support, p / p.sum()), DiscreteDist(support, g / g.sum())


def grid_minimize_pointwise_disc(p, g, levels=21, rounds=15):
    """Per-support-point grid minimisation of the population discriminator loss.

    Independent oracle: the pointwise integrand is
    p(x)(d - 2)^2 + g(x) d^2, minimised over d in [0, 2] by nested grid
    refinement.  Evaluation runs in exact rational arithmetic because the
    induced generator objective is first-order sensitive to discriminator
    error, so the minimiser must be localised far below the ~1e-8 limit
    that float64 loss comparisons allow.
    """
    best = []
    for pp, gp in zip(p.probs, g.probs):
        pf, gf = Fraction(float(pp)), Fraction(float(gp))
        lo, hi = Fraction(0), Fraction(2)
        d_best = Fraction(1)
        for _ in range(rounds):
            step = (hi - lo) / (levels - 1)
            grid = [lo + i * step for i in range(levels)]
            vals = [pf * (d - 2) ** 2 + gf * d * d for d in grid]
            d_best = grid[min(range(levels), key=vals.__getitem__)]
            lo = max(Fraction(0), d_best - step)
            hi = min(Fraction(2), d_best + step)
            if step < Fraction(1, 10**13):
                break
        best.append(float(d_best))
    return np.array(best)


def population_generator_loss(p, g, d_values):
    """Population generator objective at the given discriminator values
    (both real and generated expectations of (d - 1)^2)."""
    real = 0.5 * np.sum(p.probs * (d_values - 1.0) ** 2)
    fake = 0.5 * np.sum(g.probs * (d_values - 1.0) ** 2)
    return real + fake


class TestDiscriminatorLoss:
    def test_targets_met_exactly_zero(self):
        assert discriminator_loss([2.0, 2.0], [0.0, 0.0]) == 0.0

    def test_hand_value_middle(self):
        assert discriminator_loss([1.0], [1.0]) == pytest.approx(1.0)

    def test_hand_value_half(self):
        assert discriminator_loss([2.0], [1.0]) == pytest.approx(0.5)

    def test_separate_averaging(self):
        # real and fake terms each average over their own count
        assert discriminator_loss([2.0, 2.0, 2.0], [1.0]) == pytest.approx(0.5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            discriminator_loss([], [1.0])
        with pytest.raises(ValueError):
            discriminator_loss([1.0], [])

    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=8))
    def test_non_negative(self, values):
        assert discriminator_loss(values, values) >= 0.0


class TestGeneratorLoss:
    def test_zero_at_target(self):
        assert generator_loss([1.0, 1.0, 1.0]) == 0.0

    def test_hand_values(self):
        assert generator_loss([0.0, 2.0]) == pytest.approx(0.5)
        assert generator_loss([3.0]) == pytest.approx(2.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            generator_loss([])

    @given(st.lists(st.floats(0, 2), min_size=1, max_size=10))
    def test_zero_iff_all_outputs_one(self, values):
        loss = generator_loss(values)
        assert loss >= 0.0
        assert (loss == 0.0) == all(v == 1.0 for v in values)


class TestAccuracyPenalty:
    def test_continuous_exact_zero(self):
        assert accuracy_penalty(1.0, 1.0, "continuous") == 0.0

    def test_continuous_hand_value(self):
        assert accuracy_penalty(0.0, 2.0, "continuous") == pytest.approx(4.0)

    def test_binary_hand_value(self):
        assert accuracy_penalty(1.0, 0.5, "binary") == pytest.approx(np.log(2.0))

    def test_binary_domain_errors(self):
        with pytest.raises(ValueError):
            accuracy_penalty(1.0, 1.0, "binary")  # x_hat must be inside (0, 1)
        with pytest.raises(ValueError):
            accuracy_penalty(0.5, 0.5, "binary")  # x must be 0 or 1

    def test_vectorized(self):
        out = accuracy_penalty(np.array([0.0, 1.0]), np.array([0.5, 0.5]), "binary")
        assert np.allclose(out, np.log(2.0))


class TestDiscreteDist:
    def test_rejects_bad_probabilities(self):
        with pytest.raises(ValueError):
            DiscreteDist((0, 1), [0.7, 0.7])
        with pytest.raises(ValueError):
            DiscreteDist((0, 1), [-0.1, 1.1])

    def test_prob_of_absent_point_is_zero(self):
        d = DiscreteDist((0, 1), [0.5, 0.5])
        assert d.prob_of(7) == 0.0


class TestOptimalDiscriminator:
    def test_equal_distributions_give_one(self):
        rng = np.random.default_rng(1)
        p, _ = random_dist_pair(rng, 5)
        for point in p.support:
            assert optimal_discriminator(p, p, point) == pytest.approx(1.0)

    def test_hand_value(self):
        p = DiscreteDist((0, 1), [0.8, 0.2])
        g = DiscreteDist((0, 1), [0.4, 0.6])
        assert optimal_discriminator(p, g, 0) == pytest.approx(4.0 / 3.0)

    def test_no_real_mass_gives_zero(self):
        p = DiscreteDist((0, 1), [0.0, 1.0])
        g = DiscreteDist((0, 1), [0.5, 0.5])
        assert optimal_discriminator(p, g, 0) == 0.0

    def test_undefined_point_rejected(self):
        p = DiscreteDist((0, 1), [0.0, 1.0])
        with pytest.raises(ValueError):
            optimal_discriminator(p, p, 0)

    def test_range(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            p, g = random_dist_pair(rng, 6)
            for point in p.support:
                assert 0.0 <= optimal_discriminator(p, g, point) <= 2.0


class TestChi2Objective:
    def test_equal_distributions_zero(self):
        rng = np.random.default_rng(2)
        p, _ = random_dist_pair(rng, 4)
        assert chi2_generator_objective(p, p) == 0.0

    def test_disjoint_hand_value(self):
        p = DiscreteDist((0, 1), [1.0, 0.0])
        g = DiscreteDist((0, 1), [0.0, 1.0])
        assert chi2_generator_objective(p, g) == pytest.approx(1.0)

    def test_small_difference_hand_value(self):
        p = DiscreteDist((0, 1), [0.6, 0.4])
        g = DiscreteDist((0, 1), [0.4, 0.6])
        assert chi2_generator_objective(p, g) == pytest.approx(0.04)

    def test_support_mismatch_rejected(self):
        p = DiscreteDist((0, 1), [0.5, 0.5])
        g = DiscreteDist((0, 2), [0.5, 0.5])
        with pytest.raises(ValueError):
            chi2_generator_objective(p, g)

    @given(seed=st.integers(0, 10_000), size=st.integers(2, 10))
    @settings(max_examples=50, deadline=None)
    def test_positivity_zero_iff_equal(self, seed, size):
        rng = np.random.default_rng(seed)
        p, g = random_dist_pair(rng, size)
        val = chi2_generator_objective(p, g)
        assert val >= 0.0
        assert (val < 1e-18) == bool(np.max(np.abs(p.probs - g.probs)) < 1e-12)


class TestOptimalDiscriminatorIdentity:
    """Grid search over the population discriminator loss lands on the
    closed form, and the induced generator objective equals the
    chi-square expression."""

    @pytest.mark.parametrize("seed", range(10))
    def test_grid_minimum_matches_closed_form(self, seed):
        rng = np.random.default_rng(seed)
        p, g = random_dist_pair(rng, int(rng.integers(2, 11)))
        d_grid = grid_minimize_pointwise_disc(p, g)
        d_closed = np.array([optimal_discriminator(p, g, x) for x in p.support])
        assert np.max(np.abs(d_grid - d_closed)) < 1e-6
        induced = population_generator_loss(p, g, d_grid)
        assert abs(induced - chi2_generator_objective(p, g)) < 1e-9
