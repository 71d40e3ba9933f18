"""Least-squares adversarial losses, the accuracy penalty, and discrete
distribution oracles for checking the optimal-discriminator identity.

The discriminator drives real samples toward 2 and generated samples
toward 0; the generator drives discriminator outputs on generated samples
toward 1.  At the population optimum the discriminator equals
2*p / (p + g) pointwise and the generator objective is half the Pearson
chi-square divergence between p + g and 2g, which vanishes exactly when
p = g.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REAL_TARGET = 2.0
GEN_TARGET = 1.0

# Clamp for logs inside the binary penalty when called on saturated values.
_LOG_EPS = 1e-12


def discriminator_loss(d_real: np.ndarray, d_fake: np.ndarray) -> float:
    """Squared-error loss pushing d_real -> 2 and d_fake -> 0.

    Each term averages over its own sample count, so real and generated
    batches may differ in size.
    """
    d_real = np.asarray(d_real, dtype=float).ravel()
    d_fake = np.asarray(d_fake, dtype=float).ravel()
    if d_real.size == 0 or d_fake.size == 0:
        raise ValueError("discriminator_loss requires non-empty real and fake scores")
    real_term = 0.5 * np.mean((d_real - REAL_TARGET) ** 2)
    fake_term = 0.5 * np.mean(d_fake**2)
    return float(real_term + fake_term)


def generator_loss(d_fake: np.ndarray) -> float:
    """Squared-error loss pushing discriminator scores on fakes toward 1."""
    d_fake = np.asarray(d_fake, dtype=float).ravel()
    if d_fake.size == 0:
        raise ValueError("generator_loss requires non-empty fake scores")
    return float(0.5 * np.mean((d_fake - GEN_TARGET) ** 2))


def accuracy_penalty(x, x_hat, kind: str):
    """Supervised penalty on generated values for observed targets.

    continuous: squared error.  binary: cross-entropy, requiring
    x in {0, 1} and x_hat strictly inside (0, 1).
    Accepts scalars or arrays (elementwise).
    """
    x = np.asarray(x, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    if kind == "continuous":
        out = (x_hat - x) ** 2
    elif kind == "binary":
        if not np.all((x == 0.0) | (x == 1.0)):
            raise ValueError("binary accuracy penalty requires x in {0, 1}")
        if not np.all((x_hat > 0.0) & (x_hat < 1.0)):
            raise ValueError("binary accuracy penalty requires x_hat in the open interval (0, 1)")
        out = -x * np.log(x_hat) - (1.0 - x) * np.log(1.0 - x_hat)
    else:
        raise ValueError(f"unknown kind {kind!r}; expected 'continuous' or 'binary'")
    return float(out) if out.ndim == 0 else out


def binary_cross_entropy_clipped(x: np.ndarray, x_hat: np.ndarray) -> np.ndarray:
    """Cross-entropy with x_hat clamped into (0, 1); training-loop variant."""
    x_hat = np.clip(x_hat, _LOG_EPS, 1.0 - _LOG_EPS)
    return -x * np.log(x_hat) - (1.0 - x) * np.log(1.0 - x_hat)


@dataclass
class DiscreteDist:
    """Finite distribution: support points with probabilities summing to 1."""

    support: tuple
    probs: np.ndarray

    def __post_init__(self):
        self.support = tuple(self.support)
        self.probs = np.asarray(self.probs, dtype=float)
        if len(self.support) != self.probs.size:
            raise ValueError("support and probabilities must have equal length")
        if np.any(self.probs < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {self.probs.sum()!r}")

    def prob_of(self, point) -> float:
        try:
            return float(self.probs[self.support.index(point)])
        except ValueError:
            return 0.0


def optimal_discriminator(p: DiscreteDist, g: DiscreteDist, point) -> float:
    """Closed-form minimiser of the discriminator loss at one point: 2p/(p+g)."""
    pp = p.prob_of(point)
    gp = g.prob_of(point)
    if pp + gp <= 0.0:
        raise ValueError(f"discriminator undefined at {point!r}: no mass under p or g")
    return 2.0 * pp / (pp + gp)


def chi2_generator_objective(p: DiscreteDist, g: DiscreteDist) -> float:
    """Population generator objective at the optimal discriminator.

    Equals 0.5 * sum (p - g)^2 / (p + g); non-negative, zero iff p = g.
    """
    if p.support != g.support:
        raise ValueError("distributions must share an identical support")
    denom = p.probs + g.probs
    diff2 = (p.probs - g.probs) ** 2
    positive = denom > 0
    return float(0.5 * np.sum(diff2[positive] / denom[positive]))
