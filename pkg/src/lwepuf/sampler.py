"""Seeded randomness and the discrete Gaussian error sampler.

A deterministic generator (PCG64) stands in for the hardware TRNG so that
experiments and golden tests are reproducible.  Errors are drawn by rounding
a continuous Gaussian with sigma = alpha*q/sqrt(2*pi) to the nearest integer
(ties away from zero) and reducing modulo q.
"""

import math

import numpy as np

from .core import Params, DEFAULT_PARAMS

Rng = np.random.Generator


def make_rng(seed: int) -> Rng:
    """Deterministic generator; identical seeds yield identical streams."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def derive_rng(seed: int, *stream: int) -> Rng:
    """Independent substream for (seed, *stream); used for parallel work."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, *stream))))


def sample_bits(count: int, rng: Rng) -> np.ndarray:
    """count i.i.d. uniform bits."""
    return rng.integers(0, 2, size=count, dtype=np.uint8)


def sample_bytes(count: int, rng: Rng) -> np.ndarray:
    """count i.i.d. uniform bytes."""
    return rng.integers(0, 256, size=count, dtype=np.uint8)


def error_stddev(params: Params = DEFAULT_PARAMS) -> float:
    """Standard deviation alpha*q/sqrt(2*pi) of the pre-rounding Gaussian."""
    return params.alpha * params.q / math.sqrt(2.0 * math.pi)


def _round_away(x: np.ndarray) -> np.ndarray:
    # round half away from zero; ties have measure zero for continuous draws
    # but the rule is fixed for determinism
    return np.trunc(x + np.copysign(0.5, x))


def sample_error_signed(params: Params, rng: Rng, size=None) -> np.ndarray:
    """Signed pre-reduction error draws (int64)."""
    g = rng.normal(0.0, error_stddev(params), size=size)
    return _round_away(g).astype(np.int64)


def sample_error(params: Params, rng: Rng) -> int:
    """One error sample from the rounded Gaussian, reduced into [0, q)."""
    return int(sample_error_signed(params, rng, size=())) & params.mask


def sample_error_vec(count: int, params: Params, rng: Rng) -> np.ndarray:
    """count error samples reduced into [0, q), as uint8 (q = 256 only)."""
    if params.q != 256:
        return (sample_error_signed(params, rng, size=count) & params.mask).astype(np.int64)
    return (sample_error_signed(params, rng, size=count) & 0xFF).astype(np.uint8)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erf (absolute error < 1e-7 over the real line)."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def predicted_error_rate(params: Params = DEFAULT_PARAMS) -> float:
    """Analytic decryption error rate 2*(1 - Phi(sqrt(pi)/(2*alpha*sqrt(m))))."""
    if params.alpha == 0.0:
        return 0.0
    return 2.0 * (1.0 - normal_cdf(math.sqrt(math.pi) / (2.0 * params.alpha * math.sqrt(params.m))))
