"""Deterministic random sampling helpers.

Every randomized check in this package draws from a generator created
here, so that a (seed, key) pair always reproduces the same stream no
matter which other checks ran before it.
"""
from __future__ import annotations

import numpy as np

# Fixed stream keys, one per consumer.  Keeping them in a single table
# guarantees two different checks never share a stream by accident.
KEY_NORM_AXIOMS = 1
KEY_STRICT_CONVEXITY = 2
KEY_PARALLELOGRAM = 3
KEY_KERNEL = 4
KEY_PHI_COND = 5
KEY_METRIC_AXIOMS = 6
KEY_DIAGONAL = 7
KEY_GREAT_CIRCLES = 8
KEY_OBSTRUCTION = 9
KEY_DECOMPOSITION = 10
KEY_DISTORTION = 11
KEY_SUPERADDITIVE = 12
KEY_CHOOSE_N = 13


def substream(seed: int, key: int) -> np.random.Generator:
    """Independent PCG64 generator for stream `key` under root `seed`."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, key))))


def unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Euclidean-unit directions, shape (count, dim)."""
    v = rng.standard_normal((count, dim))
    n = np.linalg.norm(v, axis=1, keepdims=True)
    # Resample degenerate rows; probability is negligible but cheap to handle.
    bad = (n < 1e-12).ravel()
    while bad.any():
        v[bad] = rng.standard_normal((int(bad.sum()), dim))
        n = np.linalg.norm(v, axis=1, keepdims=True)
        bad = (n < 1e-12).ravel()
    return v / n


def mixed_scale_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Gaussian directions with log-uniform magnitudes in [1e-2, 1e2]."""
    u = unit_vectors(rng, count, dim)
    mag = 10.0 ** rng.uniform(-2.0, 2.0, size=(count, 1))
    return u * mag
