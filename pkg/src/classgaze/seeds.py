"""Seed derivation for every random draw in the package.

All randomness flows through one rule so that fixtures and simulations are
reproducible across platforms and numpy versions:

    generator_for(seed, domain, *key)
        -> Generator(Philox(SeedSequence(seed, spawn_key=(domain, *key))))

Philox is counter-based and its stream for a given key is stable, so two
processes (or two threads evaluating trials in parallel) that derive the
same (seed, domain, key) see bit-identical draws regardless of evaluation
order. Consumers never share a generator; they derive one per logical
stream (per randomization trial, per simulated student, ...).
"""

from __future__ import annotations

import numpy as np

# Domain tags for spawn keys. Never reuse a value.
DOMAIN_NULL_TRIAL = 1       # one per randomization-test trial
DOMAIN_UNIFORM_SAMPLE = 2   # the single uniform draw of a random-focus diff
DOMAIN_STUDENT_STREAM = 3   # one per simulated student
DOMAIN_SESSION_IDENTITY = 4  # session ids and student tokens


def generator_for(seed: int, domain: int, *key: int) -> np.random.Generator:
    """Derive an independent generator for one logical random stream."""
    ss = np.random.SeedSequence(seed, spawn_key=(domain, *key))
    return np.random.Generator(np.random.Philox(ss))


def uniform_unit_square(gen: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` points uniformly on [0,1]^2 as an (n, 2) float64 array."""
    return gen.random((n, 2))
