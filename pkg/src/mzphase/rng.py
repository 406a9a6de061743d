"""Deterministic random number streams.

The whole package draws randomness from numpy PCG64 generators built
out of SeedSequence entropy tuples, so every simulation is reproducible
from a single integer seed:

* a run addressed by (base_seed, phase_index, run_index) uses the
  generator ``make_generator([base_seed, phase_index, run_index])``;
* swarm training uses ``make_generator([seed, 0])`` as its master
  stream and per-evaluation child streams obtained via ``spawn``.

Gaussian variates are produced by an explicit Box-Muller transform on
uniform draws (not the generator's native normal method), so a trace of
uniform draws fully determines every trajectory.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def make_generator(entropy):
    """Build a PCG64 generator from an int or a sequence of ints."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def normal(rng, size=None):
    """Standard normal draws via Box-Muller on two uniform variates.

    Uses 1 - U for the logarithm argument so a uniform draw of exactly
    0.0 cannot produce log(0). The sine partner of each pair is
    discarded; one normal costs two uniforms.
    """
    if size is None:
        u1 = 1.0 - rng.random()
        u2 = rng.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(TWO_PI * u2)
    u1 = 1.0 - rng.random(size)
    u2 = rng.random(size)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(TWO_PI * u2)
