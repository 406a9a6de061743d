"""Discretized Bayesian posterior over the unknown phase.

The posterior lives on a regular grid of G points phi_j = 2*pi*j/G and
is represented by non-negative weights that sum to one. Integrals are
Riemann sums over the grid points; for the smooth periodic integrands
that appear here the sums converge spectrally fast.

The default grid size is 2**17, chosen for fidelity runs; tests and
quick scans can use much smaller grids.
"""

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .circular import TWO_PI, wrap_phase
from .interferometer import IDEAL, noisy_likelihood

DEFAULT_GRID_SIZE = 2 ** 17

_RESULTANT_EPS = 1e-12


class DegeneratePosteriorError(Exception):
    """All weights vanished after an update (likelihood zero on the support)."""


class UndefinedMeanError(Exception):
    """The resultant vector is numerically zero; no circular mean exists."""


class InfiniteVarianceError(Exception):
    """Sharpness is zero, so the Holevo variance diverges."""


class GaussianSummary(NamedTuple):
    """Gaussian model (mu, sigma) of a posterior: circular mean and
    square root of the Holevo variance."""

    mu: float
    sigma: float


@lru_cache(maxsize=8)
def _grid_arrays(grid_size):
    phis = np.arange(grid_size) * (TWO_PI / grid_size)
    phasors = np.exp(1j * phis)
    phis.setflags(write=False)
    phasors.setflags(write=False)
    return phis, phasors


class PosteriorGrid:
    """Probability weights over the phase grid, optionally restricted to
    a closed sub-interval of [0, 2*pi)."""

    __slots__ = ("weights", "support")

    def __init__(self, weights, support=None):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or weights.size < 2:
            raise ValueError("weights must be a 1-D array with at least 2 entries")
        if np.any(weights < 0.0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and non-negative")
        total = weights.sum()
        if total <= 0.0:
            raise DegeneratePosteriorError("weights sum to zero")
        self.weights = weights / total
        self.support = support

    @classmethod
    def uniform(cls, grid_size=DEFAULT_GRID_SIZE, support=None):
        """Flat prior over the whole circle, or over a closed interval
        [lo, hi] when support is given."""
        if grid_size < 2:
            raise ValueError(f"grid size must be >= 2, got {grid_size}")
        phis, _ = _grid_arrays(grid_size)
        if support is None:
            return cls(np.full(grid_size, 1.0 / grid_size))
        lo, hi = support
        if not 0.0 <= lo < hi:
            raise ValueError(f"invalid support interval [{lo}, {hi}]")
        inside = (phis >= lo - 1e-12) & (phis <= hi + 1e-12)
        if not inside.any():
            raise ValueError(f"support [{lo}, {hi}] contains no grid point")
        return cls(np.where(inside, 1.0, 0.0), support=(lo, hi))

    @property
    def grid_size(self):
        return self.weights.size

    @property
    def phis(self):
        return _grid_arrays(self.grid_size)[0]

    def copy(self):
        g = PosteriorGrid.__new__(PosteriorGrid)
        g.weights = self.weights.copy()
        g.support = self.support
        return g

    def update(self, outcome, feedback, channel=IDEAL):
        """Multiply in the outcome likelihood and renormalize, in place.

        channel is the likelihood model assumed by the updater; callers
        default it to the ideal channel even when the samples come from
        a noisy one, so the protocol stays noise-unaware unless asked.
        """
        phis, _ = _grid_arrays(self.grid_size)
        self.weights *= noisy_likelihood(channel, outcome, phis, feedback)
        total = self.weights.sum()
        if total <= 0.0:
            raise DegeneratePosteriorError(
                "posterior vanished: likelihood is zero across the support"
            )
        self.weights /= total
        return self

    def resultant(self):
        """Complex mean resultant sum(w_j e^{i phi_j})."""
        _, phasors = _grid_arrays(self.grid_size)
        return complex(np.dot(self.weights, phasors))

    def sharpness(self):
        """|sum w_j e^{i phi_j}|, 1 for a point mass, 0 when fully spread."""
        return abs(self.resultant())

    def circular_mean(self):
        z = self.resultant()
        if abs(z) < _RESULTANT_EPS:
            raise UndefinedMeanError("zero resultant vector")
        return wrap_phase(math.atan2(z.imag, z.real))

    def holevo_variance(self):
        s = self.sharpness()
        if s < _RESULTANT_EPS:
            raise InfiniteVarianceError("sharpness is zero")
        return 1.0 / (s * s) - 1.0

    def gaussian_summary(self):
        """(mu, sigma) with mu the circular mean and sigma^2 the Holevo
        variance; for narrow posteriors this matches a Gaussian fit."""
        z = self.resultant()
        r = abs(z)
        if r < _RESULTANT_EPS:
            raise UndefinedMeanError("zero resultant vector")
        mu = wrap_phase(math.atan2(z.imag, z.real))
        sigma = math.sqrt(max(1.0 / (r * r) - 1.0, 0.0))
        return GaussianSummary(mu, sigma)

    def sample(self, rng):
        """Draw a grid point with probability equal to its weight."""
        cdf = np.cumsum(self.weights)
        idx = int(np.searchsorted(cdf, rng.random(), side="right"))
        if idx >= self.grid_size:
            idx = self.grid_size - 1
        return float(self.phis[idx])

    def dump_csv(self, path):
        """Write the snapshot as CSV with columns (phi, weight)."""
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["phi", "weight"])
            for phi, w in zip(self.phis, self.weights):
                writer.writerow([repr(float(phi)), repr(float(w))])
