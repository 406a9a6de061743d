"""Non-adaptive baseline estimators on the half interval [0, pi].

On [0, pi] the phase-to-likelihood map is one-to-one, so estimation
without feedback is possible: a frequency-inversion estimator and a
fixed-feedback Bayesian estimator with the prior truncated to [0, pi].
"""

import math
from dataclasses import dataclass

from .interferometer import IDEAL
from .posterior import DEFAULT_GRID_SIZE, PosteriorGrid


@dataclass(frozen=True)
class CountSummary:
    """Click counts after N probes."""

    n0: int
    n1: int

    def __post_init__(self):
        if self.n0 < 0 or self.n1 < 0:
            raise ValueError("counts must be non-negative")
        if self.n0 + self.n1 < 1:
            raise ValueError("need at least one recorded outcome")

    @property
    def total(self):
        return self.n0 + self.n1

    @classmethod
    def from_outcomes(cls, outcomes):
        n0 = sum(1 for x in outcomes if x == 0)
        return cls(n0, len(outcomes) - n0)


def inversion_estimate(counts):
    """Invert cos^2(phi/2) = N0/N; result clamped to [0, pi].

    No bias correction is applied; under depolarizing noise the raw
    inversion is biased toward pi/2.
    """
    ratio = counts.n0 / counts.total
    est = 2.0 * math.acos(math.sqrt(ratio))
    return min(max(est, 0.0), math.pi)


def fixed_phase_bayes(outcomes, channel_model=IDEAL, grid_size=DEFAULT_GRID_SIZE):
    """Bayesian estimate with feedback held at 0 and prior truncated to [0, pi].

    Returns (estimate, grid); the grid keeps full-circle geometry with
    zero weight outside the support.
    """
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("need at least one outcome")
    grid = PosteriorGrid.uniform(grid_size, support=(0.0, math.pi))
    for x in outcomes:
        grid.update(x, 0.0, channel_model)
    return grid.circular_mean(), grid
