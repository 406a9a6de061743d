"""Single-photon two-mode interferometer outcome model.

A probe photon interferes with phase difference (phi - Phi) between the
two arms, where phi is the unknown phase and Phi the controllable
feedback phase. Detector click probabilities in the noiseless case are

    p(0 | phi; Phi) = cos^2[(phi - Phi) / 2]
    p(1 | phi; Phi) = sin^2[(phi - Phi) / 2]

Two detection noise channels are supported:

* depolarizing(p): with probability p the click is replaced by a fair
  coin, giving p_dep(x) = (1 - p) p(x) + p/2;
* phase(kappa): a Gaussian kick of standard deviation kappa on the
  feedback phase, whose marginal is
  p_pha(x) = e^{-kappa^2/2} p(x) + (1 - e^{-kappa^2/2})/2.

The module also carries the per-probe Fisher information of each
channel, maximized over the phase difference, and the induced
Cramer-Rao precision bound.
"""

import math
from dataclasses import dataclass

import numpy as np

from .circular import TWO_PI, wrap_phase
from .rng import normal

__all__ = [
    "NoiseChannel",
    "IDEAL",
    "ideal_likelihood",
    "noisy_likelihood",
    "sample_outcome",
    "sample_outcomes",
    "fisher_information",
    "precision_bound",
]


@dataclass(frozen=True)
class NoiseChannel:
    """Detection noise model: 'ideal', 'depolarizing' (p) or 'phase' (kappa)."""

    kind: str = "ideal"
    p: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.kind not in ("ideal", "depolarizing", "phase"):
            raise ValueError(f"unknown noise channel kind: {self.kind!r}")
        if self.kind == "depolarizing" and not 0.0 <= self.p <= 1.0:
            raise ValueError(f"depolarizing probability p={self.p} outside [0, 1]")
        if self.kind == "phase" and self.kappa < 0.0:
            raise ValueError(f"phase noise strength kappa={self.kappa} must be >= 0")

    @classmethod
    def ideal(cls):
        return cls("ideal")

    @classmethod
    def depolarizing(cls, p):
        return cls("depolarizing", p=float(p))

    @classmethod
    def phase(cls, kappa):
        return cls("phase", kappa=float(kappa))

    def spec(self):
        """Compact string form, e.g. 'depolarizing:0.25'; inverse of parse()."""
        if self.kind == "depolarizing":
            return f"depolarizing:{self.p:g}"
        if self.kind == "phase":
            return f"phase:{self.kappa:g}"
        return "ideal"

    @classmethod
    def parse(cls, text):
        kind, _, par = text.partition(":")
        kind = kind.strip()
        if kind == "ideal":
            if par:
                raise ValueError("ideal channel takes no parameter")
            return cls.ideal()
        if kind == "depolarizing":
            return cls.depolarizing(float(par))
        if kind == "phase":
            return cls.phase(float(par))
        raise ValueError(f"unknown noise channel kind: {kind!r}")

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "depolarizing":
            d["p"] = self.p
        elif self.kind == "phase":
            d["kappa"] = self.kappa
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], p=d.get("p", 0.0), kappa=d.get("kappa", 0.0))


IDEAL = NoiseChannel.ideal()


def ideal_likelihood(x, phi, feedback):
    """Noiseless click probability; phi/feedback may be scalars or arrays."""
    c = np.cos((phi - feedback) / 2.0)
    p0 = c * c
    return p0 if x == 0 else 1.0 - p0


def noisy_likelihood(channel, x, phi, feedback):
    """Click probability under the given channel."""
    p = ideal_likelihood(x, phi, feedback)
    if channel.kind == "depolarizing":
        return (1.0 - channel.p) * p + channel.p / 2.0
    if channel.kind == "phase":
        damp = math.exp(-channel.kappa ** 2 / 2.0)
        return damp * p + (1.0 - damp) / 2.0
    return p


def sample_outcome(channel, phi, feedback, rng):
    """Draw one click through the physical noise mechanism.

    Depolarizing noise flips a p-biased coin and then reports either the
    true click or a fair coin. Phase noise draws an explicit Gaussian
    kick on the feedback phase before the click is drawn; the marginal
    outcome law equals noisy_likelihood.
    """
    if channel.kind == "depolarizing" and rng.random() < channel.p:
        return 0 if rng.random() < 0.5 else 1
    if channel.kind == "phase":
        feedback = feedback + channel.kappa * normal(rng)
    p0 = math.cos((phi - feedback) / 2.0) ** 2
    return 0 if rng.random() < p0 else 1


def sample_outcomes(channel, phi, feedback, rng):
    """Vectorized sample_outcome over broadcastable phi/feedback arrays.

    Consumes the rng in a different (batched) order than repeated scalar
    calls; both paths are individually reproducible.
    """
    phi = np.asarray(phi, dtype=float)
    feedback = np.asarray(feedback, dtype=float)
    shape = np.broadcast_shapes(phi.shape, feedback.shape)
    if channel.kind == "phase":
        feedback = feedback + channel.kappa * normal(rng, shape)
    c = np.cos((phi - feedback) / 2.0)
    x = (rng.random(shape) >= c * c).astype(np.int64)
    if channel.kind == "depolarizing":
        noisy = rng.random(shape) < channel.p
        fair = (rng.random(shape) < 0.5).astype(np.int64)
        x = np.where(noisy, fair, x)
    return x


def fisher_information(channel):
    """Per-probe Fisher information, maximized over the phase difference."""
    if channel.kind == "depolarizing":
        return (1.0 - channel.p) ** 2
    if channel.kind == "phase":
        return math.exp(-channel.kappa ** 2)
    return 1.0


def precision_bound(channel, n):
    """Cramer-Rao bound [n * I]^(-1/2) on the phase deviation for n probes.

    For the ideal channel this is the standard quantum limit n^(-1/2).
    """
    if n < 1:
        raise ValueError(f"probe count must be >= 1, got {n}")
    return 1.0 / math.sqrt(n * fisher_information(channel))
