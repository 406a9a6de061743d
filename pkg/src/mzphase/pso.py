"""Offline policy training by particle swarm optimization.

A policy is a sequence of phase increments {d_1 .. d_n}. During an
estimation run the feedback phase evolves as

    Phi_k = Phi_{k-1} - (-1)^{x_{k-1}} d_k

with Phi_0 = 0 and x_0 = 0, and the final estimate is Phi_n. Policy
quality is the sharpness of the error phi - Phi_n over uniformly random
true phases, estimated by Monte Carlo with K samples.

The swarm update follows, per iteration and particle i,

    v_i <- beta1 xi1 (pbest_i - x_i) + alpha2 xi2 (lbest_i - x_i) + v_i
    x_i <- omega v_i + x_i

with xi1, xi2 uniform on [0, 1] per particle and dimension, velocities
clamped componentwise, and lbest_i the best personal best within a ring
neighborhood around i (including i itself). Note the inertia weight
multiplies the velocity in the position update, not in the velocity
update; the swarm therefore relies on the personal-best ratchet rather
than velocity damping for convergence, and benefits from small omega
and tight velocity clamps.
"""

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .circular import TWO_PI, wrap_signed
from .interferometer import IDEAL, NoiseChannel, sample_outcomes
from .rng import make_generator

__all__ = [
    "Policy",
    "PsoConfig",
    "Particle",
    "apply_policy_step",
    "estimate_sharpness",
    "pso_step",
    "train_policy",
]

# training quality degrades for long policies; warn past this length
POLICY_LENGTH_SOFT_LIMIT = 50


@dataclass
class Policy:
    """Offline feedback policy: per-step increments wrapped to (-pi, pi]."""

    deltas: np.ndarray
    channel: NoiseChannel = IDEAL
    config: dict = field(default_factory=dict)
    sharpness: float | None = None
    seed: int | None = None

    def __post_init__(self):
        deltas = np.asarray(self.deltas, dtype=float)
        if deltas.ndim != 1 or deltas.size < 1:
            raise ValueError("policy needs a 1-D array of at least one increment")
        self.deltas = wrap_signed(deltas)

    @property
    def n(self):
        return self.deltas.size

    def save(self, path):
        payload = {
            "n": int(self.n),
            "deltas": [float(d) for d in self.deltas],
            "channel": self.channel.to_dict(),
            "config": self.config,
            "sharpness": self.sharpness,
            "seed": self.seed,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            payload = json.load(fh)
        deltas = np.asarray(payload["deltas"], dtype=float)
        if payload.get("n") is not None and int(payload["n"]) != deltas.size:
            raise ValueError("policy file: n does not match deltas length")
        return cls(
            deltas,
            channel=NoiseChannel.from_dict(payload.get("channel", {"kind": "ideal"})),
            config=payload.get("config", {}),
            sharpness=payload.get("sharpness"),
            seed=payload.get("seed"),
        )


def apply_policy_step(policy, prev_feedback, prev_outcome, k):
    """Next feedback phase Phi_k = Phi_{k-1} - (-1)^{x_{k-1}} d_k.

    For k = 1 pass the conventions Phi_0 = 0 and x_0 = 0.
    """
    if not 1 <= k <= policy.n:
        raise ValueError(f"step {k} outside policy range 1..{policy.n}")
    sign = 1.0 if prev_outcome == 0 else -1.0
    return (prev_feedback - sign * policy.deltas[k - 1]) % TWO_PI


def _final_feedbacks(deltas, phases, channel, rng):
    """Vectorized policy runs over an array of true phases; returns Phi_n."""
    feedback = np.zeros_like(phases)
    prev = np.zeros(phases.shape, dtype=np.int64)
    for d in deltas:
        feedback = feedback - np.where(prev == 0, d, -d)
        prev = sample_outcomes(channel, phases, feedback, rng)
    return feedback


def _sharpness_of_position(deltas, channel, k_samples, rng):
    phases = rng.uniform(0.0, TWO_PI, k_samples)
    finals = _final_feedbacks(deltas, phases, channel, rng)
    return float(np.abs(np.exp(1j * (phases - finals)).sum()) / k_samples)


def estimate_sharpness(policy, channel, k_samples, rng):
    """Monte Carlo sharpness |sum_k e^{i(phi_k - Phi_n,k)}| / K of a policy.

    Each of the K samples draws a true phase uniformly from [0, 2*pi),
    simulates one n-probe run under the given channel and takes Phi_n as
    the estimate.
    """
    if k_samples < 1:
        raise ValueError("k_samples must be >= 1")
    return _sharpness_of_position(policy.deltas, channel, k_samples, rng)


@dataclass
class PsoConfig:
    """Swarm hyperparameters.

    The defaults were tuned on policy training for n around 10..20: a
    small inertia weight and a tight velocity clamp compensate for the
    undamped velocity recursion, and initial positions span (-pi/2,
    pi/2) per dimension, which covers the useful increment range.
    """

    swarm_size: int = 40
    iterations: int = 400
    omega: float = 0.3
    beta1: float = 2.0
    alpha2: float = 2.0
    neighborhood_radius: int = 3
    fitness_samples: int = 1000
    velocity_clamp: float = 0.4
    init_range: float = math.pi / 2
    seed: int = 0

    def validate(self):
        if self.swarm_size < 2:
            raise ValueError(f"swarm_size must be >= 2, got {self.swarm_size}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.fitness_samples < 1:
            raise ValueError("fitness_samples must be >= 1")
        if min(self.omega, self.beta1, self.alpha2) <= 0.0:
            raise ValueError("omega, beta1 and alpha2 must be positive")
        if self.neighborhood_radius < 0:
            raise ValueError("neighborhood_radius must be >= 0")
        if self.velocity_clamp <= 0.0 or self.init_range <= 0.0:
            raise ValueError("velocity_clamp and init_range must be positive")
        return self

    def to_dict(self):
        return {
            "swarm_size": self.swarm_size,
            "iterations": self.iterations,
            "omega": self.omega,
            "beta1": self.beta1,
            "alpha2": self.alpha2,
            "neighborhood_radius": self.neighborhood_radius,
            "fitness_samples": self.fitness_samples,
            "velocity_clamp": self.velocity_clamp,
            "init_range": self.init_range,
            "seed": self.seed,
        }

    def digest(self):
        """Short stable hash of the configuration, stored in policy files."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class Particle:
    """Swarm member: position and velocity in R^n plus the personal best."""

    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_fitness: float = -math.inf


def init_swarm(n, config, rng):
    particles = []
    for _ in range(config.swarm_size):
        pos = rng.uniform(-config.init_range, config.init_range, n)
        particles.append(Particle(pos, np.zeros(n), pos.copy()))
    return particles


def pso_step(swarm, config, fitness, rng):
    """One swarm iteration, mutating the particles in place.

    fitness(position, rng) is evaluated once per particle on a child
    generator spawned from rng, so evaluations are independent jobs
    whose order cannot affect the result. Personal bests keep the
    fitness value observed at evaluation time.
    """
    if not swarm:
        raise ValueError("empty swarm")
    evaluation_rngs = rng.spawn(len(swarm))
    for particle, sub in zip(swarm, evaluation_rngs):
        observed = fitness(particle.position, sub)
        if observed > particle.best_fitness:
            particle.best_fitness = observed
            particle.best_position = particle.position.copy()

    size = len(swarm)
    radius = min(config.neighborhood_radius, size // 2)
    local_bests = []
    for i in range(size):
        best = swarm[i]
        for d in range(-radius, radius + 1):
            cand = swarm[(i + d) % size]
            if cand.best_fitness > best.best_fitness:
                best = cand
        local_bests.append(best.best_position)

    clamp = config.velocity_clamp
    for particle, lbest in zip(swarm, local_bests):
        xi1 = rng.random(particle.position.size)
        xi2 = rng.random(particle.position.size)
        particle.velocity = (
            config.beta1 * xi1 * (particle.best_position - particle.position)
            + config.alpha2 * xi2 * (lbest - particle.position)
            + particle.velocity
        )
        np.clip(particle.velocity, -clamp, clamp, out=particle.velocity)
        particle.position = config.omega * particle.velocity + particle.position


def train_policy(n, channel=IDEAL, config=None):
    """Maximize Monte Carlo sharpness over n-step policies.

    Returns the best-ever personal best as a Policy, with the fitness
    recorded for it at evaluation time. Fully deterministic given
    config.seed.
    """
    if n < 1:
        raise ValueError("policy length must be >= 1")
    config = (config or PsoConfig()).validate()
    if n > POLICY_LENGTH_SOFT_LIMIT:
        warnings.warn(
            f"policy length {n} exceeds {POLICY_LENGTH_SOFT_LIMIT}; "
            "swarm-trained policies degrade in this regime",
            stacklevel=2,
        )

    master = make_generator([config.seed, 0])
    swarm = init_swarm(n, config, master)
    k_samples = config.fitness_samples

    def fitness(position, sub_rng):
        return _sharpness_of_position(position, channel, k_samples, sub_rng)

    for _ in range(config.iterations):
        pso_step(swarm, config, fitness, master)

    best = max(swarm, key=lambda p: p.best_fitness)
    return Policy(
        best.best_position,
        channel=channel,
        config={"hash": config.digest(), **config.to_dict()},
        sharpness=best.best_fitness,
        seed=config.seed,
    )
