"""Adaptive local measurement of n identical qubit copies.

The strategy measures one copy at a time with the angles of
:func:`qsdr.statemath.angle_schedule`, flipping the angle whenever the
provisional decision flips, and its final provisional bit matches the
collective (entangled) optimum: the n-copy Helstrom bound.  This module
provides

* exact evaluation of the strategy's success probability by enumerating all
  2**n outcome sequences (the independent check against the closed form),
* a seeded Monte Carlo simulation of the same strategy,
* the explicit product measurement vectors, whose Gram matrix is the
  identity on the n-qubit space,
* the one-step posterior recursion that links copy k to copy k+1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple

import numpy as np

from .statemath import AngleSchedule, Priors, angle_schedule, helstrom_bound

__all__ = [
    "MAX_ENUM_COPIES",
    "MAX_VECTOR_COPIES",
    "OutcomeSequence",
    "ProductVector",
    "McEstimate",
    "local_outcome_probs",
    "exact_adaptive_pc",
    "simulate_adaptive",
    "measurement_vectors",
    "posterior_update",
]

# Enumeration works leaf-by-leaf over 2**n sequences; these caps keep the
# arrays (and the kron products for vectors) at desk scale.
MAX_ENUM_COPIES = 20
MAX_VECTOR_COPIES = 10


@dataclass(frozen=True)
class OutcomeSequence:
    """Ordered provisional decisions z_1 .. z_n of one adaptive run."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) == 0:
            raise ValueError("outcome sequence must contain at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"outcome bits must be 0 or 1, got {self.bits}")

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def final(self) -> int:
        """The decision the receiver reports: the last provisional bit."""
        return self.bits[-1]


@dataclass(frozen=True)
class ProductVector:
    """One product measurement vector of the adaptive strategy.

    ``angles[k]`` is the effective detector angle used at copy k+1 along
    this branch of the outcome tree: ``phi_k`` after a previous outcome 0,
    ``pi/2 - phi_k`` after a 1 (the previous outcome for the first copy is
    the start bit).  The copy-k factor is the basis vector the outcome
    ``bits[k]`` projects onto:

        outcome 0 -> (cos a, sin a)
        outcome 1 -> (sin a, -cos a)
    """

    outcome: OutcomeSequence
    angles: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.angles) != len(self.outcome):
            raise ValueError("one angle per measured copy required")

    @property
    def factors(self) -> np.ndarray:
        """(n, 2) array of unit factor vectors."""
        out = np.empty((len(self.angles), 2))
        for k, (a, z) in enumerate(zip(self.angles, self.outcome.bits)):
            c, s = math.cos(a), math.sin(a)
            out[k] = (c, s) if z == 0 else (s, -c)
        return out

    def assemble(self) -> np.ndarray:
        """Full 2**n component vector (kron product of the factors)."""
        return reduce(np.kron, self.factors)


class McEstimate(NamedTuple):
    estimate: float
    stderr: float


def local_outcome_probs(a: int, theta: float, phi: float) -> tuple[float, float]:
    """Outcome distribution of one rotated two-outcome measurement.

    For the qubit pair ``cos(theta)|x> +- sin(theta)|y>`` measured in the
    basis ``{(cos phi, sin phi), (sin phi, -cos phi)}``:

        a = 0:  (cos^2(theta - phi), sin^2(theta - phi))
        a = 1:  (cos^2(theta + phi), sin^2(theta + phi))

    Returns ``(P[z=0], P[z=1])`` given the true state ``a``.
    """
    if a not in (0, 1):
        raise ValueError(f"hypothesis label must be 0 or 1, got {a}")
    if not 0.0 <= theta <= math.pi / 4 + 1e-12:
        raise ValueError(f"theta must lie in [0, pi/4], got {theta}")
    if not 0.0 <= phi <= math.pi / 2 + 1e-12:
        raise ValueError(f"phi must lie in [0, pi/2], got {phi}")
    delta = theta - phi if a == 0 else theta + phi
    p0 = math.cos(delta) ** 2
    return (p0, 1.0 - p0)


def _branch_p0(a: int, theta: float, eff_angles: np.ndarray) -> np.ndarray:
    # Vectorized form of local_outcome_probs' first component.
    delta = theta - eff_angles if a == 0 else theta + eff_angles
    return np.cos(delta) ** 2


def exact_adaptive_pc(priors: Priors, theta: float, n: int) -> float:
    """Exact success probability of the adaptive strategy, by enumeration.

    Sums, over all 2**n outcome sequences, the product of local outcome
    probabilities along the branch, using the angle flip rule of
    :class:`qsdr.statemath.AngleSchedule`, and credits the sequences whose
    final bit equals the true hypothesis.  This deliberately retraces the
    strategy itself rather than the closed form, so agreement with
    :func:`qsdr.statemath.multicopy_bound` is a genuine two-route check.
    """
    if not 1 <= n <= MAX_ENUM_COPIES:
        raise ValueError(f"copy count must lie in 1..{MAX_ENUM_COPIES}, got {n}")
    schedule = angle_schedule(priors, theta, n)
    phis = np.asarray(schedule.phis)
    total = 0.0
    for a, qa in ((0, priors.q0), (1, priors.q1)):
        # probs[i] is the running product along the branch whose outcome
        # prefix is the bits of i (latest outcome in the least significant
        # bit); prev holds that latest outcome.
        probs = np.array([1.0])
        prev = np.array([priors.start_bit], dtype=np.int8)
        for k in range(1, n + 1):
            eff = np.where(prev == 0, phis[k - 1], 0.5 * math.pi - phis[k - 1])
            p0 = _branch_p0(a, theta, eff)
            nxt = np.empty(2 * probs.size)
            nxt[0::2] = probs * p0
            nxt[1::2] = probs * (1.0 - p0)
            probs = nxt
            prev = np.tile(np.array([0, 1], dtype=np.int8), probs.size // 2)
        # Sequences ending in bit a are decided correctly.
        total += qa * probs[a::2].sum()
    return float(total)


def simulate_adaptive(
    priors: Priors, theta: float, n: int, trials: int, seed: int
) -> McEstimate:
    """Monte Carlo run of the adaptive strategy.

    Each trial draws the true hypothesis from the priors, then measures the
    n copies in sequence, updating the provisional bit after each outcome.
    Returns the frequency of correct final decisions and its binomial
    standard error.

    Every trial consumes its own random stream spawned from ``(seed, trial
    index)``, so the estimate is reproducible bit-for-bit regardless of how
    trials are batched or parallelized.
    """
    if not 1 <= n <= MAX_ENUM_COPIES:
        raise ValueError(f"copy count must lie in 1..{MAX_ENUM_COPIES}, got {n}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    schedule = angle_schedule(priors, theta, n)
    half_pi = 0.5 * math.pi
    hits = 0
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        a = 0 if rng.random() < priors.q0 else 1
        z = priors.start_bit
        for k in range(1, n + 1):
            eff = schedule.phis[k - 1] if z == 0 else half_pi - schedule.phis[k - 1]
            delta = theta - eff if a == 0 else theta + eff
            p0 = math.cos(delta) ** 2
            z = 0 if rng.random() < p0 else 1
        hits += z == a
    p = hits / trials
    return McEstimate(p, math.sqrt(p * (1.0 - p) / trials))


def measurement_vectors(priors: Priors, theta: float, n: int) -> list[ProductVector]:
    """All 2**n product vectors realized by the adaptive strategy.

    The strategy, unrolled over every possible outcome sequence, is a
    single product measurement on the n copies; each sequence contributes
    one vector.  Their Gram matrix is the identity: at the first copy where
    two sequences part ways they share the detector angle and pick
    orthogonal basis vectors.
    """
    if not 1 <= n <= MAX_VECTOR_COPIES:
        raise ValueError(f"copy count must lie in 1..{MAX_VECTOR_COPIES}, got {n}")
    schedule = angle_schedule(priors, theta, n)
    vectors = []
    for bits in itertools.product((0, 1), repeat=n):
        prev = priors.start_bit
        angles = []
        for k, z in enumerate(bits, start=1):
            angles.append(schedule.effective_angle(k, prev))
            prev = z
        vectors.append(ProductVector(OutcomeSequence(bits), tuple(angles)))
    return vectors


def posterior_update(pc_prev: float, chi: float) -> float:
    """Success probability after measuring one more copy.

    If the strategy is correct with probability ``pc_prev`` after some
    copies, one further optimally measured copy of overlap ``chi`` lifts it
    to::

        (1 + sqrt(1 - 4*pc_prev*(1 - pc_prev)*chi**2)) / 2

    Iterating from ``max(q0, q1)`` reproduces
    :func:`qsdr.statemath.multicopy_bound` copy by copy.  The fixed point
    at ``pc_prev = 1`` is absorbing.  Requires ``pc_prev >= 1/2``: the
    recursion treats the running decision as the likelier one.
    """
    if not 0.5 <= pc_prev <= 1.0:
        raise ValueError(f"pc_prev must lie in [1/2, 1], got {pc_prev}")
    # One-step Helstrom bound with effective priors (pc_prev, 1 - pc_prev).
    return helstrom_bound(Priors(pc_prev), chi)
