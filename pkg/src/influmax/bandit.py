"""Degree-feedback UCB policies.

d-UCB is a kl-UCB index policy on observed degrees using the Poisson
divergence d(mu, mu') = mu' - mu + mu*log(mu/mu').  The index of an arm is
the largest mean still compatible with its empirical degree mean at
exploration level 3*log(t)/pulls.  d-UCB-double wraps it in geometrically
growing epochs for unknown horizons, enlarging the arm set and restarting
the statistics at every epoch boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import (CapacityError, DomainError, EmptyArmsError,
                     UnknownArmError)
from .graph_models import GraphModel
from .numerics import ceil_exact

# Bisection width tolerance for the index solver, relative to the index
# magnitude.  Tight enough that the divergence residual stays below 1e-8
# even for thresholds near 3*log(1e6).
INDEX_BISECTION_TOL = 1e-10


def exploration_threshold(t: int) -> float:
    """Exploration budget f(t) = 3*log(t), clamped at t = 2 so the threshold
    is always positive (indices are only ever computed for t >= 1)."""
    return 3.0 * math.log(t if t > 2 else 2)


def kl_poisson(mu: float, mu_prime: float) -> float:
    """Poisson divergence d(mu, mu') = mu' - mu + mu*log(mu/mu').

    Zero iff mu == mu_prime; decreasing in mu' below mu and increasing above.
    The convention 0*log(0/x) = 0 applies at mu = 0.
    """
    if not (math.isfinite(mu) and math.isfinite(mu_prime)):
        raise DomainError(f"divergence arguments must be finite, got ({mu}, {mu_prime})")
    if mu < 0:
        raise DomainError(f"mu must be >= 0, got {mu}")
    if mu_prime <= 0:
        raise DomainError(f"mu_prime must be > 0, got {mu_prime}")
    if mu == 0:
        return mu_prime
    value = mu_prime - mu + mu * math.log(mu / mu_prime)
    return value if value > 0.0 else 0.0


def _upper_inverse(mean: float, tau: float) -> float:
    """Largest mu with d(mean, mu) <= tau, by bracketed bisection."""
    if mean <= 0.0:
        return tau  # d(0, mu) = mu
    log = math.log
    lo = mean
    hi = mean + tau + 1.0
    while hi - mean + mean * log(mean / hi) <= tau:
        hi *= 2.0
    while hi - lo > INDEX_BISECTION_TOL * (1.0 + hi):
        mid = 0.5 * (lo + hi)
        if mid - mean + mean * log(mean / mid) <= tau:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ucb_index(mean_estimate: float, pulls: int, t: int) -> float:
    """Optimistic degree index: sup{mu : d(mean_estimate, mu) <= 3*log(t)/pulls}.

    Exactly 3*log(t)/pulls when the empirical mean is zero.
    """
    if not math.isfinite(mean_estimate) or mean_estimate < 0:
        raise DomainError(f"mean_estimate must be finite and >= 0, got {mean_estimate}")
    if pulls < 1:
        raise DomainError(f"pulls must be >= 1, got {pulls}")
    return _upper_inverse(mean_estimate, exploration_threshold(t) / pulls)


@dataclass
class ArmStats:
    """Per-arm pull count and running sum of observed degrees."""

    vertex: int
    pulls: int = 0
    degree_sum: int = 0

    @property
    def mean_degree_estimate(self) -> float:
        return self.degree_sum / self.pulls if self.pulls else 0.0


class DUcbState:
    """Mutable state of one running d-UCB instance (single owner)."""

    def __init__(self, arm_vertices,
                 exploration_threshold_fn: Callable[[int], float] = exploration_threshold):
        arm_vertices = list(arm_vertices)
        if not arm_vertices:
            raise EmptyArmsError("d-UCB needs at least one arm")
        if len(set(arm_vertices)) != len(arm_vertices):
            raise ValueError("duplicate vertices in arm set")
        self.arms = [ArmStats(int(v)) for v in arm_vertices]
        self.round = 0
        self.exploration_threshold_fn = exploration_threshold_fn
        self._by_vertex = {arm.vertex: arm for arm in self.arms}

    @property
    def arm_vertices(self):
        return [arm.vertex for arm in self.arms]

    def pull_counts(self) -> dict:
        return {arm.vertex: arm.pulls for arm in self.arms}


def select_arm(state: DUcbState) -> int:
    """Arm with the maximal index; ties broken by fewest pulls, then lowest id."""
    if not state.arms:
        raise EmptyArmsError("cannot select from an empty arm set")
    t = state.round
    threshold = state.exploration_threshold_fn(t)
    best_vertex = -1
    best_key = None
    for arm in state.arms:
        if arm.pulls < 1:
            raise DomainError(
                f"arm {arm.vertex} has no pulls yet; initialize every arm first")
        index = _upper_inverse(arm.degree_sum / arm.pulls, threshold / arm.pulls)
        key = (index, -arm.pulls, -arm.vertex)
        if best_key is None or key > best_key:
            best_key = key
            best_vertex = arm.vertex
    return best_vertex


def update(state: DUcbState, vertex: int, observed_degree: int) -> None:
    """Fold one observed degree into the arm's running mean."""
    arm = state._by_vertex.get(vertex)
    if arm is None:
        raise UnknownArmError(f"vertex {vertex} is not in the arm set")
    if observed_degree < 0:
        raise DomainError(f"observed degree must be >= 0, got {observed_degree}")
    arm.degree_sum += int(observed_degree)
    arm.pulls += 1
    state.round += 1


def subsample_size(T, alpha: float) -> int:
    """Arm-set size ceil(log(T) / log(1/(1-alpha))) for horizon T and
    quantile alpha.  Callers cap the result at n."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if T < 2:
        raise DomainError(f"horizon must be >= 2, got {T}")
    return ceil_exact(math.log(T) / math.log(1.0 / (1.0 - alpha)))


class PullRecord(NamedTuple):
    """One logged pull.  Epoch is 0 for fixed-horizon runs."""

    round: int
    epoch: int
    vertex: int
    degree: int
    component_size: int


def _default_environment(model: GraphModel, rng):
    from .components import lazy_explore

    def environment(vertex):
        outcome = lazy_explore(model, vertex, rng)
        return outcome.degree, outcome.component_size
    return environment


def _run_core(arm_vertices, budget, environment):
    """Initialization pulls in listed order, then index rounds, for at most
    ``budget`` pulls in total."""
    state = DUcbState(arm_vertices)
    log = []
    for vertex in state.arm_vertices:
        if state.round >= budget:
            break
        deg, comp = environment(vertex)
        update(state, vertex, deg)
        log.append((vertex, deg, comp))
    while state.round < budget:
        vertex = select_arm(state)
        deg, comp = environment(vertex)
        update(state, vertex, deg)
        log.append((vertex, deg, comp))
    return state, log


def run_ducb(model: GraphModel, arm_set, T: int, rng,
             environment=None):
    """Run d-UCB on a fixed arm set for T rounds.

    Rounds 1..len(arm_set) pull each arm once in listed order; the remaining
    rounds select by index.  The environment callback maps a vertex to its
    observed (degree, component_size); by default it lazily explores the
    model with ``rng``.  Returns (records, final state).
    """
    arm_set = list(arm_set)
    if len(arm_set) > T:
        raise CapacityError(
            f"arm set of size {len(arm_set)} does not fit in horizon T={T}")
    if environment is None:
        environment = _default_environment(model, rng)
    state, log = _run_core(arm_set, T, environment)
    records = [PullRecord(i + 1, 0, v, d, c) for i, (v, d, c) in enumerate(log)]
    return records, state


@dataclass(frozen=True)
class EpochRecord:
    """One doubling epoch: its round range, the freshly sampled batch, the
    cumulative arm set, and the epoch's final (fresh-started) statistics."""

    k: int
    t_start: int
    t_end: int
    sampled: tuple
    arm_set: tuple
    final_state: DUcbState


@dataclass(frozen=True)
class EpochSchedule:
    """Doubling schedule: epoch k covers rounds [beta^(k-1), beta^k - 1]
    (floors for non-integer beta), the last epoch truncated at T."""

    beta: float
    batch_size: int
    epochs: tuple


def run_ducb_double(model: GraphModel, T: int, beta: float, alpha: float,
                    rng, environment=None):
    """Doubling-epoch d-UCB for unknown horizons.

    Epoch k samples a fresh batch of ceil(log(beta)/log(1/(1-alpha))) arms
    uniformly without replacement from all vertices, unions it into the
    cumulative arm set, and runs a brand-new d-UCB instance on that set for
    the epoch's rounds.  Collisions with earlier batches are kept as-is, so
    the arm set may grow by less than the batch size.
    """
    if beta < 2:
        raise DomainError(f"beta must be >= 2, got {beta}")
    if T < 1:
        raise DomainError(f"horizon must be >= 1, got {T}")
    if environment is None:
        environment = _default_environment(model, rng)
    n = model.params.n
    batch_size = subsample_size(beta, alpha)
    arm_set: set = set()
    records = []
    epochs = []
    k = 0
    while True:
        k += 1
        t_start = int(math.floor(beta ** (k - 1)))
        if t_start > T:
            break
        t_end = min(int(math.floor(beta ** k)) - 1, T)
        sampled = sorted(int(v) for v in
                         rng.choice(n, size=min(batch_size, n), replace=False))
        arm_set |= set(sampled)
        epoch_arms = sorted(arm_set)
        budget = t_end - t_start + 1
        state, log = _run_core(epoch_arms, budget, environment)
        records.extend(
            PullRecord(t_start + i, k, v, d, c) for i, (v, d, c) in enumerate(log))
        epochs.append(EpochRecord(k, t_start, t_end, tuple(sampled),
                                  tuple(epoch_arms), state))
        if t_end >= T:
            break
    return records, EpochSchedule(beta, batch_size, tuple(epochs))
