"""Finite-shot Monte Carlo CHSH experiments with depolarizing noise,
plus the exhaustive local-hidden-variable bound."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels, tensor
from .errors import NotDichotomicError
from .quantum import ChshSettings, DensityMatrix, PureState, spin_observable

PAIR_LABELS = ("ab", "abp", "apb", "apbp")
#: signs combining the four correlators into S
PAIR_SIGNS = (1.0, 1.0, 1.0, -1.0)


@dataclass(frozen=True)
class ShotPlan:
    """How many shots per setting pair, the stream seed, and the noise."""

    shots_per_pair: int
    seed: int = 42
    noise_p: float = 0.0

    def __post_init__(self):
        if self.shots_per_pair < 1:
            raise ValueError("shots_per_pair must be at least 1")
        if not 0.0 <= self.noise_p <= 1.0:
            raise ValueError("noise_p must lie in [0, 1]")


@dataclass(frozen=True)
class CountsTable:
    """Outcome counts per setting pair, binned by outcome sign.

    ``counts[label]`` is [n(+,+), n(+,-), n(-,+), n(-,-)].
    """

    counts: dict
    shots_per_pair: int

    def __post_init__(self):
        for label, row in self.counts.items():
            row = np.asarray(row, dtype=np.int64)
            if row.shape != (4,) or row.min() < 0 or row.sum() != self.shots_per_pair:
                raise ValueError(f"invalid counts for pair {label}")


@dataclass(frozen=True)
class ChshEstimate:
    """Shot-based estimate of S with a plug-in standard error."""

    s_hat: float
    stderr: float
    counts: CountsTable
    correlators: dict


def depolarize(state: PureState, p: float) -> DensityMatrix:
    """Depolarizing channel rho = (1-p) |psi><psi| + p I/4."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarizing probability must lie in [0, 1]")
    psi = state.amplitudes
    rho = (1.0 - p) * np.outer(psi, psi.conj()) + p * np.eye(4) / 4.0
    return DensityMatrix(rho)


def _dichotomic_branches(obs: np.ndarray):
    """Eigenvalues (descending) and projectors of a dichotomic observable."""
    eig = tensor.eig_hermitian(obs)
    if abs(eig.values[1] - eig.values[0]) < 1e-12:
        raise NotDichotomicError("observable has a single degenerate eigenvalue")
    # descending: "+" outcome first
    vals = eig.values[::-1]
    projectors = [np.outer(eig.vectors[:, k], eig.vectors[:, k].conj())
                  for k in (1, 0)]
    return vals, projectors


def joint_probabilities(rho: DensityMatrix, obs_a: np.ndarray, obs_b: np.ndarray):
    """Born probabilities for the four joint outcomes, ordered
    (+,+), (+,-), (-,+), (-,-), with the actual outcome eigenvalues."""
    vals_a, proj_a = _dichotomic_branches(obs_a)
    vals_b, proj_b = _dichotomic_branches(obs_b)
    probs = np.empty(4)
    outcomes = np.empty((4, 2))
    for idx, (i, j) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        probs[idx] = max(0.0, float(np.trace(
            rho.matrix @ tensor.kron(proj_a[i], proj_b[j])).real))
        outcomes[idx] = (vals_a[i], vals_b[j])
    return probs, outcomes


def measure_pair(rho: DensityMatrix, obs_a: np.ndarray, obs_b: np.ndarray,
                 draw: float):
    """One joint measurement, driven by a uniform draw in [0, 1).

    Returns the pair of outcome eigenvalues, so scaled spectra propagate
    unbiasedly into correlators.
    """
    probs, outcomes = joint_probabilities(rho, obs_a, obs_b)
    acc = 0.0
    for idx in range(3):
        acc += probs[idx]
        if draw < acc:
            return tuple(outcomes[idx])
    return tuple(outcomes[3])


def default_observables(s: ChshSettings):
    """The four uncorrected spin observables [A, A', B, B']."""
    return [spin_observable(d) for d in (s.a, s.a_prime, s.b, s.b_prime)]


def estimate_chsh(state: PureState, s: ChshSettings, plan: ShotPlan,
                  observables=None) -> ChshEstimate:
    """Estimate S from N shots per setting pair.

    Shot k of pair j consumes the counter-derived uniform at global
    stream index j*N + k, which makes the estimate reproducible for a
    given seed independent of evaluation order.
    """
    if observables is None:
        observables = default_observables(s)
    obs_a, obs_ap, obs_b, obs_bp = observables
    rho = depolarize(state, plan.noise_p)
    n = plan.shots_per_pair
    pairs = ((obs_a, obs_b), (obs_a, obs_bp), (obs_ap, obs_b), (obs_ap, obs_bp))
    counts = {}
    correlators = {}
    s_hat = 0.0
    var_sum = 0.0
    for j, ((oa, ob), label, sign) in enumerate(zip(pairs, PAIR_LABELS, PAIR_SIGNS)):
        probs, outcomes = joint_probabilities(rho, oa, ob)
        cumulative = np.minimum(np.cumsum(probs)[:3], 1.0)
        row = kernels.sample_counts(plan.seed, j * n, n, cumulative)
        products = outcomes[:, 0] * outcomes[:, 1]
        e_hat = float(row @ products) / n
        counts[label] = row
        correlators[label] = e_hat
        s_hat += sign * e_hat
        var_sum += max(0.0, 1.0 - e_hat * e_hat)
    table = CountsTable(counts=counts, shots_per_pair=n)
    return ChshEstimate(s_hat=s_hat, stderr=math.sqrt(var_sum / n),
                        counts=table, correlators=correlators)


def lhv_max():
    """Exhaust all 16 deterministic strategies of the CHSH game.

    Returns the maximum S and the full strategy table
    [(a, a', b, b', S), ...].
    """
    strategies = []
    best = -math.inf
    for a, ap, b, bp in itertools.product((1, -1), repeat=4):
        s = a * (b + bp) + ap * (b - bp)
        strategies.append((a, ap, b, bp, float(s)))
        best = max(best, float(s))
    return best, strategies
