"""Spin-coherent states, the forward probability kernel, outcome sampling.

A coherent state along direction n is the rotated maximal-projection state.
In the stereographic coordinate z it expands over the sz basis as

    amp[k] = binom(2s, k)^(1/2) * z^k / (1 + |z|^2)^s,   k = s - mu,

so the probability of the maximal Stern-Gerlach outcome is the expectation
p_s(n) = <s,n| rho |s,n>, which is linear in rho. Full outcome distributions
p_mu(n) come from the rotated eigenbasis and feed multinomial shot sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .policy import DEFAULT_POLICY, NumericPolicy
from .spin import DensityMatrix, Direction, TwiceSpin, rotation_operator


@dataclass(frozen=True)
class CoherentState:
    twice_s: TwiceSpin
    amplitudes: np.ndarray
    direction: Direction


@dataclass(frozen=True)
class OutcomeDistribution:
    """Stern-Gerlach outcome probabilities along one axis, indexed k = s - mu."""

    twice_s: TwiceSpin
    direction: Direction
    probs: np.ndarray


def _coherent_amplitudes(ts: int, theta: float, phi: float) -> np.ndarray:
    # Magnitudes in log space: stays finite for large spin and theta near pi.
    if theta >= math.pi:
        raise ValueError("coherent state undefined at theta = pi (z at infinity)")
    t = math.tan(theta / 2)
    amps = np.zeros(ts + 1, dtype=complex)
    if t == 0.0:
        amps[0] = 1.0
        return amps
    k = np.arange(ts + 1)
    log_binom = np.array([math.lgamma(ts + 1) - math.lgamma(i + 1) - math.lgamma(ts - i + 1) for i in k])
    log_mag = 0.5 * log_binom + k * math.log(t) - (ts / 2) * math.log1p(t * t)
    amps[:] = np.exp(log_mag) * np.exp(1j * phi * k)
    return amps


def coherent_state(s: TwiceSpin | int, d: Direction) -> CoherentState:
    """Coherent state along d via the stereographic expansion.

    Agrees with the first column of :func:`rotation_operator` (the rotated
    maximal-projection state); the two constructions are cross-checked in
    the test suite.
    """
    s = TwiceSpin.of(s)
    return CoherentState(twice_s=s, amplitudes=_coherent_amplitudes(s.twice_s, d.theta, d.phi), direction=d)


def _check_hermitian(rho: DensityMatrix, policy: NumericPolicy) -> None:
    defect = np.abs(rho.entries - rho.entries.conj().T).max() / 2
    if defect > policy.hermiticity_tol:
        raise ValueError(f"state matrix is not Hermitian (defect {defect:.3e})")


def coherent_probability(
    rho: DensityMatrix, d: Direction, policy: NumericPolicy = DEFAULT_POLICY
) -> float:
    """Probability of the maximal outcome mu = s along direction d."""
    _check_hermitian(rho, policy)
    a = _coherent_amplitudes(rho.twice_s.twice_s, d.theta, d.phi)
    return float(np.real(a.conj() @ rho.entries @ a))


def coherent_probabilities(
    rho: DensityMatrix, directions: list[Direction], policy: NumericPolicy = DEFAULT_POLICY
) -> np.ndarray:
    """Batch version of :func:`coherent_probability`, ordered like the input."""
    _check_hermitian(rho, policy)
    ts = rho.twice_s.twice_s
    amps = np.array([_coherent_amplitudes(ts, d.theta, d.phi) for d in directions])
    return np.einsum("ij,jk,ik->i", amps.conj(), rho.entries, amps).real


def outcome_distribution(
    rho: DensityMatrix, d: Direction, policy: NumericPolicy = DEFAULT_POLICY
) -> OutcomeDistribution:
    """All 2s+1 outcome probabilities along d, computed from the rotated basis.

    Requires a Hermitian rho; near-physical states produce probabilities
    correct to rounding. No clamping happens here: slightly negative values
    from an unphysical rho are passed through and rejected at sampling time.
    """
    _check_hermitian(rho, policy)
    u = rotation_operator(rho.twice_s, d)
    probs = np.einsum("ji,jk,ki->i", u.conj(), rho.entries, u).real
    return OutcomeDistribution(twice_s=rho.twice_s, direction=d, probs=probs)


@dataclass(frozen=True)
class CountSample:
    """Multinomial counts for one direction; ``exact`` marks shots = 0 mode."""

    shots: int
    exact: bool
    counts: np.ndarray | None

    def frequencies(self) -> np.ndarray:
        if self.exact or self.counts is None:
            raise ValueError("no counts in exact mode")
        return self.counts / self.shots


def sample_counts(
    dist: OutcomeDistribution,
    shots: int,
    seed: int | np.random.Generator,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> CountSample:
    """Draw multinomial outcome counts; shots = 0 means exact mode (no draw).

    Refuses distributions with probabilities below -psd_tol (unphysical
    state). Negative rounding dust within tolerance is zeroed and the vector
    renormalized for the draw only; the stored probabilities are untouched.
    """
    if shots < 0:
        raise ValueError("shots must be nonnegative")
    if shots == 0:
        return CountSample(shots=0, exact=True, counts=None)
    p = np.asarray(dist.probs, dtype=float)
    if p.min() < -policy.psd_tol:
        raise ValueError(f"refusing to sample an unphysical distribution (min prob {p.min():.3e})")
    if abs(p.sum() - 1.0) > 1e3 * policy.eigen_tol:
        raise ValueError(f"outcome probabilities sum to {p.sum()!r}, not 1")
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, p)
    return CountSample(shots=shots, exact=False, counts=counts)
