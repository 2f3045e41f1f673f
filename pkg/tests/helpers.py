"""Shared test utilities: exact measurement sets and random inputs."""

from __future__ import annotations

import math

import numpy as np

from spintomo import (
    CoherentRecord,
    DensityMatrix,
    Direction,
    GridSpec,
    MeasurementSet,
    TwiceSpin,
    build_grid,
    coherent_probabilities,
)


def exact_measurement(rho: DensityMatrix, spec: GridSpec) -> MeasurementSet:
    """Exact coherent-state probabilities for every grid point."""
    grid = build_grid(spec)
    probs = coherent_probabilities(rho, grid.directions)
    records = [
        CoherentRecord(
            q=pt.q,
            r_index=pt.r_index,
            theta=pt.direction.theta,
            phi=pt.direction.phi,
            p_s=float(p),
            shots=0,
        )
        for pt, p in zip(grid.points, probs)
    ]
    return MeasurementSet(twice_s=rho.twice_s, mode="coherent", records=records, grid=spec)


def random_direction(rng: np.random.Generator, theta_max: float = 0.97 * math.pi) -> Direction:
    """Random direction, bounded away from the excluded south pole."""
    return Direction(theta=float(rng.uniform(0.0, theta_max)), phi=float(rng.uniform(0.0, 2 * math.pi)))


def outcome_probs_on_design(rho: DensityMatrix, design) -> np.ndarray:
    """Full outcome distributions over a cone design, shaped (cones, azimuths, dim)."""
    from spintomo import outcome_distribution

    probs = np.zeros((len(design.thetas), design.azimuth_count, rho.twice_s.dim))
    for j, theta in enumerate(design.thetas):
        for a, phi in enumerate(design.azimuths):
            probs[j, a] = outcome_distribution(rho, Direction(theta=theta, phi=float(phi))).probs
    return probs


def _ln_big(n: int) -> float:
    """Natural log of a positive integer of any size."""
    if n.bit_length() <= 512:
        return math.log(n)
    shift = n.bit_length() - 64
    return math.log(n >> shift) + shift * math.log(2)


def exact_block_logdet(twice_s: int, m: int, r_num: int, r_den: int) -> tuple[int, float]:
    """Exact-arithmetic LU determinant of a zero-shift block system.

    For integer spin, delta = 0 and rational r the block matrix is exactly
    rational, so Gaussian elimination over fractions gives the determinant
    with no rounding at all. Returns (sign, ln |det|). Serves as the oracle
    for the closed-form determinant, where float LU cannot reach the required
    tolerance (its forward error grows with the block condition number).
    """
    from fractions import Fraction

    if twice_s % 2 != 0:
        raise ValueError("exact path needs integer spin (integer row exponents)")
    n = twice_s + 1
    s_int = twice_s // 2
    r = Fraction(r_num, r_den)
    nodes = [r ** (2 * k + m) if k <= twice_s - m else r ** (2 * k + m - n) for k in range(n)]
    a = [[nodes[k] ** (s_int - q) for k in range(n)] for q in range(n)]
    sign = 1
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return 0, -math.inf
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        det *= a[col][col]
        for i in range(col + 1, n):
            f = a[i][col] / a[col][col]
            if f:
                for j in range(col, n):
                    a[i][j] -= f * a[col][j]
    if det < 0:
        sign, det = -sign, -det
    return sign, _ln_big(det.numerator) - _ln_big(det.denominator)
