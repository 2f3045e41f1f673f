"""Numeric tolerances and thresholds shared across the package.

All routines that need a tolerance accept an optional :class:`NumericPolicy`;
the module-level :data:`DEFAULT_POLICY` is used when none is given, so the
whole pipeline can be tightened or loosened from a single record.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerance record for the numeric pipeline.

    structural_tol : exact algebraic identities (commutators, round trips)
    eigen_tol      : eigen-residuals and orthonormality checks
    hermiticity_tol: accepted Hermiticity defect of input state matrices
    psd_tol        : eigenvalue floor below which a state counts as unphysical
    max_condition  : refuse a block solve when its effective condition
                     number exceeds this (results would be noise)
    rank_rtol      : singular values below rank_rtol * sigma_max count as zero
    """

    structural_tol: float = 1e-12
    eigen_tol: float = 1e-10
    hermiticity_tol: float = 1e-8
    psd_tol: float = 1e-10
    max_condition: float = 1e12
    rank_rtol: float = 1e-10


DEFAULT_POLICY = NumericPolicy()
