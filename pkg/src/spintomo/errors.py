"""Exceptions raised by the reconstruction pipelines."""

from __future__ import annotations


class IncompleteDataError(ValueError):
    """A measurement set does not cover the grid exactly once per point."""


class SingularBlockError(RuntimeError):
    """A block system is singular or too ill-conditioned to solve."""

    def __init__(self, m: int, r: float, delta: float, condition: float):
        self.m = m
        self.r = r
        self.delta = delta
        self.condition = condition
        super().__init__(
            f"singular block m={m} (r={r}, delta={delta}, condition={condition:.3e}); "
            f"a nonzero azimuthal shift and/or a radial base closer to the default may fix this"
        )


class RankDeficientDesignError(RuntimeError):
    """A cone design does not determine all multipole coefficients."""

    def __init__(self, rank: int, n_unknowns: int):
        self.rank = rank
        self.n_unknowns = n_unknowns
        super().__init__(
            f"cone design is rank deficient (rank {rank} < {n_unknowns} unknowns); "
            f"reconstruction from it is impossible"
        )
