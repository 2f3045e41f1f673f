"""Spin bookkeeping, spin operator matrices, rotations, density matrices.

Spin magnitudes are stored exactly as the integer ``2s`` so that half-integer
spins never touch floating point. The Hilbert space has dimension ``2s + 1``
and every matrix in the package is written in the basis of ``sz`` eigenstates
ordered by ``k = s - mu`` (row 0 is the maximal projection ``mu = +s``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .policy import DEFAULT_POLICY


@dataclass(frozen=True)
class TwiceSpin:
    """Spin magnitude, stored as the integer ``2s``."""

    twice_s: int

    def __post_init__(self) -> None:
        if not isinstance(self.twice_s, (int, np.integer)) or self.twice_s < 0:
            raise ValueError(f"twice_s must be a nonnegative integer, got {self.twice_s!r}")
        object.__setattr__(self, "twice_s", int(self.twice_s))

    @classmethod
    def of(cls, value: "TwiceSpin | int") -> "TwiceSpin":
        return value if isinstance(value, TwiceSpin) else cls(value)

    @property
    def dim(self) -> int:
        return self.twice_s + 1

    @property
    def spin(self) -> float:
        """The spin value s (exact: half-integers are binary floats)."""
        return self.twice_s / 2

    def is_fermionic(self) -> bool:
        return self.twice_s % 2 == 1

    def mu(self, k: int) -> float:
        """Projection quantum number for basis index k = s - mu."""
        return (self.twice_s - 2 * k) / 2


@dataclass(frozen=True)
class Direction:
    """A spatial direction (theta, phi) with its stereographic coordinate.

    ``z = tan(theta/2) * exp(i phi)`` maps the sphere minus the south pole
    onto the complex plane. ``theta = pi`` itself is representable as a
    Direction but has no finite z; the measurement grids never produce it.
    """

    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))
        object.__setattr__(self, "theta", float(self.theta))

    @classmethod
    def from_stereographic(cls, z: complex) -> "Direction":
        z = complex(z)
        return cls(theta=2 * math.atan(abs(z)), phi=math.atan2(z.imag, z.real))

    @property
    def z(self) -> complex:
        if self.theta == math.pi:
            raise ValueError("stereographic coordinate is undefined at theta = pi")
        return math.tan(self.theta / 2) * complex(math.cos(self.phi), math.sin(self.phi))

    @property
    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )


@dataclass(frozen=True)
class SpinOperators:
    """The matrices sx, sy, sz and the ladder operators for one spin."""

    twice_s: TwiceSpin
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    s_plus: np.ndarray
    s_minus: np.ndarray


def build_spin_operators(s: TwiceSpin | int) -> SpinOperators:
    """Construct the spin matrices in the k = s - mu basis.

    Ladder matrix elements are sqrt(s(s+1) - mu(mu+1)), evaluated from
    integer arithmetic on 2s and 2mu so half-integer spins stay exact:
    s(s+1) - mu(mu+1) = (ts(ts+2) - tmu(tmu+2)) / 4.
    """
    s = TwiceSpin.of(s)
    ts, n = s.twice_s, s.dim
    s_plus = np.zeros((n, n), dtype=complex)
    for k in range(1, n):
        tmu = ts - 2 * k
        s_plus[k - 1, k] = 0.5 * math.sqrt(ts * (ts + 2) - tmu * (tmu + 2))
    s_minus = s_plus.conj().T
    sx = 0.5 * (s_plus + s_minus)
    sy = (s_plus - s_minus) / 2j
    sz = np.diag([(ts - 2 * k) / 2 for k in range(n)]).astype(complex)
    return SpinOperators(twice_s=s, sx=sx, sy=sy, sz=sz, s_plus=s_plus, s_minus=s_minus)


def rotation_operator(s: TwiceSpin | int, d: Direction) -> np.ndarray:
    """Unitary taking the +z axis onto direction d.

    Returns exp(-i theta m(phi).S) with m(phi) = (-sin phi, cos phi, 0),
    computed by eigendecomposition of the Hermitian generator. Column k is
    the eigenvector of n.S with eigenvalue mu = s - k.
    """
    s = TwiceSpin.of(s)
    ops = build_spin_operators(s)
    gen = -math.sin(d.phi) * ops.sx + math.cos(d.phi) * ops.sy
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(-1j * d.theta * w)) @ v.conj().T


def eigenbasis_of_axis(s: TwiceSpin | int, d: Direction) -> list[tuple[float, np.ndarray]]:
    """Eigenstates of n.S along direction d as (mu, statevector) pairs.

    The vectors are the columns of :func:`rotation_operator`, labelled
    mu = s, s-1, ..., -s in column order.
    """
    s = TwiceSpin.of(s)
    u = rotation_operator(s, d)
    return [(s.mu(k), u[:, k].copy()) for k in range(s.dim)]


@dataclass
class DensityMatrix:
    """A (2s+1) x (2s+1) state matrix in the k = s - mu basis.

    entries[k', k] holds the matrix element between projections mu' = s - k'
    and mu = s - k. Instances are treated as immutable once built.
    """

    twice_s: TwiceSpin
    entries: np.ndarray

    def __post_init__(self) -> None:
        self.twice_s = TwiceSpin.of(self.twice_s)
        entries = np.asarray(self.entries, dtype=complex)
        n = self.twice_s.dim
        if entries.shape != (n, n):
            raise ValueError(
                f"entries shape {entries.shape} does not match dimension {n} for twice_s={self.twice_s.twice_s}"
            )
        self.entries = entries

    @property
    def dim(self) -> int:
        return self.twice_s.dim

    def to_json_dict(self) -> dict:
        return {
            "twice_s": self.twice_s.twice_s,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DensityMatrix":
        entries = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        return cls(twice_s=TwiceSpin(int(data["twice_s"])), entries=entries)


@dataclass(frozen=True)
class DensityReport:
    """Validation summary for a candidate density matrix."""

    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    normalized: bool
    physical: bool


def validate_density(rho: DensityMatrix, tol: float = DEFAULT_POLICY.structural_tol) -> DensityReport:
    """Measure Hermiticity defect, trace defect and the minimum eigenvalue.

    The defect convention is max |A - A^dag| / 2 entrywise; the eigenvalue is
    taken from the Hermitian part. ``normalized`` and ``physical`` hold when
    the respective defects stay within ``tol``.
    """
    a = rho.entries
    herm_defect = float(np.abs(a - a.conj().T).max()) / 2
    trace_defect = float(abs(np.trace(a) - 1.0))
    min_eig = float(np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0])
    return DensityReport(
        hermiticity_defect=herm_defect,
        trace_defect=trace_defect,
        min_eigenvalue=min_eig,
        normalized=trace_defect <= tol,
        physical=herm_defect <= tol and min_eig >= -tol,
    )


def random_density(
    s: TwiceSpin | int,
    seed: int | np.random.Generator,
    purity: float | None = None,
) -> DensityMatrix:
    """Seeded random test state.

    With ``purity=None`` draws a complex Ginibre matrix G and returns
    G G^dag / Tr(G G^dag), which is Hermitian, positive and full rank almost
    surely. ``purity=1`` returns the projector onto a random statevector;
    intermediate values blend that projector with the maximally mixed state
    (``purity`` is the blend weight, not Tr rho^2).
    """
    s = TwiceSpin.of(s)
    n = s.dim
    rng = np.random.default_rng(seed)
    if purity is None:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        return DensityMatrix(twice_s=s, entries=rho)
    if not 0.0 < purity <= 1.0:
        raise ValueError(f"purity must lie in (0, 1], got {purity}")
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi /= np.linalg.norm(psi)
    projector = np.outer(psi, psi.conj())
    rho = purity * projector + (1.0 - purity) * np.eye(n) / n
    return DensityMatrix(twice_s=s, entries=rho)


def maximally_mixed(s: TwiceSpin | int) -> DensityMatrix:
    s = TwiceSpin.of(s)
    return DensityMatrix(twice_s=s, entries=np.eye(s.dim, dtype=complex) / s.dim)
