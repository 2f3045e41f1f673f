"""Multipole expansion of spin states and cone-based reconstruction.

A spin-s state expands over (2s+1)^2 orthogonal multipole operators K_lm,

    rho = 1/(2s+1) * sum_{l=0..2s} sum_{|m|<=l} c_lm K_lm,
    c_lm = Tr[rho K_lm^dag],
    <s,mu'| K_lm |s,mu> = sqrt(2l+1) * <s mu, l m | s mu'>,

with Condon-Shortley Clebsch-Gordan coefficients, so that
Tr[K_lm^dag K_l'm'] = (2s+1) delta_ll' delta_mm'. For every direction the
combination

    Pi_l(theta, phi) = sqrt(2s+1) * sum_mu (-1)^(s-mu) <s mu, s -mu | l 0>
                       * p_mu(theta, phi)

is measurable from a full Stern-Gerlach outcome distribution and equals the
band-l part of the harmonic expansion sqrt(4pi/(2l+1)) sum_m Y_lm c_lm. The
two routes are checked against each other in the tests.

Sampling Pi_l on a single cone with only 2s+1 azimuths aliases Fourier modes
m and m -+ (2s+1) (the coefficients carry |m| up to 2s, not s), so that
design cannot be inverted; 4s+1 azimuths per cone restore orthogonality and
2s+1 distinct cones then determine every coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coherent import OutcomeDistribution
from .diagnostics import ReconDiagnostics, finalize_reconstruction
from .errors import RankDeficientDesignError
from .harmonics import ylm
from .policy import DEFAULT_POLICY, NumericPolicy
from .spin import DensityMatrix, TwiceSpin

MAX_TWICE_S = 40  # factorial sums lose double precision beyond this


@lru_cache(maxsize=None)
def _lnf(n: int) -> float:
    """Cached log-factorial."""
    if n < 0:
        raise ValueError("factorial of negative integer")
    return math.lgamma(n + 1)


def clebsch_gordan(tj1: int, tm1: int, tj2: int, tm2: int, tj: int, tm: int) -> float:
    """Clebsch-Gordan coefficient <j1 m1, j2 m2 | J M> in twice-integer units.

    All six arguments are 2x the physical quantum numbers, so half-integer
    momenta stay exact. Couplings violating a selection rule (M != m1+m2,
    triangle inequality, projection out of range or of wrong parity) return
    0 rather than raising. Condon-Shortley phases; evaluated by the standard
    alternating factorial sum over cached log-factorials.
    """
    for tj_i, tm_i in ((tj1, tm1), (tj2, tm2), (tj, tm)):
        if tj_i < 0 or abs(tm_i) > tj_i or (tj_i + tm_i) % 2 != 0:
            return 0.0
    if tm != tm1 + tm2:
        return 0.0
    if (tj1 + tj2 + tj) % 2 != 0:
        return 0.0
    if tj < abs(tj1 - tj2) or tj > tj1 + tj2:
        return 0.0

    a = (tj1 + tj2 - tj) // 2
    b = (tj1 - tj2 + tj) // 2
    c = (-tj1 + tj2 + tj) // 2
    log_pref = 0.5 * (
        math.log(tj + 1)
        + _lnf(a) + _lnf(b) + _lnf(c) - _lnf((tj1 + tj2 + tj) // 2 + 1)
        + _lnf((tj + tm) // 2) + _lnf((tj - tm) // 2)
        + _lnf((tj1 - tm1) // 2) + _lnf((tj1 + tm1) // 2)
        + _lnf((tj2 - tm2) // 2) + _lnf((tj2 + tm2) // 2)
    )

    p1 = (tj1 - tm1) // 2
    p2 = (tj2 + tm2) // 2
    q1 = (tj - tj2 + tm1) // 2
    q2 = (tj - tj1 - tm2) // 2
    t_min = max(0, -q1, -q2)
    t_max = min(a, p1, p2)
    if t_max < t_min:
        return 0.0
    log_terms = [
        log_pref - (_lnf(t) + _lnf(a - t) + _lnf(p1 - t) + _lnf(p2 - t) + _lnf(q1 + t) + _lnf(q2 + t))
        for t in range(t_min, t_max + 1)
    ]
    peak = max(log_terms)
    total = sum(
        (-1) ** t * math.exp(lt - peak)
        for t, lt in zip(range(t_min, t_max + 1), log_terms)
    )
    return total * math.exp(peak)


def multipole_operator(s: TwiceSpin | int, l: int, m: int) -> np.ndarray:
    """The operator K_lm as a (2s+1) x (2s+1) matrix in the k = s - mu basis."""
    s = TwiceSpin.of(s)
    ts, n = s.twice_s, s.dim
    if ts > MAX_TWICE_S:
        raise ValueError(f"twice_s={ts} exceeds the supported cap {MAX_TWICE_S}")
    if not (0 <= l <= ts):
        raise ValueError(f"l must lie in [0, 2s] = [0, {ts}], got {l}")
    if abs(m) > l:
        raise ValueError(f"|m| must not exceed l={l}, got m={m}")
    k_op = np.zeros((n, n), dtype=complex)
    root = math.sqrt(2 * l + 1)
    for k in range(n):
        kp = k - m  # row index of mu' = mu + m
        if 0 <= kp < n:
            tmu = ts - 2 * k
            k_op[kp, k] = root * clebsch_gordan(ts, tmu, 2 * l, 2 * m, ts, tmu + 2 * m)
    return k_op


@dataclass(frozen=True)
class MultipoleCoefficients:
    """Expansion coefficients c_lm, 0 <= l <= 2s, -l <= m <= l."""

    twice_s: TwiceSpin
    values: dict[tuple[int, int], complex]

    def get(self, l: int, m: int) -> complex:
        return self.values[(l, m)]

    def to_json_dict(self) -> dict:
        coeffs = [
            {"l": l, "m": m, "re": v.real, "im": v.imag}
            for (l, m), v in sorted(self.values.items())
        ]
        return {"twice_s": self.twice_s.twice_s, "coeffs": coeffs}

    @classmethod
    def from_json_dict(cls, data: dict) -> "MultipoleCoefficients":
        values = {
            (int(c["l"]), int(c["m"])): complex(float(c["re"]), float(c["im"]))
            for c in data["coeffs"]
        }
        return cls(twice_s=TwiceSpin(int(data["twice_s"])), values=values)


def rho_to_multipoles(rho: DensityMatrix) -> MultipoleCoefficients:
    """Coefficients c_lm = Tr[rho K_lm^dag] of the multipole expansion."""
    ts = rho.twice_s.twice_s
    values = {}
    for l in range(ts + 1):
        for m in range(-l, l + 1):
            k_op = multipole_operator(rho.twice_s, l, m)
            values[(l, m)] = complex(np.vdot(k_op, rho.entries))
    return MultipoleCoefficients(twice_s=rho.twice_s, values=values)


def multipoles_to_rho(coeffs: MultipoleCoefficients) -> DensityMatrix:
    """Invert :func:`rho_to_multipoles`: rho = 1/(2s+1) sum c_lm K_lm."""
    s = coeffs.twice_s
    acc = np.zeros((s.dim, s.dim), dtype=complex)
    for (l, m), v in coeffs.values.items():
        acc += v * multipole_operator(s, l, m)
    return DensityMatrix(twice_s=s, entries=acc / s.dim)


def _pi_weights(ts: int, l: int) -> np.ndarray:
    """Weights turning an outcome distribution into Pi_l (index k = s - mu)."""
    root = math.sqrt(ts + 1)
    return np.array(
        [
            root * (-1) ** k * clebsch_gordan(ts, ts - 2 * k, ts, -(ts - 2 * k), 2 * l, 0)
            for k in range(ts + 1)
        ]
    )


def pi_l_from_probabilities(dist: OutcomeDistribution, l: int) -> float:
    """The measurable combination Pi_l from one full outcome distribution."""
    ts = dist.twice_s.twice_s
    if not (0 <= l <= ts):
        raise ValueError(f"l must lie in [0, 2s] = [0, {ts}], got {l}")
    return float(_pi_weights(ts, l) @ dist.probs)


def pi_l_from_multipoles(coeffs: MultipoleCoefficients, l: int, theta: float, phi: float) -> complex:
    """Pi_l evaluated through the harmonic expansion of the coefficients."""
    pref = math.sqrt(4 * math.pi / (2 * l + 1))
    return pref * sum(ylm(l, m, theta, phi) * coeffs.get(l, m) for m in range(-l, l + 1))


@dataclass(frozen=True)
class AliasingReport:
    """Numerical check of the azimuthal averaging identities on a cone.

    With 2s+1 azimuths the average of exp(i (m - m') phi_k) equals 1 not only
    for m = m' but also for m - m' = +-(2s+1): those mode pairs alias and the
    single-cone design loses them. With 4s+1 azimuths the average is a pure
    Kronecker delta over the full range |m|, |m'| <= 2s.
    """

    twice_s: TwiceSpin
    max_defect_aliased: float
    max_defect_corrected: float
    aliased_pairs: tuple[tuple[int, int], ...]


def aliasing_defect(s: TwiceSpin | int) -> AliasingReport:
    """Verify both azimuthal averaging identities for all m, m' in [-2s, 2s]."""
    s = TwiceSpin.of(s)
    ts = s.twice_s
    ms = np.arange(-ts, ts + 1)

    def max_defect(n_pts: int, wrap_deltas: bool) -> float:
        k = np.arange(n_pts)
        worst = 0.0
        for m in ms:
            for mp in ms:
                value = np.exp(1j * (m - mp) * 2 * math.pi * k / n_pts).mean()
                expected = 1.0 if m == mp else 0.0
                if wrap_deltas and abs(m - mp) == n_pts:
                    expected = 1.0
                worst = max(worst, abs(value - expected))
        return worst

    pairs = tuple(
        (m, mp) for m in ms for mp in ms if m != mp and abs(m - mp) == ts + 1
    )
    return AliasingReport(
        twice_s=s,
        max_defect_aliased=max_defect(ts + 1, wrap_deltas=True),
        max_defect_corrected=max_defect(2 * ts + 1, wrap_deltas=False),
        aliased_pairs=pairs,
    )


@dataclass(frozen=True)
class ConeDesign:
    """Cones of constant colatitude, each carrying equispaced azimuths."""

    thetas: tuple[float, ...]
    azimuth_count: int

    def __post_init__(self) -> None:
        if len(set(self.thetas)) != len(self.thetas):
            raise ValueError("cone colatitudes must be distinct")
        for t in self.thetas:
            if not (0.0 < t < math.pi):
                raise ValueError(f"cone colatitudes must lie in (0, pi), got {t}")
        if self.azimuth_count < 1:
            raise ValueError("need at least one azimuth per cone")

    @property
    def azimuths(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.azimuth_count) / self.azimuth_count

    def to_json_dict(self) -> dict:
        return {"thetas": list(self.thetas), "azimuth_count": self.azimuth_count}

    @classmethod
    def from_json_dict(cls, data: dict) -> "ConeDesign":
        return cls(thetas=tuple(float(t) for t in data["thetas"]), azimuth_count=int(data["azimuth_count"]))


def _default_thetas(s: TwiceSpin) -> tuple[float, ...]:
    # evenly spread over (0, pi), avoiding both poles
    n = s.dim
    return tuple(math.pi * (j + 1) / (n + 1) for j in range(n))


def single_cone_design(s: TwiceSpin | int, theta: float | None = None) -> ConeDesign:
    """The under-sampled design: one cone, only 2s+1 azimuths (not invertible)."""
    s = TwiceSpin.of(s)
    if theta is None:
        theta = _default_thetas(s)[0]
    return ConeDesign(thetas=(theta,), azimuth_count=s.dim)


def corrected_cone_design(s: TwiceSpin | int, thetas: tuple[float, ...] | None = None) -> ConeDesign:
    """The full-rank design: 2s+1 distinct cones with 4s+1 azimuths each."""
    s = TwiceSpin.of(s)
    if thetas is None:
        thetas = _default_thetas(s)
    return ConeDesign(thetas=tuple(thetas), azimuth_count=2 * s.twice_s + 1)


@dataclass(frozen=True)
class ConeDesignReport:
    """The stacked linear map from multipole coefficients to Pi_l samples."""

    twice_s: TwiceSpin
    design: ConeDesign
    matrix: np.ndarray
    singular_values: np.ndarray
    rank: int
    n_unknowns: int

    @property
    def full_rank(self) -> bool:
        return self.rank == self.n_unknowns


def cone_design_matrix(
    s: TwiceSpin | int, design: ConeDesign, policy: NumericPolicy = DEFAULT_POLICY
) -> ConeDesignReport:
    """Stack the harmonic-expansion rows for every (l, cone, azimuth) sample.

    Unknowns are the c_lm flattened as column l^2 + (m + l); row (l, j, k)
    holds sqrt(4pi/(2l+1)) Y_lm(theta_j, phi_k) in the l-band columns. The
    numerical rank counts singular values above rank_rtol * sigma_max.
    """
    s = TwiceSpin.of(s)
    ts = s.twice_s
    n_unknowns = s.dim ** 2
    rows = []
    for l in range(ts + 1):
        pref = math.sqrt(4 * math.pi / (2 * l + 1))
        for theta in design.thetas:
            for phi in design.azimuths:
                row = np.zeros(n_unknowns, dtype=complex)
                for m in range(-l, l + 1):
                    row[l * l + m + l] = pref * ylm(l, m, theta, phi)
                rows.append(row)
    matrix = np.array(rows)
    svals = np.linalg.svd(matrix, compute_uv=False)
    rank = int((svals > policy.rank_rtol * svals[0]).sum())
    return ConeDesignReport(
        twice_s=s,
        design=design,
        matrix=matrix,
        singular_values=svals,
        rank=rank,
        n_unknowns=n_unknowns,
    )


def reconstruct_multipole(
    probs: np.ndarray,
    design: ConeDesign,
    s: TwiceSpin | int,
    renormalize: bool = False,
    project_psd: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> tuple[DensityMatrix, ReconDiagnostics]:
    """Reconstruct a state from full outcome distributions on a cone design.

    ``probs[j, a, k]`` is the probability of outcome mu = s - k measured on
    cone j at azimuth a. For each band l the measurable Pi_l samples are
    Fourier-transformed over the azimuths, which isolates Y_lm(theta_j) c_lm
    once the azimuth count exceeds the aliasing limit; each coefficient is
    then a least-squares fit over the cones. Requires a full-rank design.
    """
    s = TwiceSpin.of(s)
    ts, n = s.twice_s, s.dim
    probs = np.asarray(probs, dtype=float)
    expected_shape = (len(design.thetas), design.azimuth_count, n)
    if probs.shape != expected_shape:
        raise ValueError(f"probs shape {probs.shape} does not match design {expected_shape}")

    report = cone_design_matrix(s, design, policy)
    if not report.full_rank:
        raise RankDeficientDesignError(rank=report.rank, n_unknowns=report.n_unknowns)

    azimuths = design.azimuths
    thetas = np.array(design.thetas)
    values: dict[tuple[int, int], complex] = {}
    conditions: list[float] = []
    for m in range(-ts, ts + 1):
        dft = np.exp(-1j * m * azimuths) / design.azimuth_count
        col_norms = []
        for l in range(abs(m), ts + 1):
            pi_l = probs @ _pi_weights(ts, l)          # (cones, azimuths)
            g = pi_l @ dft                             # isolates Y_lm(theta_j) c_lm
            a = math.sqrt(4 * math.pi / (2 * l + 1)) * np.asarray(ylm(l, m, thetas, 0.0))
            values[(l, m)] = complex(np.vdot(a, g) / np.vdot(a, a).real)
            col_norms.append(np.linalg.norm(a))
        # per-m cone system is diagonal over l; its condition is the norm ratio
        conditions.append(float(max(col_norms) / min(col_norms)))

    coeffs = MultipoleCoefficients(twice_s=s, values=values)
    raw = multipoles_to_rho(coeffs)
    return finalize_reconstruction(
        s, raw.entries, conditions, renormalize=renormalize, project_psd=project_psd
    )
