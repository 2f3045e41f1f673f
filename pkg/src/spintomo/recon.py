"""The inverse pipeline: rescaling, azimuthal Fourier reduction, block solves.

The measured coherent-state probabilities are linear in the unknown state.
After rescaling both sides,

    p~[q, r] = (1 + R_q^2)^(2s) * p_s(n[q, r]),
    rho~[k', k] = sqrt(binom(2s,k') binom(2s,k)) * rho[k', k],

the relation becomes p~ = sum_{k',k} conj(z)^k' z^k rho~[k',k]. On the
circle grid the discrete Fourier transform over the azimuth index decouples
the (2s+1)^2 equations into 2s+1 independent systems, one per Fourier mode m,
each coupling only the entries with k' - k = m (mod 2s+1):

    (M_m)[q, k] = R_q^(2k+m)                                 for k <= 2s-m,
                  R_q^(2k+m-(2s+1)) * exp(i 2 pi q delta)    otherwise.

With R_q = r^(s-q) every M_m factors as a Vandermonde matrix in the nodes
x_k = r^(2k+m) (wrapped columns: exponent lowered by 2s+1 and node rotated by
exp(-i 2 pi delta)) times a diagonal, which gives an explicit determinant and
inverse, and an invertibility criterion: all nodes distinct. For half-integer
spin and delta = 0 wrapped and unwrapped nodes collide pairwise, so a nonzero
shift is mandatory there.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .diagnostics import ReconDiagnostics, finalize_reconstruction
from .errors import IncompleteDataError, SingularBlockError
from .grid import GridSpec, MeasurementGrid, build_grid
from .measurement import MODE_COHERENT, MeasurementSet
from .policy import DEFAULT_POLICY, NumericPolicy
from .spin import DensityMatrix, TwiceSpin


def forward_design_row(s: TwiceSpin | int, z: complex) -> np.ndarray:
    """Row of the full linear map from rho~ to one rescaled probability.

    Entries conj(z)^k' * z^k in (k', k) lexicographic order (k' major), so
    that p~ = row . vec(rho~). Stacking rows for all grid points gives the
    brute-force design matrix the tests use as an independent oracle.
    """
    s = TwiceSpin.of(s)
    powers = z ** np.arange(s.dim)
    return np.outer(powers.conj(), powers).reshape(-1)


def forward_design_matrix(s: TwiceSpin | int, zs) -> np.ndarray:
    return np.array([forward_design_row(s, z) for z in zs])


def sqrt_binom_matrix(s: TwiceSpin | int) -> np.ndarray:
    """The rescaling factors sqrt(binom(2s,k') binom(2s,k)) as a matrix."""
    s = TwiceSpin.of(s)
    root = np.sqrt([comb(s.twice_s, k) for k in range(s.dim)])
    return np.outer(root, root)


@dataclass(frozen=True)
class RescaledData:
    """Rescaled probabilities p~[q, r_index] on a measurement grid."""

    spec: GridSpec
    p_tilde: np.ndarray


@dataclass(frozen=True)
class FourierData:
    """Azimuthal Fourier modes p^[q, m], m = 0..2s."""

    spec: GridSpec
    p_hat: np.ndarray


def rescale(meas: MeasurementSet, grid: MeasurementGrid) -> RescaledData:
    """Rescale measured probabilities by (1 + R_q^2)^(2s), checking coverage.

    Every grid point (q, r_index) must be present exactly once; anything
    missing or duplicated aborts the pipeline rather than falling back to a
    least-squares fit, since minimality of the data is the point.
    """
    if meas.mode != MODE_COHERENT:
        raise ValueError(f"expected a coherent-mode measurement set, got {meas.mode!r}")
    spec = grid.spec
    n = spec.n_circles
    seen = np.zeros((n, n), dtype=int)
    p = np.zeros((n, n))
    for rec in meas.records:
        if not (0 <= rec.q < n and 0 <= rec.r_index < n):
            raise IncompleteDataError(f"grid label (q={rec.q}, r_index={rec.r_index}) out of range")
        if not math.isfinite(rec.p_s):
            raise ValueError(f"non-finite probability at (q={rec.q}, r_index={rec.r_index})")
        seen[rec.q, rec.r_index] += 1
        p[rec.q, rec.r_index] = rec.p_s
    if (seen > 1).any():
        q, r = np.argwhere(seen > 1)[0]
        raise IncompleteDataError(f"duplicate measurement for grid point (q={q}, r_index={r})")
    if (seen == 0).any():
        q, r = np.argwhere(seen == 0)[0]
        raise IncompleteDataError(f"missing measurement for grid point (q={q}, r_index={r})")
    factors = (1.0 + spec.radii() ** 2) ** spec.twice_s.twice_s
    return RescaledData(spec=spec, p_tilde=p * factors[:, None])


def azimuthal_dft(data: RescaledData) -> FourierData:
    """Fourier-average the rescaled data over each circle's azimuths.

    p^[q, m] = (1/(2s+1)) sum_r exp(i m phi[q, r]) p~[q, r]; the phases use
    the true azimuths including the per-circle shift q * delta.
    """
    spec = data.spec
    n = spec.n_circles
    p_hat = np.zeros((n, n), dtype=complex)
    r_idx = np.arange(n)
    for q in range(n):
        phis = 2 * math.pi / n * (r_idx + q * spec.delta)
        for m in range(n):
            p_hat[q, m] = np.mean(np.exp(1j * m * phis) * data.p_tilde[q])
    return FourierData(spec=spec, p_hat=p_hat)


def block_nodes(spec: GridSpec, m: int) -> np.ndarray:
    """Vandermonde nodes x_k = r^(2k+m), exponent lowered by 2s+1 when wrapped."""
    ts = spec.twice_s.twice_s
    n = spec.n_circles
    exps = np.array([2 * k + m if k <= ts - m else 2 * k + m - n for k in range(n)], dtype=float)
    return spec.r ** exps


def assemble_block(spec: GridSpec, m: int) -> np.ndarray:
    """The block matrix M_m coupling the mode-m data to the mode-m unknowns."""
    ts = spec.twice_s.twice_s
    n = spec.n_circles
    if not (0 <= m <= ts):
        raise ValueError(f"m must lie in [0, 2s] = [0, {ts}], got {m}")
    radii = spec.radii()
    matrix = np.zeros((n, n), dtype=complex)
    for k in range(n):
        if k <= ts - m:
            matrix[:, k] = radii ** (2 * k + m)
        else:
            phases = np.exp(1j * 2 * math.pi * np.arange(n) * spec.delta)
            matrix[:, k] = radii ** (2 * k + m - n) * phases
    return matrix


@dataclass(frozen=True)
class BlockSystem:
    """One decoupled mode-m system M_m x = p_m.

    Unknown layout: component k holds rho~[k+m, k] for k <= 2s-m and the
    wrapped entry rho~[k+m-(2s+1), k] beyond, i.e. row index (k+m) mod (2s+1).
    """

    spec: GridSpec
    m: int
    matrix: np.ndarray
    rhs: np.ndarray


def build_block_system(spec: GridSpec, m: int, fourier: FourierData) -> BlockSystem:
    return BlockSystem(spec=spec, m=m, matrix=assemble_block(spec, m), rhs=fourier.p_hat[:, m])


def vandermonde_slogdet(nodes, s: TwiceSpin | int) -> tuple[complex, float]:
    """Sign and log-magnitude of the closed-form block determinant.

    det = (prod_k x_k)^(-s) * prod_{k'<k} (x_k' - x_k), s the spin (passed as
    usual via 2s). Returned as (unit-modulus sign, log |det|) because the two
    factors individually overflow double precision long before the
    determinant itself does. Complex nodes use principal-branch powers. A
    repeated node gives (0, -inf).
    """
    s_val = TwiceSpin.of(s).spin
    nodes = np.asarray(nodes, dtype=complex)
    log_abs = -s_val * float(np.sum(np.log(np.abs(nodes))))
    angle = -s_val * float(np.sum(np.angle(nodes)))
    n = len(nodes)
    for a in range(n):
        diffs = nodes[a] - nodes[a + 1 :]
        if np.any(diffs == 0):
            return 0.0 + 0.0j, -math.inf
        log_abs += float(np.sum(np.log(np.abs(diffs))))
        angle += float(np.sum(np.angle(diffs)))
    return cmath.exp(1j * angle), log_abs


def vandermonde_det(nodes, s: TwiceSpin | int) -> complex:
    """Closed-form block determinant; inf/0 when outside double range."""
    sign, log_abs = vandermonde_slogdet(nodes, s)
    if log_abs == -math.inf:
        return 0.0 + 0.0j
    return sign * math.exp(log_abs)


def explicit_block_inverse(spec: GridSpec, m: int) -> np.ndarray:
    """M_m^(-1) from the explicit Vandermonde inverse (Lagrange coefficients).

    M_m factors as V(v) diag(c) with effective nodes v_k = w_k / x_k (w_k is
    the wrap phase exp(i 2 pi delta) or 1) and column scales c_k = x_k^s, so
    the rows of V^(-1) are the coefficients of the Lagrange basis polynomials
    at the nodes v. Kept as an independent cross-check of the pivoted solver;
    not used in the main pipeline.
    """
    ts = spec.twice_s.twice_s
    n = spec.n_circles
    x = block_nodes(spec, m)
    wrap = np.array([1.0 if k <= ts - m else np.exp(1j * 2 * math.pi * spec.delta) for k in range(n)])
    v = wrap / x
    c = x ** spec.twice_s.spin

    # coefficients (ascending) of prod_k (t - v_k)
    full = np.array([1.0 + 0.0j])
    for root in v:
        full = np.convolve(full, np.array([-root, 1.0]))

    vinv = np.zeros((n, n), dtype=complex)
    for k in range(n):
        # deflate by the root v_k: quotient coefficients, ascending order
        b = np.zeros(n, dtype=complex)
        b[n - 1] = full[n]
        for j in range(n - 2, -1, -1):
            b[j] = full[j + 1] + v[k] * b[j + 1]
        denom = np.polynomial.polynomial.polyval(v[k], b)
        vinv[k, :] = b / denom
    return (vinv / c[:, None]).astype(complex)


def _column_scales(spec: GridSpec, m: int) -> np.ndarray:
    ts = spec.twice_s.twice_s
    n = spec.n_circles
    return np.sqrt([comb(ts, (k + m) % n) * comb(ts, k) for k in range(n)])


def solve_block(block: BlockSystem, policy: NumericPolicy = DEFAULT_POLICY) -> tuple[np.ndarray, float]:
    """Solve one block system by scaled, equilibrated, pivoted factorization.

    The unknowns are rescaled to physical matrix entries (dividing out the
    binomial factors) and the rows max-norm equilibrated before the LU solve;
    both transformations are undone exactly on the way out. The reported
    condition number is that of the system actually factorized, which is the
    quantity that bounds the attainable accuracy; it is usually far below the
    raw condition number of M_m. Solves with condition beyond
    policy.max_condition are refused.
    """
    spec = block.spec
    scale = _column_scales(spec, block.m)
    a = block.matrix * scale[None, :]
    row_norm = np.abs(a).max(axis=1)
    if not np.all(row_norm > 0):
        raise SingularBlockError(m=block.m, r=spec.r, delta=spec.delta, condition=math.inf)
    a_eq = a / row_norm[:, None]
    condition = float(np.linalg.cond(a_eq))
    if not math.isfinite(condition) or condition > policy.max_condition:
        raise SingularBlockError(m=block.m, r=spec.r, delta=spec.delta, condition=condition)
    u = np.linalg.solve(a_eq, block.rhs / row_norm)
    return u * scale, condition


def reconstruct(
    meas: MeasurementSet,
    spec: GridSpec | None = None,
    renormalize: bool = False,
    project_psd: bool = False,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> tuple[DensityMatrix, ReconDiagnostics]:
    """Reconstruct the state from (2s+1)^2 coherent-state probabilities.

    Pipeline: rescale, azimuthal Fourier transform, one pivoted solve per
    Fourier mode m = 0..2s, reassembly of rho~ from the mode vectors, then
    undoing the binomial rescaling. Hermiticity is not imposed anywhere in
    the inversion; its defect (a data-consistency check, like the trace) is
    logged in the diagnostics before the returned matrix is symmetrized.
    """
    spec = spec if spec is not None else meas.grid
    if spec is None:
        raise ValueError("no grid spec available for reconstruction")
    s = spec.twice_s
    n = s.dim
    grid = build_grid(spec)
    fourier = azimuthal_dft(rescale(meas, grid))
    rho_tilde = np.zeros((n, n), dtype=complex)
    conditions: list[float] = []
    for m in range(n):
        block = build_block_system(spec, m, fourier)
        x, condition = solve_block(block, policy)
        conditions.append(condition)
        for k in range(n):
            rho_tilde[(k + m) % n, k] = x[k]
    entries = rho_tilde / sqrt_binom_matrix(s)
    return finalize_reconstruction(
        s, entries, conditions, renormalize=renormalize, project_psd=project_psd
    )


@dataclass(frozen=True)
class ConditionReport:
    """Raw and effective (as-solved) condition numbers of every block."""

    spec: GridSpec
    raw: tuple[float, ...]
    effective: tuple[float, ...]

    @property
    def worst_m(self) -> int:
        return int(np.argmax(self.effective))

    @property
    def worst_effective(self) -> float:
        return float(max(self.effective))


def condition_report(s: TwiceSpin | int, spec: GridSpec) -> ConditionReport:
    """2-norm condition estimates of each block, raw and after solver scaling."""
    s = TwiceSpin.of(s)
    if spec.twice_s != s:
        raise ValueError("grid spec does not match the requested spin")
    raw, eff = [], []
    for m in range(s.dim):
        matrix = assemble_block(spec, m)
        raw.append(float(np.linalg.cond(matrix)))
        scale = _column_scales(spec, m)
        a = matrix * scale[None, :]
        row_norm = np.abs(a).max(axis=1)
        eff.append(float(np.linalg.cond(a / row_norm[:, None])))
    return ConditionReport(spec=spec, raw=tuple(raw), effective=tuple(eff))
