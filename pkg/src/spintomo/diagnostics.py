"""Shared diagnostics record and state finalization for the reconstructions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spin import DensityMatrix, TwiceSpin


@dataclass
class ReconDiagnostics:
    """Quality indicators of a reconstructed state.

    All defects describe the raw linear inversion: hermiticity_defect is
    measured on the assembly before the (always logged) symmetrization,
    trace_defect and min_eigenvalue before any renormalization or projection.
    The flags record which optional post-processing was applied to the
    returned matrix. block_condition holds the effective condition number of
    each decoupled linear system as solved.
    """

    trace_defect: float
    hermiticity_defect: float
    min_eigenvalue: float
    block_condition: list[float] = field(default_factory=list)
    renormalized: bool = False
    psd_projected: bool = False

    def to_json_dict(self) -> dict:
        return {
            "trace_defect": self.trace_defect,
            "hermiticity_defect": self.hermiticity_defect,
            "min_eigenvalue": self.min_eigenvalue,
            "block_condition": list(self.block_condition),
            "renormalized": self.renormalized,
            "psd_projected": self.psd_projected,
        }


def finalize_reconstruction(
    s: TwiceSpin | int,
    entries: np.ndarray,
    block_condition: list[float],
    renormalize: bool = False,
    project_psd: bool = False,
) -> tuple[DensityMatrix, ReconDiagnostics]:
    """Symmetrize, diagnose, and optionally post-process a raw reconstruction.

    Hermiticity is not enforced by the inversion; its defect is logged and
    only then removed by averaging with the adjoint. Renormalization divides
    by the trace; PSD projection clips negative eigenvalues and renormalizes.
    Both are strictly opt-in so that noisy, unphysical results stay visible.
    """
    s = TwiceSpin.of(s)
    herm_defect = float(np.abs(entries - entries.conj().T).max()) / 2
    a = 0.5 * (entries + entries.conj().T)
    trace_defect = float(abs(np.trace(a) - 1.0))
    eigs, vecs = np.linalg.eigh(a)
    min_eig = float(eigs[0])
    if renormalize:
        a = a / np.trace(a).real
    if project_psd:
        clipped = np.clip(eigs, 0.0, None)
        a = (vecs * clipped) @ vecs.conj().T
        a = a / np.trace(a).real
    diag = ReconDiagnostics(
        trace_defect=trace_defect,
        hermiticity_defect=herm_defect,
        min_eigenvalue=min_eig,
        block_condition=block_condition,
        renormalized=renormalize,
        psd_projected=project_psd,
    )
    return DensityMatrix(twice_s=s, entries=a), diag
