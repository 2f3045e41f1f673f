"""Stern-Gerlach forward simulation and minimal spin-state reconstruction.

Forward side: exact spin operators for any (half-)integer spin, coherent
states, Born-rule outcome distributions and multinomial shot sampling.
Inverse side: the (2s+1)^2-direction circle grid whose azimuthal Fourier
transform decouples the reconstruction into 2s+1 Vandermonde-type block
solves, plus the independent multipole route on cone designs (including the
demonstration that a single cone with only 2s+1 azimuths aliases and cannot
be inverted, while 4s+1 azimuths on 2s+1 cones can).
"""

from .coherent import (
    CoherentState,
    CountSample,
    OutcomeDistribution,
    coherent_probabilities,
    coherent_probability,
    coherent_state,
    outcome_distribution,
    sample_counts,
)
from .diagnostics import ReconDiagnostics, finalize_reconstruction
from .errors import IncompleteDataError, RankDeficientDesignError, SingularBlockError
from .grid import (
    GridPoint,
    GridSpec,
    MeasurementGrid,
    build_grid,
    default_delta,
    default_grid_spec,
    default_r,
    grid_orthogonality_check,
)
from .harmonics import ylm
from .measurement import (
    MODE_COHERENT,
    MODE_MULTIPOLE,
    CoherentRecord,
    MeasurementSet,
    OutcomeRecord,
    read_measurement_set,
    write_measurement_set,
)
from .multipole import (
    AliasingReport,
    ConeDesign,
    ConeDesignReport,
    MultipoleCoefficients,
    aliasing_defect,
    clebsch_gordan,
    cone_design_matrix,
    corrected_cone_design,
    multipole_operator,
    multipoles_to_rho,
    pi_l_from_multipoles,
    pi_l_from_probabilities,
    reconstruct_multipole,
    rho_to_multipoles,
    single_cone_design,
)
from .policy import DEFAULT_POLICY, NumericPolicy
from .recon import (
    BlockSystem,
    ConditionReport,
    FourierData,
    RescaledData,
    assemble_block,
    azimuthal_dft,
    block_nodes,
    build_block_system,
    condition_report,
    explicit_block_inverse,
    forward_design_matrix,
    forward_design_row,
    reconstruct,
    rescale,
    solve_block,
    sqrt_binom_matrix,
    vandermonde_det,
    vandermonde_slogdet,
)
from .spin import (
    DensityMatrix,
    DensityReport,
    Direction,
    SpinOperators,
    TwiceSpin,
    build_spin_operators,
    eigenbasis_of_axis,
    maximally_mixed,
    random_density,
    rotation_operator,
    validate_density,
)

__version__ = "0.1.0"
