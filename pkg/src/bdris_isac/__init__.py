"""BD-RIS-aided ISAC joint beamforming: channels, solvers, experiments."""

from .ao import SolveReport, ao_solve, architecture_from_config, initialize
from .aux_phases import optimal_aux_phases
from .channel import (
    ChannelSet,
    Geometry,
    bs_ris_channel,
    build_geometry,
    element_positions,
    generate_channels,
    pathloss_user,
    rayleigh_user_channel,
    spatial_correlation,
    sqrt_psd,
    target_steering,
    ula_steering,
)
from .config import (
    ExperimentConfig,
    SystemConfig,
    config_hash,
    dbm_to_watts,
    load_config,
)
from .experiments import (
    dominance_ratio,
    report_to_dict,
    run_beampattern_experiment,
    run_gain_matrix_experiment,
    run_single_solve,
    run_tradeoff_experiment,
)
from .phase_solver import (
    PsiQuadratic,
    SplittingResult,
    assemble_psi_quadratic,
    diagonal_projection,
    group_projection,
    project,
    psi_update,
    quadratic_objective,
    splitting_solve,
    symuni_projection,
)
from .precoder import (
    PrecoderQuadratic,
    assemble_precoder_quadratic,
    solve_precoders,
    total_power,
)
from .system_model import (
    Architecture,
    AuxPhases,
    DIAGONAL,
    FULLY_CONNECTED,
    GainTargets,
    PhaseShift,
    beam_gain_matrix,
    beampattern,
    default_gain_targets,
    effective_channels,
    feasibility_residuals,
    group_connected,
    objective,
    sensing_gain,
    sinr_and_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
