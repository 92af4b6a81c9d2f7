"""skybell: polarization-entanglement detection for photon pairs from two sky sources.

The package models a pair of point sources observed by two polarizing
detectors: entangled-pair CHSH correlators, scalar path amplitudes and
intensity interference, a partially polarized unentangled background,
rate-weighted signal/background mixtures over two viewing scenarios,
counter-based Monte Carlo sampling, and a small CLI.
"""

__version__ = "0.1.0"

from .background import (
    BackgroundSpec,
    background_correlator,
    background_outcome_rate,
    background_probability,
    background_rate_total,
    effective_density_matrix,
    interference_trace,
    polarizer_trace,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    DegenerateDesignError,
    SkybellError,
)
from .montecarlo import (
    EstimatedCorrelator,
    SampleBatch,
    channel_distributions,
    estimate_chsh,
    estimate_correlator,
    sample_coincidences,
    sample_scan,
)
from .polarization import (
    TSIRELSON_BOUND,
    ChshConfiguration,
    PolarizerAxis,
    Projector,
    SourceDensityMatrix,
    TwoPhotonPureState,
    axis_angle_between,
    bell_state,
    chsh_expectation,
    chsh_operator,
    chsh_operator_square,
    chsh_square_spectral_bound,
    correlator,
    joint_outcome_probability,
    outcome_distribution,
    outcome_projector,
    product_helicity_state,
    projector_from_axis,
    source_density,
)
from .propagation import (
    Geometry,
    HbtIntensity,
    PathAmplitudeSet,
    entangled_pair_weight,
    hbt_intensity,
    path_amplitudes,
    propagate_pair,
    scenario2_mask,
)
from .scenarios import (
    CorrelatorParts,
    ExperimentConfig,
    FitReport,
    ScanResult,
    angular_scan,
    chsh_with_background,
    coincidence_correlator,
    effective_amplitudes,
    extract_signal,
    null_background_axes,
)

__all__ = [
    "__version__",
    "TSIRELSON_BOUND",
    "BackgroundSpec",
    "ChshConfiguration",
    "ConfigError",
    "ConsistencyError",
    "CorrelatorParts",
    "DegenerateDesignError",
    "EstimatedCorrelator",
    "ExperimentConfig",
    "FitReport",
    "Geometry",
    "HbtIntensity",
    "PathAmplitudeSet",
    "PolarizerAxis",
    "Projector",
    "SampleBatch",
    "ScanResult",
    "SkybellError",
    "SourceDensityMatrix",
    "TwoPhotonPureState",
    "angular_scan",
    "axis_angle_between",
    "background_correlator",
    "background_outcome_rate",
    "background_probability",
    "background_rate_total",
    "bell_state",
    "channel_distributions",
    "chsh_expectation",
    "chsh_operator",
    "chsh_operator_square",
    "chsh_square_spectral_bound",
    "chsh_with_background",
    "coincidence_correlator",
    "correlator",
    "effective_amplitudes",
    "effective_density_matrix",
    "entangled_pair_weight",
    "estimate_chsh",
    "estimate_correlator",
    "extract_signal",
    "hbt_intensity",
    "interference_trace",
    "joint_outcome_probability",
    "null_background_axes",
    "outcome_distribution",
    "outcome_projector",
    "path_amplitudes",
    "polarizer_trace",
    "product_helicity_state",
    "projector_from_axis",
    "propagate_pair",
    "sample_coincidences",
    "sample_scan",
    "scenario2_mask",
    "source_density",
]
