"""Simulation toolkit for joint protective measurements on small quantum systems."""

__version__ = "0.1.0"

from .channel import (
    IdealChannel,
    ReadoutSample,
    ResolvabilityReport,
    apply_ideal_channel,
    check_resolvability,
    classify_outcome,
    make_ideal_channel,
    sample_readout,
    sample_readouts,
)
from .detectors import (
    Detector,
    DetectorBank,
    MomentumGrid,
    PointerDistribution,
    build_momentum_grid,
    density_at,
    make_detector_bank,
)
from .finite_time import (
    ConvergenceCurve,
    FiniteTimeConfig,
    channel_distance,
    conditional_unitary,
    convergence_sweep,
    ideal_conditional_unitary,
    time_averaged_offdiagonals,
)
from .quantum import (
    ExpectationTable,
    HermitianOperator,
    SpectralDecomposition,
    SystemState,
    spectral_decompose,
    stationary_expectations,
)
from .qubit import (
    AxisEstimate,
    BlochState,
    FieldConfig,
    estimate_axis,
    make_field_hamiltonian,
    make_qubit_state,
    post_measurement_state,
    run_qubit_protocol,
)
