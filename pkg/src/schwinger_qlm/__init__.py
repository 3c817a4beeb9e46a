"""Spin-1/2 quantum link chain: constrained basis, scar spectroscopy, Trotter circuits."""

__version__ = "0.1.0"

from .basis import (
    GaugeConstraintError,
    MomentumState,
    PhysicalBasis,
    TranslationOrbit,
    ZeroMomentumBasis,
    dimension_formula,
    enumerate_physical_basis,
    gauss_residual,
    matter_to_states,
    orbit_decomposition,
    pxp_to_qlm,
    qlm_to_pxp,
    translate_two,
    vacuum_configuration,
    zero_momentum_state,
)
from .circuits import (
    CircuitEngine,
    CircuitSchedule,
    ObservableSeries,
    RunStatistics,
    apply_gate,
    cumulative_deviation,
    ensemble_statistics,
    exact_evolution,
    normalized_deviation,
    random_schedule,
    run_circuit,
    sequential_schedule,
)
from .hamiltonian import (
    EigenstateDiagnostics,
    GatePairing,
    HalfChainSplit,
    SpectralData,
    apply_hamiltonian,
    build_gate_pairing,
    dense_hamiltonian,
    eigendecompose,
    eigenstate_diagnostics,
    entanglement_entropy,
    entropy_profile,
    thermal_beta,
    thermal_expectation,
    zero_momentum_hamiltonian,
)
from .scars import (
    ScarCriteria,
    ScarSet,
    classify_scars,
    default_scar_criteria,
    revival_prediction,
    scar_projection,
    scar_report,
)
