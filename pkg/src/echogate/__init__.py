"""Simulation of Rydberg-blockade C^kZ gates driven by echoed
rapid-adiabatic-passage pulses: pulse shapes, Hamiltonian assembly,
closed/open-system propagation, fidelity metrics, adiabatic analysis,
pulse optimisation, and parameter-sweep batch runs.
"""

from .errors import (
    ConfigError,
    EchoGateError,
    EffectiveDimensionError,
    InfeasibleProblemError,
    IntegrationError,
    PulseRangeError,
    TrackingError,
    UnsupportedSizeError,
)
from .model import (
    BasisIndex,
    ChannelKind,
    DissipationChannel,
    InteractionGraph,
    Level,
    PulseParams,
    SystemConfig,
    all_basis_states,
    basis_flat,
    basis_from_flat,
    computational_states,
    geometry_preset,
    offset_over_omega,
    rate_over_omega,
    tau_from_time,
    time_from_tau,
)
from .pulses import (
    NO_ERRORS,
    PulseErrors,
    constant_drive,
    detuning_at,
    peak_detuning,
    pulse_center,
    pulse_index,
    rabi_at,
    zero_drive,
)
from .hamiltonian import (
    HamiltonianSnapshot,
    build_hamiltonian,
    reachable_subspace,
)
from .propagator import (
    IntegratorOptions,
    Trajectory,
    cs_dissipation_model,
    evolve_basis_block,
    evolve_density,
    evolve_state,
)
from .metrics import (
    GateReport,
    IdealGate,
    fidelity,
    ideal_ckz,
    phase_audit,
    symmetric_input,
)
from .adiabatic import (
    BlochPath,
    PhaseLedger,
    SpectrumTrace,
    bloch_trajectory,
    dynamical_phases,
    instantaneous_spectrum,
)
from .optimize import (
    OptimizationProblem,
    OptimizationResult,
    PhysicalCaps,
    default_bounds,
    objective_eval,
    optimize,
)
from .scenarios import SCENARIOS, Scenario, get_scenario, scenario_names
from .sweeps import (
    ResultRecord,
    SweepSpec,
    doppler_scan,
    robustness_grid,
    run_sweep,
    sweep_v0,
    time_error_scan,
    write_records,
)

__version__ = "0.1.0"
