"""Two-qubit entanglement steering between distant atoms.

Simulates an always-on Ising-type coupling with switchable local driving and
compares two ways of preparing Bell states: timed constant-field (geometric)
switching and Lyapunov state feedback, including the LaSalle-set behavior of
the interaction-controlled loop.
"""

from .control import (
    ControlLaw,
    Geometric,
    Lyapunov,
    control_field,
    f_bound,
    geometric_field,
    lyapunov_value,
    vdot_identity_check,
)
from .dynamics import (
    IntegrationError,
    IntegratorConfig,
    Trajectory,
    TrajectoryMetadata,
    geometric_evolve,
    integrate,
    rhs,
)
from .experiments import (
    ConfigError,
    OutputPaths,
    PRESET_NAMES,
    ScenarioConfig,
    SweepConfig,
    apply_axis,
    load_scenario,
    load_sweep,
    parse_config_text,
    preset_scenarios,
    run_preset,
    run_scenario,
    run_sweep,
    scenario_from_mapping,
    sweep_from_mapping,
    write_trajectory_csv,
)
from .linalg import (
    as_density_matrix,
    as_state_vector,
    commutator,
    dagger,
    eigh,
    expm,
    hs_norm,
    kron,
    outer,
    pauli,
)
from .metrics import (
    ConvergenceReport,
    PeakReport,
    concurrence,
    convergence_report,
    equator_state,
    fidelity_to,
    lasalle_distance,
    peak_report,
)
from .model import (
    BASES,
    BELL,
    Basis,
    BellName,
    HamiltonianPair,
    ModelParams,
    Paradigm,
    X_PRODUCT,
    Z_PRODUCT,
    bell_state,
    h_eff,
    h_local,
    hamiltonians,
    subspace_populations,
    subspace_reduce,
)

__version__ = "0.1.0"

__all__ = [
    "BASES",
    "BELL",
    "Basis",
    "BellName",
    "ConfigError",
    "ControlLaw",
    "ConvergenceReport",
    "Geometric",
    "HamiltonianPair",
    "IntegrationError",
    "IntegratorConfig",
    "Lyapunov",
    "ModelParams",
    "OutputPaths",
    "PRESET_NAMES",
    "Paradigm",
    "PeakReport",
    "ScenarioConfig",
    "SweepConfig",
    "Trajectory",
    "TrajectoryMetadata",
    "X_PRODUCT",
    "Z_PRODUCT",
    "apply_axis",
    "as_density_matrix",
    "as_state_vector",
    "bell_state",
    "commutator",
    "concurrence",
    "control_field",
    "convergence_report",
    "dagger",
    "eigh",
    "equator_state",
    "expm",
    "f_bound",
    "fidelity_to",
    "geometric_evolve",
    "geometric_field",
    "h_eff",
    "h_local",
    "hamiltonians",
    "hs_norm",
    "integrate",
    "kron",
    "lasalle_distance",
    "load_scenario",
    "load_sweep",
    "lyapunov_value",
    "outer",
    "parse_config_text",
    "pauli",
    "peak_report",
    "preset_scenarios",
    "rhs",
    "run_preset",
    "run_scenario",
    "run_sweep",
    "scenario_from_mapping",
    "subspace_populations",
    "subspace_reduce",
    "sweep_from_mapping",
    "vdot_identity_check",
    "write_trajectory_csv",
]
