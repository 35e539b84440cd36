"""Entangled-lattice-clock toolkit.

Checks the feasibility of the polarization-screw transport lattice,
schedules the GHZ entanglement protocol, simulates the clock register with
photon-scattering decoherence, and quantifies the resulting precision
against the standard quantum limit.
"""

__version__ = "0.1.0"

from .constants import CODATA, ConstantsTable, au_to_si_polarizability
from .errors import (
    CapacityError,
    ClockSimError,
    ConfigError,
    DegenerateFringeError,
    InfeasibleTransportError,
    NoInteractionError,
    ParameterError,
    UntrappedError,
)
from .lattice import (
    FeasibilityReport,
    IntensityRequirement,
    LatticeConfig,
    SpeciesOptics,
    min_required_intensity,
    optical_potential_curve,
    overlap_depth,
    recoil_energy,
    sublattice_depths,
    transport_feasibility,
    trap_frequencies,
    well_depth,
    well_depth_closed_form,
)
from .rates import (
    DecoherenceParams,
    ProtocolSchedule,
    ScheduleStep,
    build_schedule,
    interaction_energy,
    phase_gate_duration,
    photon_scattering_time,
    survival_probability,
)
from .register import (
    BranchState,
    DenseState,
    backend_crosscheck,
    ghz_reference,
    final_reference,
    init_register,
    protocol_gates,
    protocol_references,
    run_protocol,
    state_fidelity,
    state_overlap,
)
from .trajectories import (
    NoiseEvent,
    TrajectoryOutcome,
    sample_noisy_trajectory,
    sample_trajectory_batch,
)
from .estimator import (
    AtomNumberCurve,
    FringeScan,
    PrecisionReport,
    analyze_fringe,
    fringe_scan,
    optimize_atom_number,
    phase_sensitivity,
    precision_report,
    sql_baseline,
)
from .config import RunConfig, parse_config, serialize_config
from .pipeline import PhysicsBundle, resolve_physics
