"""Inverse-engineered pulses for N-pod quantum systems (STIRUP)."""
from .errors import (BoundaryError, ConfigError, DimensionError, NonHermitianError,
                     OptimizationError, PulseDivergenceError, SimulationError,
                     UnreachableCouplingError)
from .quantum import (CollapseChannel, HamiltonianFn, TimeGrid, Trajectory, basis_state,
                      density_matrix, evolve_lindblad, evolve_schrodinger, fidelity_mixed,
                      fidelity_pure, max_state_distance, population, pure_density,
                      state_vector, transfer_efficiency)
from .passage import (AmplitudeSchedule, AngleSchedule, PassageSpec, coefficients,
                      default_chi, default_gamma, default_passage,
                      intermediate_population_max, solve_boundary_angles,
                      validate_boundaries)
from .pulses import (ControlPulses, ProtocolKind, dark_state, hamiltonian,
                     inverse_engineer, minimum_time, rr_baseline, stirap_baseline,
                     stirup_pulses)

GAMMA_UNIT = 2e-6 * 3.141592653589793 * 5.0  # 2 pi x 5 kHz in rad/ns

__version__ = "0.1.0"
