"""Parameter-cognizant Hamiltonian neural networks and chaos diagnostics."""
from .systems import (
    DimensionError, EnergyRangeError, IntegrationDivergedError, PhaseState, SamplingError,
    SystemKind, SystemSpec, Trajectory, analytic_rhs, energy_ceiling, escape_threshold,
    find_saddles, hamiltonian_field, integrate, integrate_many, poincare_section, potential,
    potential_minimum, read_trajectory_csv, sample_state_at_energy, total_energy, true_trajectory,
    write_trajectory_csv,
)
from .network import (
    AnalyticPredictor, HnnEnsemble, HnnModel, SampleBatch, TrainConfig, TrainingDivergedError,
    build_training_set, derivative_targets, forward, input_gradient, learned_field, learned_rhs,
    load_model, loss, loss_gradient, model_init, save_model, train,
)
from .analysis import (
    GridConfig, TaylorCoefficients, potential_error, relative_energy_drift, taylor_fit, true_taylor,
)
from .chaos import (
    ChaosClass, ChaosReport, alignment_index, chaos_sweep, classify, jacobian_fd, lyapunov_spectrum,
)
from .estimator import HamiltonianRegressor

__version__ = "0.1.0"
