"""Noisy real-time quantum Krylov diagonalization: simulation, thresholded
solves, and energy-error bounds."""

from .bounds import (
    BoundInputs,
    BoundReport,
    asymptotic_form,
    evaluate_bounds,
    gap_choice_bound,
    lower_bound,
    optimize_upper_bound,
    upper_bound,
)
from .errors import (
    AllRemovedError,
    CapacityError,
    ConfigError,
    DegenerateSpectrumError,
    InfeasibleError,
    InternalConsistencyError,
    PreconditionError,
    QKrylovError,
)
from .noise import NoiseSpec, NoisyPencil, error_norms, perturb_gaussian, spectral_norm
from .operators import (
    HermitianOperator,
    SpectralDecomposition,
    SpectralQuantities,
    SpinLattice,
    StateVector,
    antiferromagnetic_state,
    build_heisenberg,
    heisenberg_terms,
    sector_restrict,
    spectral_decompose,
    spectral_quantities,
)
from .pencil import (
    KrylovBasis,
    KrylovPencil,
    build_exact_pencil,
    build_krylov_basis,
    build_trotter_pencil,
    default_dt,
)
from .solver import SolveResult, ThresholdedProblem, epsilon_rule, solve_thresholded, threshold

__version__ = "0.1.0"
