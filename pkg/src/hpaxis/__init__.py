"""Analysis toolkit for the two-feedback endocrine oscillator.

Modules
-------
model        parameters, feedback nonlinearities, vector field, Jacobian
equilibria   unique positive equilibrium via the scalar root equation
stability    Routh-Hurwitz discriminant, spectrum, slope-supremum verdict
hopf         pinned-equilibrium bifurcation families and transversality
dynamics     adaptive RK 5(4) integration (compiled core + Python fallback)
oscillation  oscillation detection, amplitude/period, omega-limit classes
cli          command-line front end (`hpaxis`)
"""

from .dynamics import HAVE_COMPILED, Trajectory, integrate
from .equilibria import EquilibriumPoint, assemble_equilibrium, equilibrium_root, find_equilibrium
from .hopf import (
    HopfFamily,
    alpha_prime_at_zero,
    build_family,
    g2_from_equilibrium,
    hill_T0_for_slope_fraction,
    invert_theta0,
    theta0_of_g1,
)
from .model import (
    FeedbackSpec,
    ModelInstance,
    ModelParameters,
    State,
    constant_feedback,
    custom_feedback,
    eval_hill,
    hill_feedback,
    jacobian,
    load_model,
    model_from_dict,
    model_to_dict,
    vector_field,
)
from .oscillation import (
    OscillationReport,
    TridiagonalCheck,
    classify_omega_limit,
    detect_y_oscillation,
    mallet_parret_condition,
    measure_amplitude_period,
    sample_oscillation_fraction,
)
from .stability import (
    SlopeVerdict,
    StabilityReport,
    M_of_T,
    classify_local,
    sup_M,
    theta0,
)

__version__ = "0.1.0"
