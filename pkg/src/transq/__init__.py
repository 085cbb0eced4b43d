"""Exact busy-period distribution for a queue fed by a finite pool of customers."""

from .distribution import BusyPeriodDistribution, Method
from .exact import (
    a_inverse_explicit,
    b_coefficient,
    b_coefficient_binomial,
    busy_dist_explicit,
    busy_dist_matrix,
    busy_dist_recursion,
    busy_dist_recursion_binomial,
    cancellation_report,
    gf_coefficients,
    gf_evaluate,
    invert_lower_triangular,
    joint_busy_dist,
    matrix_A,
    vector_b,
)
from .model import Model, model_from_config, model_from_rate, model_from_sequence, rho
from .montecarlo import estimate_busy_dist, estimate_joint_busy, simulate_chain
from .oracle import busy_dist_bruteforce, busy_dist_enumeration, p_n_i_bruteforce
from .paths import (
    enumerate_dyck,
    enumerate_feasible,
    excursion_decomposition,
    first_return,
    is_feasible,
    path_weight,
)

__version__ = "0.1.0"
