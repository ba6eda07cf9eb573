"""Special functions, Dickman's rho and the explicit theorem bounds."""
from .dickman import (
    B4,
    DickmanTable,
    b4_constant,
    default_table,
    dickman_log_deriv_check,
    dickman_log_rho,
    dickman_rho,
    log_derivative,
)
from .special import (
    BinomialTailBound,
    binomial_tail_bound,
    log_factorial,
    no_small_error_exponent,
    normal_cdf,
    poisson_tail_bound,
    poisson_tv_exponent,
    q_function,
)
from .bounds import BOUND_NAMES, BoundReport, bound_suite, theorem_bound

__all__ = [
    "B4",
    "BOUND_NAMES",
    "BinomialTailBound",
    "BoundReport",
    "DickmanTable",
    "b4_constant",
    "binomial_tail_bound",
    "bound_suite",
    "default_table",
    "dickman_log_deriv_check",
    "dickman_log_rho",
    "dickman_rho",
    "log_derivative",
    "log_factorial",
    "no_small_error_exponent",
    "normal_cdf",
    "poisson_tail_bound",
    "poisson_tv_exponent",
    "q_function",
    "theorem_bound",
]
