"""Python bindings for the convsep C++ core."""

from ._convsep import (
    ContractError,
    DivergenceError,
    EvaluationError,
    ParseError,
    check_names,
    cos_gaussian_mean,
    cos_squared_diff_mean,
    cosine_gradient,
    cosine_objective,
    cross_term,
    nondegeneracy_floor,
    parity_gradient,
    parity_objective,
    run_check,
    self_term,
    sgd_train,
    v_sigma,
)

__all__ = [
    "ContractError",
    "DivergenceError",
    "EvaluationError",
    "ParseError",
    "check_names",
    "cos_gaussian_mean",
    "cos_squared_diff_mean",
    "cosine_gradient",
    "cosine_objective",
    "cross_term",
    "nondegeneracy_floor",
    "parity_gradient",
    "parity_objective",
    "run_check",
    "self_term",
    "sgd_train",
    "v_sigma",
]
