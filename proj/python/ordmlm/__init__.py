"""Two-level random-intercept ordinal logistic models for child anemia surveys."""

from ._core import (
    ConvergenceError,
    Error,
    anemia_label,
    category_probs,
    chi_square_sf,
    chi_square_test,
    classify_hemoglobin,
    cumulative_pp,
    fit,
    icc,
    lrt,
    odds_ratio,
    simulate,
    wald_t_test,
)

__all__ = [
    "ConvergenceError",
    "Error",
    "anemia_label",
    "category_probs",
    "chi_square_sf",
    "chi_square_test",
    "classify_hemoglobin",
    "cumulative_pp",
    "fit",
    "icc",
    "lrt",
    "odds_ratio",
    "simulate",
    "wald_t_test",
]
