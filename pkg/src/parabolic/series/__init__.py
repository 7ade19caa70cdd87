"""Exact and floating truncated-series arithmetic."""
from .coeff import Mode, ModeError, QQI, as_mode, is_zero, one, zero
from .laurent import Laurent1, scalar
from .logseries import RamifiedLogSeries, branch_log, common_ramification, from_poly2_sheared
from .poly2 import (
    Poly2,
    TruncationError,
    binomial_series,
    compose_germ,
    log1p_poly,
    log1p_series,
    poly_mul,
    ramified_pow,
    series_inverse,
)
from .symbolic import factor_poly, factor_univariate, poly_gcd

__all__ = [
    "Mode", "ModeError", "QQI", "as_mode", "is_zero", "one", "zero",
    "Laurent1", "scalar", "RamifiedLogSeries", "branch_log", "common_ramification",
    "from_poly2_sheared", "Poly2", "TruncationError", "binomial_series", "compose_germ",
    "log1p_poly", "log1p_series", "poly_mul", "ramified_pow", "series_inverse",
    "factor_poly", "factor_univariate", "poly_gcd",
]
