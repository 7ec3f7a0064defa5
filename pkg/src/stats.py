"""Normal and Student-t quantiles used by the mean bounders."""

import numpy as np
from scipy import special

from exceptions import InvalidArgumentError


def _check_probability(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0) & (p < 1)):
        raise InvalidArgumentError(f"Quantile level must lie strictly inside (0, 1), got {p}")
    return p


def normal_quantile(p):
    """Inverse of the standard normal CDF, elementwise for array input."""
    p = _check_probability(p)
    x = special.ndtri(p)
    return float(x) if x.ndim == 0 else x


def t_quantile(p, df):
    """Inverse CDF of Student's t with ``df`` degrees of freedom."""
    p = _check_probability(p)
    df = np.asarray(df)
    if not np.all(df >= 1):
        raise InvalidArgumentError(f"Degrees of freedom must be at least 1, got {df}")
    x = special.stdtrit(df.astype(float), p)
    return float(x) if np.ndim(x) == 0 else x
