"""Finite-N extrapolation of configuration infima."""

import logging
from typing import Sequence

import numpy as np
from sklearn.linear_model import LinearRegression

from ionlab.exceptions import DomainError
from ionlab.models import FitResult

logger = logging.getLogger(__name__)

# Leading finite-size correction of the beta infimum
FINITE_SIZE_EXPONENT = -2.0 / 3.0


def fit_finite_size(ns: Sequence[int], values: Sequence[float]) -> FitResult:
    """
    Least-squares fit of v(N) = beta_est - c_est * N^(-2/3).

    Args:
        ns: Particle numbers (at least two distinct)
        values: Configuration infima v(N)

    Returns:
        FitResult with the root-mean-square residual
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if ns.shape != values.shape or np.unique(ns).size < 2:
        raise DomainError("the finite-size fit needs values at two or more distinct N")

    features = (ns ** FINITE_SIZE_EXPONENT).reshape(-1, 1)
    model = LinearRegression().fit(features, values)
    residual = float(np.sqrt(np.mean((model.predict(features) - values) ** 2)))

    fit = FitResult(beta_est=float(model.intercept_), c_est=float(-model.coef_[0]), residual=residual)
    logger.info(f"Finite-size fit: beta_est={fit.beta_est:.6f} c_est={fit.c_est:.6f} rms={fit.residual:.2e}")
    return fit
