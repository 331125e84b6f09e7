"""Shared test construction: orthogonal datasets with prescribed p-values."""

import numpy as np

from stepfdr.quantiles import inverse_normal_cdf
from stepfdr.regress import Dataset


def tsq_for_pvalues(pvals):
    """Squared statistics whose two-sided p-values are exactly ``pvals``."""
    return np.array([inverse_normal_cdf(1.0 - p / 2.0) ** 2 for p in pvals])


def orthogonal_dataset(pvals):
    """Dataset whose forward path has squared statistics z(p_i/2)^2.

    Columns are centered orthonormal vectors, so with sigma2 = 1 the
    forward path enters variables by increasing p-value and each step's
    RSS drop equals the prescribed squared statistic exactly.
    """
    m = len(pvals)
    n = m + 2
    A = np.eye(n) - 1.0 / n  # centered identity; rank n-1
    Q, _ = np.linalg.qr(A)
    Xcols = Q[:, :m]
    y = Xcols @ np.sqrt(tsq_for_pvalues(pvals))
    names = tuple(f"x{j}" for j in range(m))
    return Dataset(y=y, X=Xcols, names=names, standardized=True)
