"""Least-squares machinery: standardization, the greedy forward path,
exact reference solvers and residual-variance estimation.

The forward path keeps residualized copies of every candidate column
(classical Gram-Schmidt sweep), so each step costs O(n*m) instead of a
full refit per candidate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Dataset",
    "ForwardPath",
    "DegenerateColumnError",
    "standardize",
    "least_squares",
    "estimate_sigma2",
    "forward_path",
    "forward_sweep",
]

RANK_RTOL = 1e-12


class DegenerateColumnError(ValueError):
    """A candidate column is constant and cannot be standardized."""


@dataclass(frozen=True)
class Dataset:
    """Response vector plus named candidate-predictor matrix."""

    y: np.ndarray
    X: np.ndarray
    names: tuple
    intercept_forced: bool = False
    standardized: bool = False

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if y.shape != (X.shape[0],):
            raise ValueError("y length must match the number of rows of X")
        if X.shape[0] < 2 or X.shape[1] < 1:
            raise ValueError("need at least 2 observations and 1 candidate column")
        if len(self.names) != X.shape[1]:
            raise ValueError("one name per candidate column required")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    @property
    def has_intercept(self) -> bool:
        # Standardization centers y and X, which absorbs one intercept dof.
        return self.intercept_forced or self.standardized


@dataclass(frozen=True)
class ForwardPath:
    """Ordered forward-selection entry sequence with its RSS profile.

    ``tsq[k-1]`` is the squared standardized coefficient of the k-th
    entering column, (RSS_{k-1} - RSS_k) / sigma2.
    """

    entered: tuple
    rss: np.ndarray
    sigma2: float
    sigma2_source: str
    intercept_forced: bool = False
    tsq: np.ndarray = field(init=False)

    def __post_init__(self):
        rss = np.asarray(self.rss, dtype=float)
        if len(rss) != len(self.entered) + 1:
            raise ValueError("rss must have one value per model size 0..K")
        if self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "entered", tuple(self.entered))
        object.__setattr__(self, "rss", rss)
        object.__setattr__(self, "tsq", -np.diff(rss) / self.sigma2)

    @property
    def depth(self) -> int:
        return len(self.entered)


def standardize(dataset: Dataset) -> Dataset:
    """Center y; center every column of X and scale it to unit length."""
    X = dataset.X
    means = X.mean(axis=0)
    Xc = X - means
    lengths = np.sqrt((Xc * Xc).sum(axis=0))
    bad = np.flatnonzero(lengths <= 0.0)
    if bad.size:
        raise DegenerateColumnError(
            f"column {dataset.names[bad[0]]!r} is constant and cannot be standardized"
        )
    yc = dataset.y - dataset.y.mean()
    return Dataset(
        y=yc,
        X=Xc / lengths,
        names=dataset.names,
        intercept_forced=dataset.intercept_forced,
        standardized=True,
    )


def least_squares(dataset: Dataset, subset: Sequence[int]) -> tuple:
    """Exact least-squares fit on ``subset`` columns; returns (coef, rss).

    Serves as the reference oracle for the incremental forward path.
    An intercept is included when the dataset carries one.
    """
    subset = list(subset)
    if len(set(subset)) != len(subset):
        raise ValueError("subset indices must be distinct")
    y = dataset.y
    cols = [dataset.X[:, j] for j in subset]
    if dataset.intercept_forced:
        cols = [np.ones(dataset.n)] + cols
    if not cols:
        if dataset.standardized:
            return np.empty(0), float(y @ y)
        return np.empty(0), float(((y - 0.0) ** 2).sum())
    A = np.column_stack(cols)
    if A.shape[1] >= dataset.n:
        raise ValueError("subset too large for the number of observations")
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < A.shape[1]:
        raise np.linalg.LinAlgError("subset columns are rank deficient")
    resid = y - A @ coef
    rss = float(resid @ resid)
    if dataset.intercept_forced:
        coef = coef[1:]
    return coef, rss


def estimate_sigma2(dataset: Dataset) -> float:
    """Residual variance of the full model, RSS_full / (n - m - intercept)."""
    dof = dataset.n - dataset.m - (1 if dataset.has_intercept else 0)
    if dof <= 0:
        raise ValueError(
            f"insufficient degrees of freedom: n={dataset.n}, m={dataset.m} "
            "(need n > m + 1 with an intercept)"
        )
    _, rss_full = least_squares(dataset, range(dataset.m))
    scale = float(dataset.y @ dataset.y)
    if rss_full <= 1e-12 * max(scale, 1.0):
        warnings.warn(
            "full-model residual is numerically zero; the variance "
            "estimate is degenerate (response lies in the span of the "
            "candidates)",
            RuntimeWarning,
            stacklevel=2,
        )
    return rss_full / dof


def forward_sweep(
    X: np.ndarray,
    y: np.ndarray,
    k_max: int,
    center: bool = False,
    true_mean: Optional[np.ndarray] = None,
):
    """Greedy forward selection by maximal RSS reduction.

    Returns ``(order, rss, bias)`` where ``rss[k]`` is the residual sum
    of squares after k entries and ``bias`` (when ``true_mean`` is
    given) holds the squared norm of ``true_mean`` projected off the
    span of the model at each prefix, used for theoretical MSPE along
    the path. When ``center`` is set an intercept is swept out first
    and does not count toward ``order``.

    Ties break toward the lowest column index; the path stops early
    once no candidate reduces the RSS by more than RANK_RTOL * RSS_0.
    """
    Z = np.array(X, dtype=float)
    r = np.array(y, dtype=float)
    n, m = Z.shape
    if center:
        Z -= Z.mean(axis=0)
        r -= r.mean()
    b = None
    bias = None
    if true_mean is not None:
        b = np.asarray(true_mean, dtype=float)
        if center:
            b = b - b.mean()
        bias = [float(b @ b)]

    norms2 = (Z * Z).sum(axis=0)
    scores = Z.T @ r
    scale = max(norms2.max(initial=0.0), 1.0)
    rss0 = float(r @ r)
    rss = [rss0]
    order = []
    active = np.ones(m, dtype=bool)
    tol = RANK_RTOL * rss0

    for _ in range(k_max):
        drops = np.where(
            active & (norms2 > RANK_RTOL * scale),
            scores**2 / np.where(norms2 > 0, norms2, 1.0),
            -np.inf,
        )
        j = int(np.argmax(drops))
        if not np.isfinite(drops[j]) or drops[j] <= tol:
            break
        q = Z[:, j] / np.sqrt(norms2[j])
        proj_r = float(q @ r)
        r -= proj_r * q
        cz = q @ Z
        Z -= np.outer(q, cz)
        norms2 = np.maximum(norms2 - cz * cz, 0.0)
        scores = Z.T @ r
        active[j] = False
        order.append(j)
        rss.append(max(rss[-1] - float(drops[j]), 0.0))
        if bias is not None:
            pb = float(q @ b)
            bias.append(max(bias[-1] - pb * pb, 0.0))

    rss_arr = np.array(rss)
    bias_arr = np.array(bias) if bias is not None else None
    return order, rss_arr, bias_arr


def forward_path(
    dataset: Dataset,
    sigma2: Optional[float] = None,
    k_max: Optional[int] = None,
) -> ForwardPath:
    """Run forward selection on a dataset and attach the sigma2 scale.

    ``sigma2=None`` estimates it from the full model; a positive value
    is used as a known variance.
    """
    if not (dataset.standardized or dataset.intercept_forced):
        raise ValueError("dataset must be standardized or carry a forced intercept")
    cap = min(dataset.m, dataset.n - 1 - (1 if dataset.has_intercept else 0))
    if k_max is None:
        k_max = cap
    if not 1 <= k_max <= cap:
        raise ValueError(f"k_max must lie in [1, {cap}], got {k_max}")
    if sigma2 is None:
        s2 = estimate_sigma2(dataset)
        source = "estimated-from-full-model"
        if s2 <= 0.0:
            raise ValueError("degenerate fit: full-model RSS is zero, sigma2 unavailable")
    else:
        s2 = float(sigma2)
        source = "known"
        if s2 <= 0.0:
            raise ValueError("known sigma2 must be positive")
    order, rss, _ = forward_sweep(
        dataset.X, dataset.y, k_max, center=dataset.intercept_forced
    )
    return ForwardPath(
        entered=order,
        rss=rss,
        sigma2=s2,
        sigma2_source=source,
        intercept_forced=dataset.has_intercept,
    )
