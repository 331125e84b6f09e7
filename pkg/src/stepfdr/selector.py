"""Turn a forward path plus a penalty into a selected model.

Three stopping rules on the penalized-RSS trace, the iterative
p-to-enter computation of the multiple-stage procedure, and the
two-stage FDR composition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .penalties import PenaltySpec, step_costs
from .quantiles import two_sided_pvalue
from .regress import Dataset, ForwardPath, forward_path, least_squares

__all__ = [
    "RULES",
    "SelectionResult",
    "penalized_trace",
    "stop",
    "select",
    "msfdr_iterative",
    "tsfdr_select",
    "default_rule",
]

RULES = ("first-local-min", "global-min", "last-crossing")

# Step-down procedures stop at the leftmost local minimum, the step-up
# BH at the last crossing; for the remaining penalties the global
# minimum of the penalized RSS reproduces the published diabetes
# selections, so it is the default.
_DEFAULT_RULES = {"msfdr": "first-local-min", "tsfdr": "first-local-min", "bh": "last-crossing"}


def default_rule(spec: PenaltySpec) -> str:
    return _DEFAULT_RULES.get(spec.family, "global-min")


@dataclass(frozen=True)
class SelectionResult:
    """Selected prefix of a forward path under one penalty and rule."""

    k_selected: int
    selected: tuple
    coefficients: np.ndarray
    trace: np.ndarray
    rule: str
    method: PenaltySpec
    sigma2: float
    sigma2_source: str
    intercept_counted: bool = False
    iterations: Optional[int] = None

    @property
    def k_with_intercept(self) -> int:
        return self.k_selected + (1 if self.intercept_counted else 0)


def penalized_trace(path: ForwardPath, spec: PenaltySpec, m: int) -> np.ndarray:
    """trace(k) = RSS_k + sigma2 * k * lambda_{k,m} for k = 0..K."""
    K = path.depth
    if K == 0:
        return path.rss[:1].copy()
    costs = step_costs(spec, m, K)
    return np.concatenate([[path.rss[0]], path.rss[1:] + path.sigma2 * np.cumsum(costs)])


def stop(trace: np.ndarray, rule: str) -> int:
    """Model size chosen on a penalized trace by the given rule.

    Ties (equal consecutive trace values) count as continued descent,
    matching rejection at p-values exactly equal to their constants.
    """
    trace = np.asarray(trace, dtype=float)
    if trace.ndim != 1 or len(trace) < 1:
        raise ValueError("trace must be a nonempty 1-d sequence")
    K = len(trace) - 1
    diffs = np.diff(trace)
    if rule == "first-local-min":
        rising = np.flatnonzero(diffs > 0)
        return int(rising[0]) if rising.size else K
    if rule == "global-min":
        return int(np.argmin(trace))
    if rule == "last-crossing":
        down = np.flatnonzero(diffs <= 0)
        return int(down[-1]) + 1 if down.size else 0
    raise ValueError(f"unknown stopping rule {rule!r}")


def _finish(dataset, path, spec, rule, trace, k, iterations=None) -> SelectionResult:
    selected = path.entered[:k]
    coef, _ = least_squares(dataset, selected)
    return SelectionResult(
        k_selected=k,
        selected=tuple(selected),
        coefficients=np.asarray(coef),
        trace=trace,
        rule=rule,
        method=spec,
        sigma2=path.sigma2,
        sigma2_source=path.sigma2_source,
        intercept_counted=path.intercept_forced,
        iterations=iterations,
    )


def select(
    dataset: Dataset,
    spec: PenaltySpec,
    rule: Optional[str] = None,
    sigma2: Optional[float] = None,
    path: Optional[ForwardPath] = None,
) -> SelectionResult:
    """Forward path -> penalized trace -> stopping rule -> refit."""
    if spec.family == "tsfdr":
        return tsfdr_select(dataset, spec.q, rule=rule, sigma2=sigma2, path=path)
    if rule is None:
        rule = default_rule(spec)
    if path is None:
        path = forward_path(dataset, sigma2=sigma2)
    trace = penalized_trace(path, spec, dataset.m)
    k = stop(trace, rule)
    return _finish(dataset, path, spec, rule, trace, k)


def msfdr_iterative(
    dataset: Dataset,
    q: float,
    sigma2: Optional[float] = None,
    path: Optional[ForwardPath] = None,
    max_iterations: int = 10_000,
) -> SelectionResult:
    """Fixed-point computation of the multiple-stage procedure.

    Repeatedly runs forward selection at a constant p-to-enter
    alpha_i = i*q/(m + 1 - i*(1 - q)), feeding the resulting model size
    back as the next index until it stabilizes.  When an intercept is
    in play it occupies position 1 of the size counter, so the counter
    is (entered candidates) + 1 while the pool size m counts candidates
    only.
    """
    spec = PenaltySpec("msfdr", q=q)
    if path is None:
        path = forward_path(dataset, sigma2=sigma2)
    m = dataset.m
    offset = 1 if path.intercept_forced else 0
    pvals = np.array([two_sided_pvalue(t) for t in np.maximum(path.tsq, 0.0)])

    i = 1
    iterations = 0
    while True:
        iterations += 1
        alpha = i * q / (m + 1 - i * (1.0 - q))
        run = 0
        while run < path.depth and pvals[run] <= alpha:
            run += 1
        i_next = run + offset
        if i_next == i or i_next < i or iterations >= max_iterations:
            k = min(run, path.depth)
            break
        i = i_next

    trace = penalized_trace(path, spec, m)
    return _finish(dataset, path, spec, "iterative-p-to-enter", trace, k, iterations)


def tsfdr_select(
    dataset: Dataset,
    q: float,
    rule: Optional[str] = None,
    sigma2: Optional[float] = None,
    path: Optional[ForwardPath] = None,
) -> SelectionResult:
    """Two-stage FDR composition.

    Stage 1 applies the BH penalty at q' = q/(1+q).  If it selects
    nothing or everything that is the answer; otherwise stage 2 rescans
    the same path with constants alpha_i = i*q'/(m - r1).
    """
    if rule is None:
        rule = "first-local-min"
    if path is None:
        path = forward_path(dataset, sigma2=sigma2)
    m = dataset.m
    q1 = q / (1.0 + q)
    spec_out = PenaltySpec("tsfdr", q=q)

    stage1 = PenaltySpec("bh", q=q1)
    trace1 = penalized_trace(path, stage1, m)
    r1 = stop(trace1, rule)
    if r1 == 0 or r1 >= m:
        k = min(r1, path.depth)
        return _finish(dataset, path, spec_out, rule, trace1, k)

    costs2 = _bh_like_costs(q1, m - r1, path.depth)
    trace2 = np.concatenate(
        [[path.rss[0]], path.rss[1:] + path.sigma2 * np.cumsum(costs2)]
    )
    k = stop(trace2, rule)
    return _finish(dataset, path, spec_out, rule, trace2, k)


def _bh_like_costs(q: float, denom: int, k_max: int) -> np.ndarray:
    from .quantiles import inverse_normal_cdf

    out = np.empty(k_max)
    for k in range(1, k_max + 1):
        alpha = min(k * q / denom, 1.0 - 1e-15)
        z = inverse_normal_cdf(1.0 - alpha / 2.0)
        out[k - 1] = z * z
    return out
