"""Monte Carlo laboratory: configuration grid, data generation,
theoretical MSPE, the random oracle, relative losses with ratio
standard errors, and minimax summaries.

Every source of randomness flows through per-(configuration,
replication) sub-streams of one campaign seed, so results do not
depend on scheduling order and any configuration can be re-run in
isolation bit-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .penalties import PenaltySpec, step_costs
from .quantiles import RandomSource
from .regress import forward_sweep
from .selector import default_rule, stop

__all__ = [
    "P_FRACTIONS",
    "SimConfig",
    "MethodOutcome",
    "ConfigOutcome",
    "gen_design",
    "gen_beta",
    "solve_c_for_r2",
    "theoretical_mspe",
    "random_oracle",
    "run_config",
    "minimax_summary",
    "best_q_table",
]

# p-index 1..6 maps to these fractions of m (index 1 is sqrt(m)).
P_FRACTIONS = {2: 0.25, 3: 1.0 / 3.0, 4: 0.5, 5: 0.75, 6: 1.0}

DEFAULT_EFFECT_TARGET = 3.0  # smallest standardized true effect under c-scale "auto"


def p_from_index(p_index: int, m: int) -> int:
    if p_index == 1:
        p = round(math.sqrt(m))
    elif p_index in P_FRACTIONS:
        p = round(P_FRACTIONS[p_index] * m)
    else:
        raise ValueError(f"p-index must lie in 1..6, got {p_index}")
    return max(int(p), 1)


@dataclass(frozen=True)
class SimConfig:
    """One cell of the simulation grid."""

    m: int
    rho: float
    beta_type: int
    p_index: int
    replications: int = 1000
    seed: int = 0
    sigma: float = 1.0
    beta0: float = 10.0
    c_scale: object = "auto"  # positive float or "auto"
    effect_target: float = DEFAULT_EFFECT_TARGET

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be at least 2")
        if not abs(self.rho) < 1.0:
            raise ValueError("|rho| must be below 1")
        if self.beta_type not in (1, 2, 3):
            raise ValueError("beta-type must be 1, 2 or 3")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        p_from_index(self.p_index, self.m)  # validates
        if self.c_scale != "auto" and not (
            isinstance(self.c_scale, (int, float)) and self.c_scale > 0
        ):
            raise ValueError("c-scale must be a positive number or 'auto'")

    @property
    def n(self) -> int:
        return 2 * self.m

    @property
    def p(self) -> int:
        return p_from_index(self.p_index, self.m)

    def key(self) -> str:
        return f"m{self.m}_rho{self.rho:+.2f}_b{self.beta_type}_p{self.p_index}"


@dataclass(frozen=True)
class MethodOutcome:
    label: str
    mean_mspe: float
    relative_loss: float
    se_relative_loss: float


@dataclass(frozen=True)
class ConfigOutcome:
    config: SimConfig
    oracle_mspe: float
    methods: Tuple[MethodOutcome, ...]
    #: replications where some method beat the oracle (must stay zero:
    #: every method picks a prefix of the array the oracle minimizes)
    dominance_violations: int = 0

    def loss(self, label: str) -> float:
        for mo in self.methods:
            if mo.label == label:
                return mo.relative_loss
        raise KeyError(label)


_RHO_CODES = {-0.5: 0, 0.0: 1, 0.5: 2}


def _rho_code(rho: float) -> int:
    return _RHO_CODES.get(rho, int(abs(hash(round(rho, 6)))) % (2**31))


def gen_design(m: int, n: int, rho: float, source: RandomSource) -> np.ndarray:
    """n rows from N(0, Sigma) with Sigma_ij = rho^|i-j| via the AR(1) recursion."""
    if not abs(rho) < 1.0:
        raise ValueError("|rho| must be below 1")
    eps = source.generator().standard_normal((n, m))
    X = np.empty((n, m))
    X[:, 0] = eps[:, 0]
    scale = math.sqrt(1.0 - rho * rho)
    for j in range(1, m):
        X[:, j] = rho * X[:, j - 1] + scale * eps[:, j]
    return X


def solve_c_for_r2(X: np.ndarray, beta_unit: np.ndarray, target_r2: float, n: int) -> float:
    """Scale c with c^2 * u'X'Xu = n * R^2/(1-R^2)."""
    Xu = X @ beta_unit
    quad = float(Xu @ Xu)
    if quad <= 0.0:
        raise ValueError("degenerate quadratic form: X beta is identically zero")
    return math.sqrt((target_r2 / (1.0 - target_r2)) * n / quad)


def _auto_scale(X: np.ndarray, unit: np.ndarray, target: float, sigma: float) -> float:
    """c such that the smallest standardized true effect equals ``target``.

    Standard errors come from the true model (support columns plus an
    intercept), matching how estimator precision is assessed.
    """
    support = np.flatnonzero(unit)
    A = np.column_stack([np.ones(X.shape[0]), X[:, support]])
    xtx_inv = np.linalg.inv(A.T @ A)
    se = sigma * np.sqrt(np.diag(xtx_inv)[1:])
    ratios = unit[support] / se
    return target / float(ratios.min())


def gen_beta(config: SimConfig, X: np.ndarray, source: RandomSource) -> np.ndarray:
    """True coefficient vector (length m, zeros beyond the support).

    Type 1 decays as 1/sqrt(i), type 2 as p/(m*i) so the smallest
    nonzero coefficient is c/m (uniform random shape when p = sqrt(m)),
    type 3 is constant at the level giving theoretical R^2 = 0.75.
    """
    m, p = config.m, config.p
    unit = np.zeros(m)
    idx = np.arange(1, p + 1, dtype=float)
    if config.beta_type == 1:
        unit[:p] = 1.0 / np.sqrt(idx)
    elif config.beta_type == 2:
        if config.p_index == 1:
            u = source.generator().uniform(1.0 / m, 1.0, size=p)
            unit[:p] = u
        else:
            unit[:p] = p / (m * idx)
    else:
        unit[:p] = 1.0

    if config.beta_type == 3:
        c = solve_c_for_r2(X, unit, 0.75, config.n)
    elif config.c_scale == "auto":
        c = _auto_scale(X, unit, config.effect_target, config.sigma)
    else:
        c = float(config.c_scale)
    return c * unit


def theoretical_mspe(
    X: np.ndarray,
    beta: np.ndarray,
    subset: Sequence[int],
    sigma2: float,
    intercept: bool = True,
) -> float:
    """sigma2 * k plus the squared omitted-signal bias.

    k counts fitted parameters including the intercept; the bias is the
    squared norm of X2 beta2 projected off the span of the selected
    columns (plus intercept).
    """
    subset = list(subset)
    rest = sorted(set(range(X.shape[1])) - set(subset))
    b2 = X[:, rest] @ beta[rest] if rest else np.zeros(X.shape[0])
    cols = []
    if intercept:
        cols.append(np.ones(X.shape[0]))
    if subset:
        cols.append(X[:, subset])
    k = len(subset) + (1 if intercept else 0)
    if not cols:
        return sigma2 * k + float(b2 @ b2)
    A = np.column_stack(cols) if len(cols) > 1 else np.atleast_2d(cols[0]).T if cols[0].ndim == 1 else cols[0]
    coef, _, rank, _ = np.linalg.lstsq(A, b2, rcond=None)
    if rank < A.shape[1]:
        raise np.linalg.LinAlgError("selected columns are rank deficient")
    resid = b2 - A @ coef
    return sigma2 * k + float(resid @ resid)


def random_oracle(
    prefix_mspe: np.ndarray,
) -> Tuple[int, float]:
    """Best prefix of a path given its per-prefix theoretical MSPE."""
    k = int(np.argmin(prefix_mspe))
    return k, float(prefix_mspe[k])


def path_prefix_mspe(bias: np.ndarray, sigma2: float, intercept: bool = True) -> np.ndarray:
    ks = np.arange(len(bias)) + (1 if intercept else 0)
    return sigma2 * ks + bias


def run_config(
    config: SimConfig,
    methods: Sequence[Tuple[PenaltySpec, Optional[str]]],
) -> ConfigOutcome:
    """Run one configuration's replications and aggregate relative losses.

    One design matrix per (m, rho, seed) is held fixed across
    replications; each replication draws fresh noise from its own
    sub-stream.  All methods are evaluated on the same forward path as
    the random oracle, and relative loss is the ratio of mean MSPEs
    with a ratio-estimator standard error.
    """
    root = RandomSource(config.seed)
    X = gen_design(config.m, config.n, config.rho,
                   root.substream(1, config.m, _rho_code(config.rho)))
    beta = gen_beta(config, X, root.substream(2, config.m, _rho_code(config.rho),
                                              config.beta_type, config.p_index))
    sigma2 = config.sigma**2
    signal = X @ beta
    m = config.m

    resolved = []
    for spec, rule in methods:
        eff = rule if rule is not None else default_rule(spec)
        label = spec.label() if eff == default_rule(spec) else f"{spec.label()}@{eff}"
        resolved.append((spec, eff, label))

    costs = {}
    for spec, rule, label in resolved:
        if spec.family == "tsfdr":
            q1 = spec.q / (1.0 + spec.q)
            costs[label] = step_costs(PenaltySpec("bh", q=q1), m, m)
        else:
            costs[label] = step_costs(spec, m, m)

    oracle_vals = np.empty(config.replications)
    method_vals = {label: np.empty(config.replications) for _, _, label in resolved}
    violations = 0

    for r in range(config.replications):
        eps = root.substream(3, config.m, _rho_code(config.rho),
                             config.beta_type, config.p_index, r)
        y = config.beta0 + signal + config.sigma * eps.generator().standard_normal(config.n)
        _, rss, bias = forward_sweep(X, y, k_max=m, center=True, true_mean=signal)
        prefix = path_prefix_mspe(bias, sigma2, intercept=True)
        _, oracle_vals[r] = random_oracle(prefix)
        tsq = np.maximum(-np.diff(rss), 0.0) / sigma2
        K = len(tsq)
        for spec, rule, label in resolved:
            c = costs[label][:K]
            trace_diffs = sigma2 * (c - tsq)
            trace = np.concatenate([[0.0], np.cumsum(trace_diffs)])
            k = stop(trace, rule)
            if spec.family == "tsfdr" and 0 < k < m:
                q1 = spec.q / (1.0 + spec.q)
                ks = np.arange(1, K + 1)
                alpha2 = np.minimum(ks * q1 / (m - k), 1.0 - 1e-15)
                c2 = _zsq_vec(alpha2 / 2.0)
                trace2 = np.concatenate([[0.0], np.cumsum(sigma2 * (c2 - tsq))])
                k = stop(trace2, rule)
            method_vals[label][r] = prefix[min(k, K)]
            if method_vals[label][r] < oracle_vals[r]:
                violations += 1

    x = oracle_vals
    xbar = float(x.mean())
    outs = []
    for _, _, label in resolved:
        yv = method_vals[label]
        ybar = float(yv.mean())
        ratio = ybar / xbar
        se = _ratio_se(yv, x, ratio)
        outs.append(MethodOutcome(label, ybar, ratio, se))
    return ConfigOutcome(config=config, oracle_mspe=xbar, methods=tuple(outs),
                         dominance_violations=violations)


def _zsq_vec(alpha_half: np.ndarray) -> np.ndarray:
    from .quantiles import inverse_normal_cdf

    return np.array([inverse_normal_cdf(1.0 - a) ** 2 for a in alpha_half])


def _ratio_se(yv: np.ndarray, x: np.ndarray, ratio: float) -> float:
    reps = len(x)
    if reps < 2:
        return float("nan")
    xbar = x.mean()
    sy2 = yv.var(ddof=1)
    sx2 = x.var(ddof=1)
    sxy = float(np.cov(yv, x, ddof=1)[0, 1])
    var = (sy2 + ratio * ratio * sx2 - 2.0 * ratio * sxy) / (reps * xbar * xbar)
    return math.sqrt(max(var, 0.0))


def minimax_summary(
    outcomes: Sequence[ConfigOutcome],
    worst_k: object = 1,
) -> Dict[str, float]:
    """Per-method mean of the worst-k relative losses over a set of outcomes.

    ``worst_k`` is a positive integer or the string "ALL" (plain mean).
    """
    if not outcomes:
        raise ValueError("no configuration outcomes to summarize")
    labels = [mo.label for mo in outcomes[0].methods]
    out = {}
    for label in labels:
        losses = sorted((o.loss(label) for o in outcomes), reverse=True)
        if worst_k == "ALL":
            take = losses
        else:
            k = int(worst_k)
            if k < 1:
                raise ValueError("worst-k must be positive or 'ALL'")
            take = losses[:k]
        out[label] = float(np.mean(take))
    return out


def best_q_table(
    outcomes: Sequence[ConfigOutcome],
    family: str,
) -> Dict[float, float]:
    """Worst-case relative loss per q level for one FDR family."""
    by_q: Dict[float, List[float]] = {}
    for o in outcomes:
        for mo in o.methods:
            fam, _, qs = mo.label.partition(":")
            if fam == family and qs:
                by_q.setdefault(float(qs), []).append(mo.relative_loss)
    return {q: max(v) for q, v in sorted(by_q.items())}
