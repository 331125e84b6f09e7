"""The ten penalty families.

Each family defines a per-parameter penalty factor lambda(k, m); the
marginal cost of the k-th entry is c_k = k*lambda_k - (k-1)*lambda_{k-1}.
For the FDR families c_k is the squared normal quantile at half the
step constant alpha_k.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .quantiles import inverse_normal_cdf

__all__ = [
    "FAMILIES",
    "PenaltySpec",
    "PenaltyTable",
    "UnsupportedFamilyError",
    "step_alpha",
    "step_cost",
    "penalty_factor",
    "penalty_table",
]

# Families whose lambda is the running average of per-step costs derived
# from an explicit formula (rather than the other way round).
_CUMULATIVE = {"bh", "msfdr", "fs", "tk", "gf"}

FAMILIES = ("bh", "msfdr", "tsfdr", "fixed-alpha", "aic", "dj", "fs", "tk", "bm", "gf")

# Birge-Massart style penalty 2*log(C*m/k). The source material leaves C
# unstated; this default reproduces its published diabetes selections
# (3 main-effect terms, 2 quadratic-pool terms). Override via PenaltySpec.
DEFAULT_BM_CONSTANT = 2000.0


class UnsupportedFamilyError(ValueError):
    """Operation not defined for this penalty family."""


@dataclass(frozen=True)
class PenaltySpec:
    """Tagged choice of penalty family with its parameters.

    ``q`` applies to bh/msfdr/tsfdr, ``p`` to fixed-alpha, ``cap`` is
    the optional probability ceiling on msfdr step constants and
    ``c_bm`` the Birge-Massart multiplicative constant.  ``cap_mode``
    selects where the ceiling applies: ``"subscript"`` caps the
    quantile subscript at C (the printed form), ``"pvalue"`` caps the
    step constant itself before halving.
    """

    family: str
    q: Optional[float] = None
    p: Optional[float] = None
    cap: Optional[float] = None
    cap_mode: str = "subscript"
    c_bm: float = DEFAULT_BM_CONSTANT

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnsupportedFamilyError(f"unknown penalty family {self.family!r}")
        if self.family in ("bh", "msfdr", "tsfdr"):
            if self.q is None or not 0.0 < self.q < 1.0:
                raise ValueError(f"{self.family} requires q in (0, 1)")
            if self.family == "msfdr" and self.q >= 0.5:
                warnings.warn(
                    "msfdr with q >= 0.5 loses its asymptotic optimality guarantees",
                    stacklevel=2,
                )
        if self.family == "fixed-alpha" and (self.p is None or not 0.0 < self.p < 1.0):
            raise ValueError("fixed-alpha requires p in (0, 1)")
        if self.cap is not None and not 0.0 < self.cap < 1.0:
            raise ValueError("cap must lie in (0, 1)")
        if self.cap_mode not in ("subscript", "pvalue"):
            raise ValueError("cap_mode must be 'subscript' or 'pvalue'")
        if self.c_bm <= 0.0:
            raise ValueError("c_bm must be positive")

    def label(self) -> str:
        if self.family in ("bh", "msfdr", "tsfdr"):
            return f"{self.family}:{self.q:g}"
        if self.family == "fixed-alpha":
            return f"fixed-alpha:{self.p:g}"
        return self.family


def step_alpha(spec: PenaltySpec, i: int, m: int) -> float:
    """Step constant alpha_i for the FDR-type families."""
    if spec.family not in ("bh", "msfdr", "fixed-alpha"):
        raise UnsupportedFamilyError(
            f"step constants are not defined for family {spec.family!r}"
        )
    if not 1 <= i <= m:
        raise ValueError(f"step index must lie in [1, {m}], got {i}")
    if spec.family == "bh":
        return i * spec.q / m
    if spec.family == "msfdr":
        return i * spec.q / (m + 1 - i * (1.0 - spec.q))
    return spec.p


def _zsq(alpha_half: float) -> float:
    z = inverse_normal_cdf(1.0 - alpha_half)
    return z * z


def step_cost(spec: PenaltySpec, k: int, m: int) -> float:
    """Marginal penalty c_k of entering the k-th variable."""
    if not 1 <= k <= m:
        raise ValueError(f"model size must lie in [1, {m}], got {k}")
    fam = spec.family
    if fam in ("bh", "msfdr"):
        a = step_alpha(spec, k, m)
        if fam == "msfdr" and spec.cap is not None:
            if spec.cap_mode == "pvalue":
                sub = min(a, spec.cap) / 2.0
            else:
                sub = min(a / 2.0, spec.cap)
        else:
            sub = a / 2.0
        return _zsq(sub)
    if fam == "fixed-alpha":
        return _zsq(spec.p / 2.0)
    if fam == "aic":
        return 2.0
    if fam == "dj":
        return 2.0 * math.log(m)
    if fam == "fs":
        return 2.0 * math.log(m / k)
    if fam == "tk":
        return 2.0 * 2.0 * math.log(m / k)
    if fam == "bm":
        # difference of k * 2*log(C*m/k)
        def klam(j):
            return 0.0 if j == 0 else j * 2.0 * math.log(spec.c_bm * m / j)

        return klam(k) - klam(k - 1)
    if fam == "gf":
        return 2.0 * math.log((m + 1 - k) / k)
    raise UnsupportedFamilyError(
        f"family {spec.family!r} has no standalone penalty (two-stage composition)"
    )


def step_costs(spec: PenaltySpec, m: int, k_max: int) -> np.ndarray:
    """Vector of marginal costs c_1..c_{k_max}."""
    if not 1 <= k_max <= m:
        raise ValueError(f"k_max must lie in [1, {m}]")
    return np.array([step_cost(spec, k, m) for k in range(1, k_max + 1)])


def penalty_factor(spec: PenaltySpec, k: int, m: int) -> float:
    """Per-parameter penalty factor lambda_{k,m}."""
    if not 1 <= k <= m:
        raise ValueError(f"model size must lie in [1, {m}], got {k}")
    fam = spec.family
    if fam == "fixed-alpha":
        return _zsq(spec.p / 2.0)
    if fam == "aic":
        return 2.0
    if fam == "dj":
        return 2.0 * math.log(m)
    if fam == "bm":
        return 2.0 * math.log(spec.c_bm * m / k)
    # cumulative-average families: mean of step costs
    return float(np.mean([step_cost(spec, i, m) for i in range(1, k + 1)]))


@dataclass(frozen=True)
class PenaltyTable:
    """Penalty factors and step costs for one family on a (k, m) grid."""

    spec: PenaltySpec
    m: int
    k_max: int
    alpha: np.ndarray  # nan where the family has no step constants
    lam: np.ndarray
    cost: np.ndarray = field(init=False)

    def __post_init__(self):
        ks = np.arange(1, self.k_max + 1)
        klam = ks * self.lam
        object.__setattr__(self, "cost", np.diff(np.concatenate([[0.0], klam])))


def penalty_table(spec: PenaltySpec, m: int, k_max: Optional[int] = None) -> PenaltyTable:
    if k_max is None:
        k_max = m
    if not 1 <= k_max <= m:
        raise ValueError(f"k_max must lie in [1, {m}]")
    if spec.family in ("bh", "msfdr", "fixed-alpha"):
        alpha = np.array([step_alpha(spec, i, m) for i in range(1, k_max + 1)])
    else:
        alpha = np.full(k_max, np.nan)
    lam = np.array([penalty_factor(spec, k, m) for k in range(1, k_max + 1)])
    return PenaltyTable(spec=spec, m=m, k_max=k_max, alpha=alpha, lam=lam)
