"""Brute-force cross-checks on small random instances.

Used by the ``selftest`` CLI command and by the acceptance suite: the
incremental forward path is compared against exhaustive refits, and the
path MSPE bookkeeping against explicit projection matrices.
"""

from __future__ import annotations

import numpy as np

from .quantiles import RandomSource
from .regress import Dataset, forward_sweep, least_squares
from .simlab import path_prefix_mspe, random_oracle, theoretical_mspe

__all__ = ["brute_force_forward", "explicit_projection_mspe", "run"]


def brute_force_forward(X: np.ndarray, y: np.ndarray):
    """Forward selection by refitting every candidate subset from scratch."""
    n, m = X.shape
    names = tuple(f"x{j}" for j in range(m))
    ds = Dataset(y=y, X=X, names=names, standardized=True)
    chosen: list = []
    rss_prev = float(y @ y)
    rss_seq = [rss_prev]
    for _ in range(min(m, n - 1)):
        best_j, best_rss = None, None
        for j in range(m):
            if j in chosen:
                continue
            try:
                _, rss = least_squares(ds, chosen + [j])
            except np.linalg.LinAlgError:
                continue
            if best_rss is None or rss < best_rss - 1e-12 * rss_seq[0]:
                best_j, best_rss = j, rss
        if best_j is None or rss_prev - best_rss <= 1e-12 * rss_seq[0]:
            break
        chosen.append(best_j)
        rss_prev = best_rss
        rss_seq.append(best_rss)
    return chosen, np.array(rss_seq)


def explicit_projection_mspe(X, beta, subset, sigma2, intercept=True) -> float:
    """Theoretical MSPE via an explicitly formed projection matrix."""
    n = X.shape[0]
    cols = []
    if intercept:
        cols.append(np.ones(n))
    for j in subset:
        cols.append(X[:, j])
    rest = sorted(set(range(X.shape[1])) - set(subset))
    b2 = X[:, rest] @ np.asarray(beta)[rest] if rest else np.zeros(n)
    k = len(subset) + (1 if intercept else 0)
    if not cols:
        return sigma2 * k + float(b2 @ b2)
    A = np.column_stack(cols)
    P = A @ np.linalg.inv(A.T @ A) @ A.T
    r = (np.eye(n) - P) @ b2
    return sigma2 * k + float(r @ r)


def run(instances: int = 500, seed: int = 20090194, verbose: bool = False) -> list:
    """Run the brute-force comparison suite; returns a list of failures."""
    failures = []

    def check(label, ok):
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {label}")
        if not ok:
            failures.append(label)

    rng = RandomSource(seed).generator()
    path_ok = mspe_ok = oracle_ok = True
    for _ in range(instances):
        m = int(rng.integers(2, 9))
        n = int(rng.integers(m + 3, 3 * m + 6))
        X = rng.standard_normal((n, m))
        beta = np.where(rng.random(m) < 0.5, rng.standard_normal(m), 0.0)
        y = X @ beta + rng.standard_normal(n)
        Xs = X - X.mean(axis=0)
        Xs = Xs / np.sqrt((Xs * Xs).sum(axis=0))
        ys = y - y.mean()

        order, rss, _ = forward_sweep(Xs, ys, k_max=min(m, n - 2))
        b_order, b_rss = brute_force_forward(Xs, ys)
        if order[: len(b_order)] != b_order:
            path_ok = False
        if not np.allclose(rss[: len(b_rss)], b_rss, rtol=1e-8):
            path_ok = False

        subset = [j for j in range(m) if rng.random() < 0.5]
        fast = theoretical_mspe(X, beta, subset, 1.0)
        slow = explicit_projection_mspe(X, beta, subset, 1.0)
        if abs(fast - slow) > 1e-9 * max(1.0, abs(slow)):
            mspe_ok = False

        signal = X @ beta
        ord2, _, bias = forward_sweep(X, y, k_max=m, center=True, true_mean=signal)
        prefix = path_prefix_mspe(bias, 1.0, intercept=True)
        k_star, v_star = random_oracle(prefix)
        exhaustive = [
            explicit_projection_mspe(X, beta, ord2[:k], 1.0) for k in range(len(ord2) + 1)
        ]
        if abs(v_star - min(exhaustive)) > 1e-9 * max(1.0, min(exhaustive)):
            oracle_ok = False
        if k_star != int(np.argmin(exhaustive)):
            oracle_ok = False

    check(f"forward path matches exhaustive refits ({instances} instances)", path_ok)
    check("theoretical MSPE matches explicit projection", mspe_ok)
    check("random oracle matches exhaustive prefix minimization", oracle_ok)
    return failures
