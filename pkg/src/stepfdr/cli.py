"""Command-line surface.

Subcommands: ``select`` (dataset selection report), ``penalty-table``
(figure-ready penalty dumps), ``simulate`` (Monte Carlo campaign),
``summarize`` (minimax tables over campaign output), ``selftest``
(brute-force oracle checks on small random instances).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dataio import ExpansionSpec, expand, ingest
from .penalties import PenaltySpec, penalty_table
from .regress import forward_path
from .selector import RULES, default_rule, msfdr_iterative, select
from .simlab import ConfigOutcome, MethodOutcome, SimConfig, best_q_table, minimax_summary, run_config

_FLOAT_FMT = "%.17g"


def _fmt(v: float) -> str:
    return _FLOAT_FMT % v


def parse_method(token: str) -> Tuple[PenaltySpec, Optional[str]]:
    """Parse "family[:level][@rule]" into a penalty spec and rule override."""
    token = token.strip()
    rule = None
    if "@" in token:
        token, rule = token.split("@", 1)
        if rule not in RULES:
            raise ValueError(f"unknown stopping rule {rule!r}")
    fam, _, level = token.partition(":")
    fam = fam.lower()
    kwargs = {}
    if level:
        if fam == "fixed-alpha":
            kwargs["p"] = float(level)
        elif fam == "bm":
            kwargs["c_bm"] = float(level)
        else:
            kwargs["q"] = float(level)
    return PenaltySpec(fam, **kwargs), rule


# ---------------------------------------------------------------------------
# select
# ---------------------------------------------------------------------------


def _cmd_select(args) -> int:
    ds = ingest(args.data, response=args.response)
    if args.expand:
        ds = expand(
            ds,
            ExpansionSpec(
                square_excluded=tuple(args.square_exclude or ()),
                include_interactions=not args.no_interactions,
            ),
        )
    spec, rule = parse_method(args.method_token())
    sigma2 = None
    if args.sigma2 and args.sigma2 != "full-model":
        if not args.sigma2.startswith("known:"):
            raise ValueError("--sigma2 expects 'full-model' or 'known:<value>'")
        sigma2 = float(args.sigma2.split(":", 1)[1])
    if args.rule:
        rule = args.rule

    path = forward_path(ds, sigma2=sigma2)
    if spec.family == "msfdr" and args.iterative:
        res = msfdr_iterative(ds, spec.q, sigma2=sigma2, path=path)
    else:
        res = select(ds, spec, rule=rule, sigma2=sigma2, path=path)

    lines = []
    lines.append(f"# method\t{spec.label()}")
    lines.append(f"# rule\t{res.rule}")
    lines.append(f"# sigma2\t{_fmt(res.sigma2)}\t{res.sigma2_source}")
    lines.append(f"# n\t{ds.n}\tm\t{ds.m}")
    lines.append(f"# k_selected\t{res.k_selected}")
    lines.append(f"# k_with_intercept\t{res.k_with_intercept}")
    if res.iterations is not None:
        lines.append(f"# iterations\t{res.iterations}")
    lines.append("name\tcoefficient")
    for j, coef in zip(res.selected, res.coefficients):
        lines.append(f"{ds.names[j]}\t{_fmt(coef)}")
    lines.append("k\tpenalized_rss")
    for k, t in enumerate(res.trace):
        lines.append(f"{k}\t{_fmt(t)}")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if args.out:
        Path(args.out).write_text(report)
    return 0


# ---------------------------------------------------------------------------
# penalty-table
# ---------------------------------------------------------------------------


def _cmd_penalty_table(args) -> int:
    spec, _ = parse_method(args.method_token())
    table = penalty_table(spec, args.m, args.kmax)
    out = ["family\tm\tk\talpha_k\tlambda_k\tstep_cost_k"]
    for i in range(table.k_max):
        a = "" if np.isnan(table.alpha[i]) else _fmt(table.alpha[i])
        out.append(
            f"{spec.label()}\t{table.m}\t{i + 1}\t{a}\t{_fmt(table.lam[i])}\t{_fmt(table.cost[i])}"
        )
    text = "\n".join(out) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def read_campaign_file(path) -> dict:
    """Parse the `key = value` campaign format (lists comma-separated).

    Recognized keys: seed, replications, m, rho, beta_type, p_index,
    c_scale, effect_target, methods.  Lines starting with '#' are
    comments.
    """
    cfg: dict = {}
    for ln in Path(path).read_text().splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise ValueError(f"{path}: malformed line {ln!r} (expected key = value)")
        key, _, val = ln.partition("=")
        cfg[key.strip().lower()] = val.strip()
    return cfg


def campaign_grid(cfg: dict) -> Tuple[List[SimConfig], List[Tuple[PenaltySpec, Optional[str]]]]:
    def ints(key, default):
        return [int(tok) for tok in cfg.get(key, default).split(",")]

    def floats(key, default):
        return [float(tok) for tok in cfg.get(key, default).split(",")]

    seed = int(cfg.get("seed", "0"))
    reps = int(cfg.get("replications", "1000"))
    c_scale = cfg.get("c_scale", "auto")
    if c_scale != "auto":
        c_scale = float(c_scale)
    effect_target = float(cfg.get("effect_target", "3"))
    methods = [parse_method(tok) for tok in cfg.get("methods", "msfdr:0.05").split(",")]
    grid = [
        SimConfig(
            m=m,
            rho=rho,
            beta_type=bt,
            p_index=pi,
            replications=reps,
            seed=seed,
            c_scale=c_scale,
            effect_target=effect_target,
        )
        for m in ints("m", "20")
        for rho in floats("rho", "-0.5,0,0.5")
        for bt in ints("beta_type", "1,2,3")
        for pi in ints("p_index", "1,2,3,4,5,6")
    ]
    return grid, methods


def write_outcome(outcome: ConfigOutcome, out_dir: Path) -> Path:
    c = outcome.config
    path = out_dir / f"{c.key()}.tsv"
    lines = [
        f"# m\t{c.m}",
        f"# rho\t{_fmt(c.rho)}",
        f"# beta_type\t{c.beta_type}",
        f"# p_index\t{c.p_index}",
        f"# replications\t{c.replications}",
        f"# seed\t{c.seed}",
        f"# c_scale\t{c.c_scale}",
        f"# oracle_mspe\t{_fmt(outcome.oracle_mspe)}",
        f"# dominance_violations\t{outcome.dominance_violations}",
        "method\tmean_mspe\toracle_mspe\trelative_loss\tse_relative_loss",
    ]
    for mo in outcome.methods:
        lines.append(
            f"{mo.label}\t{_fmt(mo.mean_mspe)}\t{_fmt(outcome.oracle_mspe)}"
            f"\t{_fmt(mo.relative_loss)}\t{_fmt(mo.se_relative_loss)}"
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def read_outcome(path: Path) -> ConfigOutcome:
    meta = {}
    methods = []
    oracle = None
    for ln in path.read_text().splitlines():
        if ln.startswith("#"):
            parts = ln[1:].strip().split("\t")
            meta[parts[0]] = parts[1] if len(parts) > 1 else None
            continue
        if ln.startswith("method\t") or not ln.strip():
            continue
        label, mean_mspe, oracle_mspe, rel, se = ln.split("\t")
        oracle = float(oracle_mspe)
        methods.append(MethodOutcome(label, float(mean_mspe), float(rel), float(se)))
    c_scale = meta.get("c_scale", "auto")
    config = SimConfig(
        m=int(meta["m"]),
        rho=float(meta["rho"]),
        beta_type=int(meta["beta_type"]),
        p_index=int(meta["p_index"]),
        replications=int(meta["replications"]),
        seed=int(meta["seed"]),
        c_scale="auto" if c_scale == "auto" else float(c_scale),
    )
    return ConfigOutcome(config=config, oracle_mspe=oracle, methods=tuple(methods),
                         dominance_violations=int(meta.get("dominance_violations", 0) or 0))


def _run_one(payload):
    config, methods = payload
    return run_config(config, methods)


def _cmd_simulate(args) -> int:
    cfg = read_campaign_file(args.config)
    grid, methods = campaign_grid(cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pending = []
    for config in grid:
        target = out_dir / f"{config.key()}.tsv"
        if target.exists() and not args.force:
            continue
        pending.append(config)
    workers = args.workers or int(os.environ.get("STEPFDR_WORKERS", "0")) or (os.cpu_count() or 1)
    if workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for outcome in pool.map(_run_one, [(c, methods) for c in pending]):
                write_outcome(outcome, out_dir)
                print(f"done {outcome.config.key()}")
    else:
        for config in pending:
            outcome = run_config(config, methods)
            write_outcome(outcome, out_dir)
            print(f"done {config.key()}")
    print(f"{len(pending)} configuration(s) run, {len(grid) - len(pending)} skipped")
    return 0


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------


def _cmd_summarize(args) -> int:
    in_dir = Path(args.in_dir)
    files = sorted(in_dir.glob("*.tsv"))
    if not files:
        raise ValueError(f"no campaign output files found in {in_dir}")
    outcomes = [read_outcome(f) for f in files]
    worst_k = args.worst_k if args.worst_k == "ALL" else int(args.worst_k)

    ms = sorted({o.config.m for o in outcomes})
    labels = [mo.label for mo in outcomes[0].methods]
    print("# worst-%s relative loss by m" % args.worst_k)
    print("method\t" + "\t".join(f"m={m}" for m in ms))
    for label in labels:
        row = [label]
        for m in ms:
            sub = [o for o in outcomes if o.config.m == m]
            row.append("%.4g" % minimax_summary(sub, worst_k)[label])
        print("\t".join(row))

    print("# worst-%s relative loss by (m, rho)" % args.worst_k)
    pairs = sorted({(o.config.m, o.config.rho) for o in outcomes})
    print("method\t" + "\t".join(f"m={m},rho={r:g}" for m, r in pairs))
    for label in labels:
        row = [label]
        for m, r in pairs:
            sub = [o for o in outcomes if o.config.m == m and o.config.rho == r]
            row.append("%.4g" % minimax_summary(sub, worst_k)[label])
        print("\t".join(row))

    print("# overall worst-%s relative loss" % args.worst_k)
    overall = minimax_summary(outcomes, worst_k)
    for label in labels:
        print(f"{label}\t{overall[label]:.4g}")

    for family in ("bh", "tsfdr", "msfdr"):
        table = best_q_table(outcomes, family)
        if len(table) > 1:
            best = min(table, key=table.get)
            print(f"# best q for {family}: {best:g} " +
                  " ".join(f"q={q:g}:{v:.4g}" for q, v in table.items()))
    return 0


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def _cmd_selftest(args) -> int:
    from . import selfcheck

    failures = selfcheck.run(instances=args.instances, verbose=True)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stepfdr",
        description="Penalized forward selection with FDR-based and competitor penalties.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", help="run one selection method on a dataset")
    sel.add_argument("--data", required=True)
    sel.add_argument("--response", required=True)
    sel.add_argument("--method", required=True, help="family[:level][@rule], e.g. msfdr:0.05")
    sel.add_argument("--q", type=float, default=None, help="FDR level shorthand")
    sel.add_argument("--rule", choices=RULES, default=None)
    sel.add_argument("--sigma2", default="full-model", help="'full-model' or 'known:<value>'")
    sel.add_argument("--expand", action="store_true", help="add quadratic terms first")
    sel.add_argument("--square-exclude", nargs="*", default=None)
    sel.add_argument("--no-interactions", action="store_true")
    sel.add_argument("--iterative", action="store_true",
                     help="use the iterative p-to-enter computation (msfdr only)")
    sel.add_argument("--out", default=None)
    sel.set_defaults(func=_cmd_select)

    pt = sub.add_parser("penalty-table", help="dump penalty factors and step costs")
    pt.add_argument("--method", required=True)
    pt.add_argument("--m", type=int, required=True)
    pt.add_argument("--q", type=float, default=None)
    pt.add_argument("--kmax", type=int, default=None)
    pt.add_argument("--out", default=None)
    pt.set_defaults(func=_cmd_penalty_table)

    sim = sub.add_parser("simulate", help="run a Monte Carlo campaign")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--force", action="store_true", help="re-run completed configurations")
    sim.set_defaults(func=_cmd_simulate)

    summ = sub.add_parser("summarize", help="minimax summaries over campaign output")
    summ.add_argument("--in", dest="in_dir", required=True)
    summ.add_argument("--worst-k", default="1", help="1, 2, 3, ... or ALL")
    summ.set_defaults(func=_cmd_summarize)

    st = sub.add_parser("selftest", help="brute-force oracle checks on small instances")
    st.add_argument("--instances", type=int, default=500)
    st.set_defaults(func=_cmd_selftest)
    return ap


def _method_token(args) -> str:
    token = args.method
    if getattr(args, "q", None) is not None and ":" not in token:
        token = f"{token}:{args.q}"
    return token


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    args.method_token = lambda: _method_token(args)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
