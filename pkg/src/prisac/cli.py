"""Command-line benchmark harness.

Subcommands: ``run`` (single trial), ``campaign`` (plan file to CSVs),
``sweep-tradeoff``, ``gradcheck`` and ``summarize``.  Exit codes: 0 success,
1 validation error, 2 numerical failure, 3 gradient-check failure.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from dataclasses import replace

from . import bench
from .gradients import (
    block_relative_errors,
    euclidean_gradient,
    finite_difference_gradient,
)
from .manifold import random_point
from .scenario import ScenarioConfig, sample_scenario
from .solver import DEFAULT_HYPERPARAMS

GRADCHECK_SCENARIO = ScenarioConfig(
    m_tx=4, m_rx=4, n_users=2, n_radar_streams=2, n_targets=2, n_clutter=1
)
GRADCHECK_TOL = 1e-5


def _load_base(args):
    """Resolve (scenario, hyper, campaign section, default trials) from flags."""
    scen, hyper, campaign = None, None, None
    preset = getattr(args, "preset", None) or "desk"
    scen, hyper, trials = bench.PRESETS[preset]
    if getattr(args, "config", None):
        scen, hyper, campaign = bench.read_config_document(args.config)
    if getattr(args, "trials", None):
        trials = args.trials
    return scen, hyper, campaign, trials


def _ensure_out(args) -> str:
    out = getattr(args, "out", None) or "out"
    os.makedirs(out, exist_ok=True)
    return out


def cmd_run(args) -> int:
    scen, hyper, _, _ = _load_base(args)
    out = _ensure_out(args)
    trace_path = os.path.join(out, f"trace_{args.method}_{args.seed}.jsonl")
    with open(trace_path, "w") as fh:
        row, _ = bench.run_single(
            scen, hyper, args.seed, args.method,
            on_record=bench.trace_record_streamer(fh),
        )
    for name in bench.RESULT_FIELDS:
        print(f"{name}: {getattr(row, name)}")
    print(f"trace: {trace_path}")
    core = (row.min_sinr_db, row.min_scnr_db, row.final_a, row.final_b, row.v_max_final)
    if row.status != "ok" or not all(math.isfinite(v) for v in core):
        print("run produced non-finite results", file=sys.stderr)
        return 2
    return 0


def cmd_campaign(args) -> int:
    scen, hyper, campaign, trials = _load_base(args)
    out = _ensure_out(args)
    campaign = campaign or {}
    if args.trials:
        campaign["n_trials"] = args.trials
    campaign.setdefault("n_trials", trials)
    plan = bench.ExperimentPlan(
        scenario=scen,
        hyper=hyper,
        sweep_axis=campaign.get("sweep_axis", "none"),
        sweep_values=tuple(campaign.get("sweep_values", ())),
        n_trials=campaign["n_trials"],
        methods=tuple(campaign.get("methods", ("ep_prmgd",))),
        output_dir=out,
    )
    rows_path = os.path.join(out, "rows.csv")
    rows = bench.run_campaign(plan, master_seed=args.seed, workers=args.workers,
                              csv_path=rows_path)
    summary = bench.summarize(rows)
    summary_path = os.path.join(out, "summary.csv")
    bench.write_summary_csv(summary, summary_path)
    n_err = sum(1 for r in rows if r.status != "ok")
    print(f"{len(rows)} rows ({n_err} failed) -> {rows_path}")
    print(f"summary -> {summary_path}")
    return 0


def cmd_sweep_tradeoff(args) -> int:
    scen, hyper, _, trials = _load_base(args)
    out = _ensure_out(args)
    rho_grid = [round(0.1 * i, 1) for i in range(11)]
    rows_path = os.path.join(out, "tradeoff_rows.csv")
    rows = bench.sweep_tradeoff(
        scen, hyper, rho_grid, trials, master_seed=args.seed,
        workers=args.workers, csv_path=rows_path,
    )
    summary = bench.summarize(rows)
    summary_path = os.path.join(out, "tradeoff_summary.csv")
    bench.write_summary_csv(summary, summary_path)
    for rec in summary:
        print(
            f"rho={rec['sweep_value']:.1f}  "
            f"min-SINR {rec['mean_min_sinr_db']:+7.2f} dB  "
            f"min-SCNR {rec['mean_min_scnr_db']:+7.2f} dB  (n={rec['n']})"
        )
    print(f"rows -> {rows_path}\nsummary -> {summary_path}")
    return 0


def cmd_gradcheck(args) -> int:
    cfg = GRADCHECK_SCENARIO
    if args.config:
        cfg, _, _ = bench.read_config_document(args.config)
    lam = DEFAULT_HYPERPARAMS.lambda0
    n_instances = args.trials or 5
    worst: dict = {}
    print(f"gradient check: {n_instances} instances, lam={lam}, tol={GRADCHECK_TOL:g}")
    print(f"{'seed':>6} {'mu':>8} " + " ".join(f"{n:>10}" for n in
          ("w", "p_tx", "p_rx", "p_users", "f", "a", "b")))
    for i in range(n_instances):
        seed = args.seed + i
        scen = replace(cfg, seed=seed)
        channels = sample_scenario(scen)
        point = random_point(scen, seed)
        for mu in (1.5, 1e-2):
            analytic = euclidean_gradient(point, channels, scen, lam, mu)
            fd = finite_difference_gradient(point, channels, scen, lam, mu)
            errs = block_relative_errors(analytic, fd)
            print(f"{seed:>6} {mu:>8g} " + " ".join(f"{errs[n]:>10.2e}" for n in
                  ("w", "p_tx", "p_rx", "p_users", "f", "a", "b")))
            for name, err in errs.items():
                worst[name] = max(worst.get(name, 0.0), err)
    bad = {n: e for n, e in worst.items() if e > GRADCHECK_TOL}
    if bad:
        print(f"FAIL: blocks above tolerance: {bad}", file=sys.stderr)
        return 3
    print("OK: all blocks within tolerance")
    return 0


def cmd_summarize(args) -> int:
    rows = bench.read_rows_csv(args.rows_csv)
    summary = bench.summarize(rows)
    out = _ensure_out(args)
    path = os.path.join(out, "summary.csv")
    bench.write_summary_csv(summary, path)
    for rec in summary:
        print(
            f"{rec['method']:>10} value={rec['sweep_value']}  n={rec['n']}  "
            f"min-SINR {rec['mean_min_sinr_db']:+.3f} dB "
            f"(+/- {rec['stderr_min_sinr_db']:.3f})  "
            f"min-SCNR {rec['mean_min_scnr_db']:+.3f} dB "
            f"(+/- {rec['stderr_min_scnr_db']:.3f})"
        )
    print(f"summary -> {path}")
    return 0


def _add_common(sub, trials_default=None):
    sub.add_argument("--config", help="key-value config document")
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--trials", type=int, default=trials_default, help="trial count")
    sub.add_argument("--workers", type=int, default=1, help="worker processes")
    sub.add_argument("--out", help="output directory (default: out)")
    sub.add_argument("--preset", choices=sorted(bench.PRESETS), default="desk")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prisac",
        description="Fairness-aware PR-ISAC beamforming benchmarks",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("run", help="single trial: print the result row, write the trace")
    _add_common(p)
    p.add_argument("--method", choices=sorted(bench.METHODS), default="ep_prmgd")
    p.set_defaults(func=cmd_run)

    p = subs.add_parser("campaign", help="run an experiment plan to CSVs")
    _add_common(p)
    p.set_defaults(func=cmd_campaign)

    p = subs.add_parser("sweep-tradeoff", help="trade-off grid rho = 0.0 .. 1.0 step 0.1")
    _add_common(p, trials_default=None)
    p.set_defaults(func=cmd_sweep_tradeoff)

    p = subs.add_parser("gradcheck", help="analytic vs finite-difference gradient table")
    _add_common(p, trials_default=5)
    p.set_defaults(func=cmd_gradcheck)

    p = subs.add_parser("summarize", help="aggregate a rows CSV into per-cell stats")
    p.add_argument("rows_csv", help="rows CSV produced by run/campaign")
    _add_common(p)
    p.set_defaults(func=cmd_summarize)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
