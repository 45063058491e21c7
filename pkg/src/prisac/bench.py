"""Monte-Carlo benchmark harness: single runs, campaigns, sweeps, summaries.

Every (method, sweep value, trial) cell owns a seed derived from the master
seed, so campaigns produce identical results regardless of worker count or
execution order.  Rows stream to CSV as they complete; summaries aggregate
per cell after the join.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import json
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .manifold import random_point
from .objective import metric_report
from .scenario import (
    DESK_SCENARIO,
    DEFAULT_SCENARIO,
    ScenarioConfig,
    sample_scenario,
    scenario_from_mapping,
)
from .solver import (
    DEFAULT_HYPERPARAMS,
    DESK_HYPERPARAMS,
    Hyperparams,
    InnerRecord,
    SolveTrace,
    ep_prmgd,
    hyperparams_from_mapping,
    solve_fixed_polarization,
    solve_sum_objective,
)

__all__ = [
    "ExperimentPlan",
    "ResultRow",
    "METHODS",
    "SWEEP_AXES",
    "PRESETS",
    "derive_seed",
    "apply_sweep",
    "run_single",
    "run_campaign",
    "summarize",
    "sweep_tradeoff",
    "read_config_document",
    "write_rows_csv",
    "read_rows_csv",
    "write_summary_csv",
    "write_trace_jsonl",
    "RESULT_FIELDS",
]

METHODS = {
    "ep_prmgd": 0,
    "fp_fb": 1,
    "pr_wofb": 2,
}

_SOLVERS = {
    "ep_prmgd": ep_prmgd,
    "fp_fb": solve_fixed_polarization,
    "pr_wofb": solve_sum_objective,
}

SWEEP_AXES = ("antennas", "snr_db", "users", "targets", "rho", "none")

# Named base configurations: the reduced desk scale for quick studies and the
# reference full-scale setup.
PRESETS = {
    "desk": (DESK_SCENARIO, DESK_HYPERPARAMS, 50),
    "paper": (DEFAULT_SCENARIO, DEFAULT_HYPERPARAMS, 500),
}


@dataclass(frozen=True)
class ExperimentPlan:
    """A campaign: base config, one sweep axis, trial count, method set."""

    scenario: ScenarioConfig
    hyper: Hyperparams
    sweep_axis: str = "none"
    sweep_values: tuple = ()
    n_trials: int = 1
    methods: tuple = ("ep_prmgd",)
    output_dir: str = "out"

    def __post_init__(self) -> None:
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"sweep_axis must be one of {SWEEP_AXES}, got '{self.sweep_axis}'")
        if self.sweep_axis != "none" and not self.sweep_values:
            raise ValueError("sweep_values must be nonempty when a sweep axis is set")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method '{m}'; choose from {sorted(METHODS)}")

    def cells(self):
        values = self.sweep_values if self.sweep_axis != "none" else (None,)
        for method in self.methods:
            for vi, value in enumerate(values):
                for trial in range(self.n_trials):
                    yield method, vi, value, trial


@dataclass(frozen=True)
class ResultRow:
    """One solved trial, flattened for CSV."""

    method: str
    sweep_value: float
    trial: int
    seed: int
    min_sinr_db: float
    min_scnr_db: float
    final_a: float
    final_b: float
    v_max_final: float
    outer_iters: int
    wall_time_s: float
    status: str = "ok"


RESULT_FIELDS = [f.name for f in dataclasses.fields(ResultRow)]


def derive_seed(master_seed: int, method: str, value_index: int, trial: int) -> int:
    """Cell seed: first word of SeedSequence(master, spawn_key=(method id, value, trial))."""
    key = (METHODS[method], value_index, trial)
    ss = np.random.SeedSequence(master_seed, spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _derive_all_seeds(plan: ExperimentPlan, master_seed: int) -> dict:
    seeds = {}
    for method, vi, value, trial in plan.cells():
        seeds[(method, vi, trial)] = derive_seed(master_seed, method, vi, trial)
    if len(set(seeds.values())) != len(seeds):
        raise RuntimeError("derived cell seeds collided; change the master seed")
    return seeds


def apply_sweep(cfg: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    """Base config with one swept parameter replaced."""
    if axis == "none" or value is None:
        return cfg
    if axis == "antennas":
        return replace(cfg, m_tx=int(value), m_rx=int(value))
    if axis == "snr_db":
        # Transmit SNR P / sigma^2 swept through the power budget, noise fixed.
        return replace(cfg, power_dbm=cfg.noise_user_dbm + float(value))
    if axis == "users":
        return replace(cfg, n_users=int(value))
    if axis == "targets":
        return replace(cfg, n_targets=int(value))
    if axis == "rho":
        return replace(cfg, rho=float(value))
    raise ValueError(f"sweep_axis must be one of {SWEEP_AXES}, got '{axis}'")


def _db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0.0 else -math.inf


def run_single(
    cfg: ScenarioConfig,
    hyper: Hyperparams,
    seed: int,
    method: str = "ep_prmgd",
    *,
    sweep_value: float = math.nan,
    trial: int = 0,
    on_record=None,
):
    """Sample channels, solve with one method, evaluate the final metrics.

    The one integer seed drives both the channel draw and the initial point
    through disjoint substreams, so a (seed, method, config) triple fully
    determines the outcome.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method '{method}'; choose from {sorted(METHODS)}")
    scen = replace(cfg, seed=int(seed))
    channels = sample_scenario(scen)
    start = random_point(scen, int(seed))
    t0 = time.perf_counter()
    point, trace = _SOLVERS[method](scen, channels, hyper, start, on_record=on_record)
    wall = time.perf_counter() - t0
    report = metric_report(point, channels, scen)
    last = trace.outer[-1]
    row = ResultRow(
        method=method,
        sweep_value=float(sweep_value),
        trial=int(trial),
        seed=int(seed),
        min_sinr_db=_db(report.min_sinr),
        min_scnr_db=_db(report.min_scnr),
        final_a=point.a,
        final_b=point.b,
        v_max_final=last.v_max,
        outer_iters=len(trace.outer),
        wall_time_s=wall,
        status="ok",
    )
    return row, trace


def _run_cell(args):
    base_cfg, hyper, axis, method, value, trial, seed = args
    try:
        cfg = apply_sweep(base_cfg, axis, value)
        row, _ = run_single(
            cfg, hyper, seed, method,
            sweep_value=value if value is not None else math.nan, trial=trial,
        )
        return row
    except Exception as exc:  # record the failure, let the campaign continue
        return ResultRow(
            method=method,
            sweep_value=float(value) if value is not None else math.nan,
            trial=int(trial), seed=int(seed),
            min_sinr_db=math.nan, min_scnr_db=math.nan,
            final_a=math.nan, final_b=math.nan, v_max_final=math.nan,
            outer_iters=0, wall_time_s=0.0,
            status=f"error: {type(exc).__name__}: {exc}",
        )


def run_campaign(
    plan: ExperimentPlan,
    master_seed: int = 0,
    workers: int = 1,
    csv_path=None,
) -> list:
    """Run methods x sweep values x trials; optionally stream rows to CSV.

    Results depend only on the derived cell seeds, never on scheduling, so any
    worker count yields the same row set.
    """
    seeds = _derive_all_seeds(plan, master_seed)
    tasks = [
        (plan.scenario, plan.hyper, plan.sweep_axis, method, value, trial,
         seeds[(method, vi, trial)])
        for method, vi, value, trial in plan.cells()
    ]

    sink = None
    writer = None
    if csv_path is not None:
        sink = open(csv_path, "w", newline="")
        writer = csv.writer(sink)
        writer.writerow(RESULT_FIELDS)

    rows = []
    try:
        if workers <= 1:
            for task in tasks:
                rows.append(_run_cell(task))
                if writer is not None:
                    writer.writerow(_row_values(rows[-1]))
                    sink.flush()
        else:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=workers) as pool:
                for row in pool.map(_run_cell, tasks):
                    rows.append(row)
                    if writer is not None:
                        writer.writerow(_row_values(row))
                        sink.flush()
    finally:
        if sink is not None:
            sink.close()
    return rows


def summarize(rows: list) -> list[dict]:
    """Per (method, sweep_value): mean and standard error of the dB minima."""
    if not rows:
        raise ValueError("cannot summarize an empty row set")
    groups: dict = {}
    for row in rows:
        if row.status != "ok":
            continue
        # NaN marks "no sweep"; normalize it so such rows land in one group.
        value = row.sweep_value
        if isinstance(value, float) and math.isnan(value):
            value = None
        groups.setdefault((row.method, value), []).append(row)
    out = []
    for (method, value) in sorted(groups, key=lambda kv: (kv[0], _sort_key(kv[1]))):
        cell = groups[(method, value)]
        sinrs = np.array([r.min_sinr_db for r in cell])
        scnrs = np.array([r.min_scnr_db for r in cell])
        out.append(
            {
                "method": method,
                "sweep_value": value,
                "n": len(cell),
                "mean_min_sinr_db": float(sinrs.mean()),
                "stderr_min_sinr_db": _stderr(sinrs),
                "mean_min_scnr_db": float(scnrs.mean()),
                "stderr_min_scnr_db": _stderr(scnrs),
            }
        )
    if not out:
        raise ValueError("no successful rows to summarize")
    return out


def _sort_key(value):
    return (math.inf if value is None or (isinstance(value, float) and math.isnan(value)) else value)


def _stderr(x: np.ndarray) -> float:
    if x.size <= 1:
        return 0.0
    return float(x.std(ddof=1) / math.sqrt(x.size))


def sweep_tradeoff(
    cfg: ScenarioConfig,
    hyper: Hyperparams,
    rho_values,
    n_trials: int,
    master_seed: int = 0,
    workers: int = 1,
    csv_path=None,
) -> list:
    """Trace the communication/sensing boundary over a grid of trade-off weights."""
    for r in rho_values:
        if not 0.0 <= float(r) <= 1.0:
            raise ValueError(f"rho values must lie in [0, 1], got {r}")
    plan = ExperimentPlan(
        scenario=cfg, hyper=hyper, sweep_axis="rho",
        sweep_values=tuple(float(r) for r in rho_values),
        n_trials=n_trials, methods=("ep_prmgd",),
    )
    return run_campaign(plan, master_seed=master_seed, workers=workers, csv_path=csv_path)


# ---------------------------------------------------------------------------
# File I/O: the key-value config document, result CSVs, and trace streams.

def read_config_document(path):
    """Parse a config file with [scenario], [hyperparams] and optional [campaign].

    Returns (ScenarioConfig, Hyperparams, campaign dict or None).  Unknown
    keys in any section raise ``ValueError`` naming the offending field.
    """
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    known_sections = {"scenario", "hyperparams", "campaign"}
    extra = set(parser.sections()) - known_sections
    if extra:
        raise ValueError(f"unknown config sections: {sorted(extra)}")

    scen = scenario_from_mapping(dict(parser["scenario"])) if parser.has_section("scenario") \
        else DEFAULT_SCENARIO
    hyper = hyperparams_from_mapping(dict(parser["hyperparams"])) \
        if parser.has_section("hyperparams") else DEFAULT_HYPERPARAMS

    campaign = None
    if parser.has_section("campaign"):
        campaign = _parse_campaign_section(dict(parser["campaign"]))
    return scen, hyper, campaign


_CAMPAIGN_KEYS = {"sweep_axis", "sweep_values", "n_trials", "methods", "output_dir"}


def _parse_campaign_section(mapping: dict) -> dict:
    unknown = set(mapping) - _CAMPAIGN_KEYS
    if unknown:
        raise ValueError(
            f"unknown campaign keys {sorted(unknown)}; valid keys: {sorted(_CAMPAIGN_KEYS)}"
        )
    out: dict = {}
    if "sweep_axis" in mapping:
        out["sweep_axis"] = mapping["sweep_axis"].strip()
    if "sweep_values" in mapping:
        out["sweep_values"] = tuple(
            float(v) for v in mapping["sweep_values"].replace(",", " ").split()
        )
    if "n_trials" in mapping:
        out["n_trials"] = int(mapping["n_trials"])
    if "methods" in mapping:
        out["methods"] = tuple(
            m for m in mapping["methods"].replace(",", " ").split()
        )
    if "output_dir" in mapping:
        out["output_dir"] = mapping["output_dir"].strip()
    return out


def _row_values(row: ResultRow) -> list:
    return [getattr(row, name) for name in RESULT_FIELDS]


def write_rows_csv(rows: list, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_FIELDS)
        for row in rows:
            writer.writerow(_row_values(row))


def read_rows_csv(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append(
                ResultRow(
                    method=rec["method"],
                    sweep_value=float(rec["sweep_value"]),
                    trial=int(rec["trial"]),
                    seed=int(rec["seed"]),
                    min_sinr_db=float(rec["min_sinr_db"]),
                    min_scnr_db=float(rec["min_scnr_db"]),
                    final_a=float(rec["final_a"]),
                    final_b=float(rec["final_b"]),
                    v_max_final=float(rec["v_max_final"]),
                    outer_iters=int(rec["outer_iters"]),
                    wall_time_s=float(rec["wall_time_s"]),
                    status=rec["status"],
                )
            )
    return rows


def write_summary_csv(summary: list, path) -> None:
    if not summary:
        raise ValueError("cannot write an empty summary")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary[0].keys()))
        writer.writeheader()
        for rec in summary:
            writer.writerow(rec)


def write_trace_jsonl(trace: SolveTrace, path) -> None:
    """One JSON object per recorded iteration, inner and outer interleaved by kind."""
    with open(path, "w") as fh:
        for rec in trace.inner:
            fh.write(json.dumps({"kind": "inner", **dataclasses.asdict(rec)}) + "\n")
        for rec in trace.outer:
            fh.write(json.dumps({"kind": "outer", **dataclasses.asdict(rec)}) + "\n")


def trace_record_streamer(fh):
    """Callback for live monitoring: serializes each record as it is produced."""

    def on_record(rec):
        kind = "inner" if isinstance(rec, InnerRecord) else "outer"
        fh.write(json.dumps({"kind": kind, **dataclasses.asdict(rec)}) + "\n")
        fh.flush()

    return on_record
