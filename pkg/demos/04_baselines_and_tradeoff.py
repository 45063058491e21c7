"""Architecture comparison and the communication/sensing trade-off.

Small seeded Monte-Carlo runs comparing the joint fairness design against the
two in-framework baselines (frozen polarization, sum utility without
fairness), then a coarse sweep of the trade-off weight tracing the boundary
between the two services.  Counts are kept small so the script finishes in a
few minutes; raise TRIALS for smoother numbers.
"""

from dataclasses import replace

import numpy as np

from prisac import DESK_SCENARIO
from prisac.bench import ExperimentPlan, run_campaign, summarize
from prisac.solver import DESK_HYPERPARAMS

TRIALS = 4

# -- architecture comparison at a communication-leaning trade-off ------------
base = replace(DESK_SCENARIO, rho=0.1)
plan = ExperimentPlan(
    scenario=base, hyper=DESK_HYPERPARAMS, sweep_axis="none",
    n_trials=TRIALS, methods=("ep_prmgd", "fp_fb", "pr_wofb"),
)
print(f"comparing methods over {TRIALS} trials (rho = {base.rho}) ...")
rows = run_campaign(plan, master_seed=7)
for rec in summarize(rows):
    print(f"  {rec['method']:>9}: min-SINR {rec['mean_min_sinr_db']:+7.2f} dB "
          f"(+/- {rec['stderr_min_sinr_db']:.2f}), "
          f"min-SCNR {rec['mean_min_scnr_db']:+7.2f} dB")
print("  (joint polarization design > frozen polarization > no-fairness sum)")

# -- trade-off boundary -------------------------------------------------------
print(f"\ntrade-off sweep, rho in {{0, 0.25, 0.5, 0.75, 1.0}}, {TRIALS} trials each ...")
plan = ExperimentPlan(
    scenario=DESK_SCENARIO, hyper=DESK_HYPERPARAMS, sweep_axis="rho",
    sweep_values=(0.0, 0.25, 0.5, 0.75, 1.0), n_trials=TRIALS,
    methods=("ep_prmgd",),
)
rows = run_campaign(plan, master_seed=11)
cells = {}
for r in rows:
    cells.setdefault(r.sweep_value, []).append(r)
print(f"{'rho':>5} {'mean min-SINR (lin)':>20} {'mean min-SCNR (lin)':>20}")
for v in sorted(cells):
    sinr = np.mean([10 ** (r.min_sinr_db / 10) for r in cells[v]])
    scnr = np.mean([10 ** (r.min_scnr_db / 10) for r in cells[v]])
    print(f"{v:>5.2f} {sinr:>20.4f} {scnr:>20.4f}")
print("raising rho trades the communication floor for the sensing floor")
