import numpy as np, math, json
from prisac import *
from prisac.bench import run_campaign, ExperimentPlan, summarize
from prisac.solver import DESK_HYPERPARAMS
from prisac.scenario import DESK_SCENARIO

plan = ExperimentPlan(
    scenario=DESK_SCENARIO, hyper=DESK_HYPERPARAMS, sweep_axis="rho",
    sweep_values=tuple(round(0.1*i, 1) for i in range(11)),
    n_trials=20, methods=("ep_prmgd",),
)
rows = run_campaign(plan, master_seed=2024, workers=1)
summ = summarize(rows)
for rec in summ:
    print(f"rho={rec['sweep_value']:.1f} minSINR {rec['mean_min_sinr_db']:+7.2f} minSCNR {rec['mean_min_scnr_db']:+7.2f} (n={rec['n']})")
vals = [r["sweep_value"] for r in summ]
sinrs = [r["mean_min_sinr_db"] for r in summ]
scnrs = [r["mean_min_scnr_db"] for r in summ]
from scipy.stats import spearmanr
print("spearman scnr vs rho:", spearmanr(vals, scnrs).statistic)
print("spearman sinr vs rho:", spearmanr(vals, sinrs).statistic)
json.dump({"vals": vals, "sinrs": sinrs, "scnrs": scnrs}, open("/root/pkg/.scratch/c8.json", "w"))
