import numpy as np, json
from prisac.bench import run_campaign, ExperimentPlan
from prisac.solver import DESK_HYPERPARAMS
from prisac.scenario import DESK_SCENARIO
from scipy.stats import spearmanr

plan = ExperimentPlan(
    scenario=DESK_SCENARIO, hyper=DESK_HYPERPARAMS, sweep_axis="rho",
    sweep_values=tuple(round(0.1*i, 1) for i in range(11)),
    n_trials=20, methods=("ep_prmgd",),
)
rows = run_campaign(plan, master_seed=2024, workers=1, csv_path="/root/pkg/.scratch/c8_rows.csv")
cells = {}
for r in rows:
    cells.setdefault(r.sweep_value, []).append((r.min_sinr_db, r.min_scnr_db))
vals = sorted(cells)
lin_scnr = [np.mean([10**(s/10) for _, s in cells[v]]) for v in vals]
lin_sinr = [np.mean([10**(s/10) for s, _ in cells[v]]) for v in vals]
db_scnr = [np.mean([s for _, s in cells[v]]) for v in vals]
db_sinr = [np.mean([s for s, _ in cells[v]]) for v in vals]
for v, ls, ls2, ds, ds2 in zip(vals, lin_sinr, lin_scnr, db_sinr, db_scnr):
    print(f"rho={v:.1f} linSINR {ls:9.3f} linSCNR {ls2:9.3f}  dbSINR {ds:+7.2f} dbSCNR {ds2:+7.2f}")
print("spearman lin scnr:", spearmanr(vals, lin_scnr).statistic, " lin sinr:", spearmanr(vals, lin_sinr).statistic)
print("spearman db  scnr:", spearmanr(vals, db_scnr).statistic, " db  sinr:", spearmanr(vals, db_sinr).statistic)
