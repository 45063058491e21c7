import numpy as np
from dataclasses import replace
from prisac import DESK_SCENARIO
from prisac.bench import run_single, derive_seed
from prisac.solver import DESK_HYPERPARAMS
from scipy.stats import spearmanr

HY = replace(DESK_HYPERPARAMS, lambda0=0.6)
rhos = [round(0.1*i, 1) for i in range(11)]
N = 8
db_scnr = np.zeros((len(rhos), N)); db_sinr = np.zeros((len(rhos), N))
for t in range(N):
    seed = derive_seed(2024, "ep_prmgd", 0, t)
    for i, rho in enumerate(rhos):
        cfg = replace(DESK_SCENARIO, rho=rho)
        row, _ = run_single(cfg, HY, seed, "ep_prmgd")
        db_sinr[i, t] = row.min_sinr_db; db_scnr[i, t] = row.min_scnr_db
    print(f"trial {t}: scnr curve {np.round(db_scnr[:, t], 1)}", flush=True)
print("scnr db means:", np.round(db_scnr.mean(axis=1), 2))
print("sinr db means:", np.round(db_sinr.mean(axis=1), 2))
print("scnr spearman:", spearmanr(rhos, db_scnr.mean(axis=1)).statistic)
print("sinr spearman:", spearmanr(rhos, db_sinr.mean(axis=1)).statistic)
