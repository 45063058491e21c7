import numpy as np
from dataclasses import replace
from prisac import DESK_SCENARIO
from prisac.bench import run_single, derive_seed
from prisac.solver import DESK_HYPERPARAMS
from scipy.stats import spearmanr

rhos = [round(0.1*i, 1) for i in range(11)]
N = 8
db_scnr = np.zeros((len(rhos), N)); db_sinr = np.zeros((len(rhos), N))
for t in range(N):
    seed = derive_seed(2024, "ep_prmgd", 0, t)
    for i, rho in enumerate(rhos):
        cfg = replace(DESK_SCENARIO, rho=rho)
        row, _ = run_single(cfg, DESK_HYPERPARAMS, seed, "ep_prmgd")
        db_sinr[i, t] = row.min_sinr_db; db_scnr[i, t] = row.min_scnr_db
    print(f"trial {t}: scnr curve {np.round(db_scnr[:, t], 1)}", flush=True)

for name, arr in (("sinr", db_sinr), ("scnr", db_scnr)):
    db_mean = arr.mean(axis=1)
    lin_mean = (10**(arr/10)).mean(axis=1)
    print(name, "db means:", np.round(db_mean, 2))
    print(name, "spearman db:", spearmanr(rhos, db_mean).statistic,
          "lin:", spearmanr(rhos, lin_mean).statistic)
