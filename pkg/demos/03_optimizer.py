# %% [markdown]
# Minimising perimeter over flat clusters
#
# The optimizer searches all (B, lam) in R^2 for three cells with measures
# (0.5, 0.3, 0.2), from a simplicial start and from random starts.  Whatever
# wins should sit on the model profile and have sqrt2 B (nearly) isometric.

# %%
import logging

import numpy as np

from multibubble import OptProblem, build_complex, compare_to_model, homology_ranks, minimize_perimeter

logging.basicConfig(level=logging.INFO, format="%(message)s")
np.set_printoptions(precision=5, suppress=True)

# %%
res = minimize_perimeter(OptProblem(3, 2, np.array([0.5, 0.3, 0.2])))
print(f"perimeter {res.perimeter:.7f}  I_m(v) {res.profile_value:.7f}  gap {res.profile_gap:+.1e}")
print("isometry defect |2 B^T B - Id|:", res.isometry_defect)
for start, per, err, defect in res.starts:
    print(f"  start {start}: perimeter {per:.6f}, measure error {err:.1e}, defect {defect:.1e}")

# %% Interface-by-interface comparison with the model cluster at the same measures.
cmp = compare_to_model(res)
print("areas:\n", res.areas)
print("model areas:\n", cmp.model_areas)
print("largest deviation:", cmp.max_deviation)

# %% The incidence complex of the optimum: three cells, three interfaces, one triple junction.
S = build_complex(res.cluster)
print(S.to_json(), "Betti numbers", homology_ranks(S))

# %% Objective trace of the winning start.
for h in res.history:
    if h.start == res.start and h.iteration % 5 == 1:
        print(f"rho={h.penalty:>7.0f} it={h.iteration:3d} perimeter={h.perimeter:.6f} measure err={h.measure_error:.1e}")
