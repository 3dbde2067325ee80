# %% [markdown]
# # Coverage versus SINR threshold
#
# Closed-form coverage at the three representative UE locations, next to
# a Monte Carlo estimate and the perfect-alignment bound.

# %%
import numpy as np

from thzcov.analysis import LocationAnalysis
from thzcov.geometry import representative_location
from thzcov.params import SystemParams
from thzcov.simulate import coverage_from_samples, simulate_sinr

p = SystemParams()
betas_db = np.arange(-10, 41, 5)
betas = 10 ** (betas_db / 10)

# %%
for topo in ("square", "hexagonal"):
    for loc in (1, 2, 3):
        ue = representative_location(topo, loc)
        la = LocationAnalysis(topo, ue, p, epsilon=1e-20)
        ana = la.coverage_curve(betas)
        perfect = la.coverage_perfect_curve(betas)
        mc = [e.mean for e in coverage_from_samples(simulate_sinr(topo, ue, p, 50_000, seed=1), betas)]
        print(f"\n{topo} location {loc}")
        print(f"{'beta dB':>8} {'analytic':>9} {'MC':>7} {'perfect':>8}")
        for b, a, m, pf in zip(betas_db, ana, mc, perfect):
            print(f"{b:8d} {a:9.4f} {m:7.4f} {pf:8.4f}")
