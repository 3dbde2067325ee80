# %% [markdown]
# # Association probabilities
#
# The UE attaches to the nearest AP within R_A whose link is free of bodies
# and walls. Shared walls make the "all closer APs blocked" events
# dependent, so the correlated result differs from the independent one.

# %%
import numpy as np

from thzcov.analysis import association_table
from thzcov.geometry import representative_location
from thzcov.params import SystemParams
from thzcov.simulate import estimate_association

p = SystemParams()

# %%
print(f"{'grid':>10} {'loc':>4} {'lambda_W':>8} {'correlated':>11} {'independent':>11}")
for topo in ("square", "hexagonal"):
    for loc in (2, 3):
        ue = representative_location(topo, loc)
        for lam in np.linspace(0, 0.1, 6):
            q = p.replace(lambda_W=lam)
            c = association_table(topo, ue, q).total
            i = association_table(topo, ue, q, independent=True).total
            print(f"{topo:>10} {loc:>4} {lam:8.2f} {c:11.4f} {i:11.4f}")

# %% [markdown]
# Monte Carlo check at Location 2 of the square grid.

# %%
ue = representative_location("square", 2)
est = estimate_association("square", ue, p, 200_000, seed=3)
for idx, pa in association_table("square", ue, p).entries:
    e = est[idx]
    print(idx, f"{pa:.5f}", f"{e.mean:.5f} +- {e.half_width_95:.5f}")
