# %% [markdown]
# # Wall blockage correlation
#
# Walls are axis-parallel lines with Poisson positions on each axis. Two
# links that share a side of the UE on some axis can be cut by the same
# wall, so their blockage indicators are positively correlated.

# %%
import math

import numpy as np

from thzcov.blockage import wall_covariance, wall_unblocked
from thzcov.geometry import LinkGeometry
from thzcov.simulate import wall_blocked_matrix


def link(sx, sy):
    return LinkGeometry(math.hypot(sx, sy), abs(sx), abs(sy), int(np.sign(sx)), int(np.sign(sy)))


lam = 0.02
pairs = [((10, 5), (20, -5)), ((10, 5), (-20, -5)), ((15, 15), (30, 10)), ((-8, 3), (-12, 9))]
trials = np.arange(400_000)

# %%
print(f"{'link a':>10} {'link b':>10} {'cov exact':>10} {'cov MC':>10}")
for a, b in pairs:
    unb = ~wall_blocked_matrix(7, trials, [a[0], b[0]], [a[1], b[1]], lam)
    mc = np.mean(unb[:, 0] & unb[:, 1]) - unb[:, 0].mean() * unb[:, 1].mean()
    print(f"{str(a):>10} {str(b):>10} {wall_covariance(link(*a), link(*b), lam):10.5f} {mc:10.5f}")

# %%
print("marginal exp(-lam (dx + dy)) at (10, 5):", wall_unblocked(10, 5, lam))
