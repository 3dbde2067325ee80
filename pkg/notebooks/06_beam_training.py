# %% [markdown]
# # Beam-training stages
#
# Concurrent training beams are limited by the SINR the cell-edge UE needs
# to decode a training beam. The stage count is the log of the total beam
# count in base N_ct.

# %%
import math

from thzcov import beamtrain as bt
from thzcov.params import SystemParams

p = SystemParams()

# %%
print("beam count        ", round(bt.beam_count(p), 2))
print("N_BT with N_ct = 6", bt.training_stages(p, N_ct=6))
print("eta (continuum)   ", round(bt.eta(p), 2))
print("eta (lattice sum) ", round(bt.eta(p, exact=True), 2))
print("I_inter continuum ", bt.inter_interference_approx(p))
print("I_inter lattice   ", bt.inter_interference_exact("square", p))
print("I_inter hexagonal ", bt.inter_interference_exact("hexagonal", p))

# %% [markdown]
# Array-size sweep with omega_T tied to the beamwidth.

# %%
grid = list(range(4, 65, 4))
for mode in ("tied", "fixed"):
    st = bt.stages_vs_array(p, grid, mode)
    print(mode, [("inf" if math.isinf(v) else v) for v in st])

# %%
for b_db in (10, 0, -10, -20):
    q = p.replace(beta_ct=10 ** (b_db / 10))
    print(f"beta_ct {b_db:>4} dB: N_ct_max = {bt.max_concurrent_beams_raw(q)}")
