# %% [markdown]
# # Carrier-sense range and the potential hidden-node area
#
# Receivers of a broadcast may sit anywhere up to R from the sender, so in
# the worst case interferers anywhere in the 2R disk matter. Sensing out to
# cs_radius removes part of that disk; what remains is the hidden area.

# %%
import math

from wsnbroadcast import (
    NetworkParams, SchemeParams, area_breakdown, fraction_to_cs_radius, hidden_count, throughput,
)

for cs in (1.0, 1.25, math.sqrt(2.5), 1.75, 2.0):
    a = area_breakdown(1.0, cs)
    print(f"cs={cs:.3f}R  A_cs={a.a_cs:.3f}  A_ph={a.a_ph:.3f}  hidden={a.hidden_fraction:.0%}")

# %% [markdown]
# The hidden-node count feeds the vulnerable-period term. At 100% hidden area
# the throughput collapses by orders of magnitude.

# %%
network = NetworkParams.from_mean_neighbors(10)
s = SchemeParams(p_ready=0.01, delta_slots=100)
for frac in (1.0, 0.5, 0.0):
    cs = fraction_to_cs_radius(1.0, frac)
    n_ph = hidden_count(network, area_breakdown(1.0, cs).a_ph)
    r = throughput(network, s, n_ph)
    print(f"hidden={frac:.0%}  N_ph={n_ph:5.1f}  P3={r.p3:.3e}  Th={r.th:.3e}")
