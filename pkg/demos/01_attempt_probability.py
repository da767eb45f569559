# %% [markdown]
# # Attempt probability and the two Markov chains
#
# A node that is ready with probability p only transmits when it senses the
# channel idle, and how often the channel is idle depends on how often the
# neighbours transmit. The attempt probability p' is therefore a fixed point.

# %%
import numpy as np

from wsnbroadcast import (
    NetworkParams, SchemeParams, channel_chain, node_chain, solve_attempt_probability,
    solve_attempt_probability_damped, throughput,
)

network = NetworkParams.from_mean_neighbors(10)  # N = 10 neighbours on average
for p in (0.001, 0.01, 0.1, 1.0):
    s = SchemeParams(p_ready=p, delta_slots=100)
    a = solve_attempt_probability(network, s)
    b = solve_attempt_probability_damped(network, s)
    print(f"p={p:<6} p'={a:.6g}  (damped iteration: {b:.6g})")

# %% [markdown]
# With p' in hand the channel chain gives the idle/busy split, and the node
# chain splits time between waiting, successful and collided frames.

# %%
s = SchemeParams(p_ready=0.05, delta_slots=100)
x = solve_attempt_probability(network, s)
ch = channel_chain(x, network, s.delta_slots)
print("channel: P_ii=%.4f  idle=%.4f  busy=%.4f" % (ch.p_ii, ch.phi_idle, ch.phi_busy))

res = throughput(network, s, n_ph=0.0)
nd = res.node
print("node: wait=%.4f  succeed=%.4f  collide=%.4f" % (nd.phi_wait, nd.phi_succ, nd.phi_coll))
print("throughput=%.4f (alternative form %.4f)" % (res.th, res.th_alt))

# %%
ps = np.logspace(-4, 0, 9)
print([round(throughput(network, SchemeParams(p_ready=float(p)), 0.0).th, 4) for p in ps])
