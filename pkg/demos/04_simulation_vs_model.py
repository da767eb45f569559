# %% [markdown]
# # Monte Carlo check of the analytic model
#
# The simulator places a Poisson field on a torus and plays the broadcast
# rules slot by slot. Runs for several seeds are packed into one world and
# pooled; the model value is then placed against the simulated 95% interval.

# %%
from wsnbroadcast import NetworkParams, SchemeParams, throughput
from wsnbroadcast.simulator import SimConfig, compare, pool, run_batch, seed_configs

network = NetworkParams.from_mean_neighbors(5)
for cs in (1.0, 2.0):
    for p in (0.005, 0.02):
        s = SchemeParams(p_ready=p, delta_slots=10)
        cfg = SimConfig(network, s, cs_radius=cs, slots=50_000, warmup_slots=1_000)
        pooled = pool(run_batch(seed_configs(cfg, range(10))))
        c = compare(throughput(network, s, cfg.n_ph), pooled)
        print(f"cs={cs}R p={p}: model {c.analytic_th:.4f}  "
              f"sim {c.sim_mean:.4f} +- {pooled.ci95_halfwidth:.4f}  in band: {c.within_band}")

# %% [markdown]
# With cs = 2R a node defers to everything within 2R (about 4N nodes), while
# the channel chain of the model only accounts for the N nodes within R. The
# simulated attempt rate is therefore lower and the model overestimates
# throughput; with cs = R the hidden area dominates instead.
