# %% [markdown]
# # Regenerating the scheme-comparison figures
#
# Each figure is a table of rows (scheme, gate, N, p, p', hidden fraction,
# N_ph, V, P1, P2, P3, Th). Write them as CSV/JSON or plot them as SVG.

# %%
from pathlib import Path

from wsnbroadcast import experiments as ex

spec = ex.SweepSpec()  # default grids: 40 p values, N in {2,5,10,20}, delta = 100
out = Path("figures")
out.mkdir(exist_ok=True)
for fig in ex.FIGURES:
    rows = ex.run_figure(fig, spec)
    ex.emit(rows, "csv", out / f"{fig}.csv")
    print(fig, len(rows), "rows")

# %% [markdown]
# A smaller sweep keeps the plot readable: one curve per family.

# %%
small = ex.SweepSpec(n_grid=[5.0], gates=[1.0, 0.25])
ex.emit(ex.run_figure("fig8", small), "svg", out / "fig8_n5.svg", title="N = 5")

# %% peak throughput per family
rows = ex.run_figure("fig8", small)
best = {}
for r in rows:
    key = (r["scheme"], r["gate"], r["hidden_fraction"])
    best[key] = max(best.get(key, 0.0), r["throughput"])
for key, th in sorted(best.items()):
    print(key, round(th, 4))
