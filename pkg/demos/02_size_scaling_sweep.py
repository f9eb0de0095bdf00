"""How the final separation indicator scales with group size.

For each N, many independent runs are sampled, the largest indicator values
are discarded (they come from rare non-separating coupling draws), and the
trimmed mean of lambda(T) is plotted against N on log-log axes next to a
reference line of slope -1.  The trimmed mean decays roughly like 1/N for
large N; the smallest sizes sit above the line because bad coupling draws
are far more likely there.

The full-scale protocol uses 10000 runs per size; this demo defaults to 200
to finish in about half a minute (pass an integer argument to change it).

Run:  python3 demos/02_size_scaling_sweep.py [n_test]
"""

import pathlib
import sys
import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from groupsep import ScenarioConfig, SweepConfig, run_sweep

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

n_test = int(sys.argv[1]) if len(sys.argv) > 1 else 200
cfg = SweepConfig(
    n_values=(10, 20, 40, 80, 160),
    n_test=n_test,
    n_discard=max(1, n_test // 100),  # trim the top ~1%
    t_final=20.0,
    base=ScenarioConfig(n1=2, n2=2, p=0.3, q=0.2, scenario="static", tau=1.0),
    master_seed=20,
    dim=1,
)

start = time.time()
result = run_sweep(cfg, n_jobs=2)
print(f"{n_test} runs per size, {time.time() - start:.0f}s")
print(f"fitted log-log slope: {result.fitted_slope:.3f}  (r^2 = {result.r_squared:.3f})")
for rec in result.records:
    print(f"  N={rec.n:4d}  trimmed mean lambda(T) = {rec.mean_lambda:.5f}  "
          f"median = {rec.quantiles.q50:.5f}")

ns = np.array([rec.n for rec in result.records])
means = np.array([rec.mean_lambda for rec in result.records])

fig, ax = plt.subplots(figsize=(6, 4.5))
ax.loglog(ns, means, "o", color="tab:blue", label="trimmed mean of $\\lambda(T)$")
anchor = means[len(means) // 2] * ns[len(ns) // 2]
ax.loglog(ns, anchor / ns, "--", color="gray", label="slope $-1$ reference")
ax.set_xlabel("group size $N$")
ax.set_ylabel("mean $\\lambda(T)$, $T=20$")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "size_scaling_sweep.png", dpi=150)
print(f"wrote {OUT / 'size_scaling_sweep.png'}")
