"""Spectral and tail statistics of random coupling matrices.

Three views of why separation is typical for large groups:

1. Histograms of the Fiedler number (algebraic connectivity of the scaled
   alignment graph) across sizes: it concentrates near the communication
   rate p as N grows, but approaches from below at a sqrt(log N / N) pace.
2. Frequencies of "bad" draws: Fiedler number more than 0.1 away from p,
   or some cross row mean further than N^(-1/4) from q.
3. The exact binomial upper tail against its analytic bound.

Run:  python3 demos/03_coupling_spectra.py
"""

import math
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from groupsep import (
    ScenarioConfig,
    binomial_tail,
    concentration_trial,
    derive_seed,
    fiedler_number,
    sample_coupling_set,
)

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)
P, Q = 0.3, 0.2

fig, axes = plt.subplots(1, 3, figsize=(13, 4))

# 1. Fiedler histograms
ax = axes[0]
for n, color in ((25, "tab:red"), (50, "tab:orange"), (200, "tab:blue")):
    values = []
    for k in range(150):
        cfg = ScenarioConfig(n1=n, n2=n, p=P, q=Q, seed=derive_seed(1, n, k))
        values.append(fiedler_number(sample_coupling_set(cfg).psi_plus_x))
    ax.hist(values, bins=25, density=True, alpha=0.55, color=color, label=f"N={n}")
ax.axvline(P, color="black", ls="--", lw=1, label="p")
ax.set_xlabel("Fiedler number")
ax.set_ylabel("density")
ax.legend()
ax.set_title("algebraic connectivity vs p")

# 2. bad-draw frequencies
ax = axes[1]
sizes = (25, 50, 100, 200)
fiedler_freq, rowmean_freq = [], []
for n in sizes:
    trial = concentration_trial(
        ScenarioConfig(n1=n, n2=n, p=P, q=Q, seed=2), alpha=0.5, n_samples=150
    )
    fiedler_freq.append(trial.freq_fiedler_far)
    rowmean_freq.append(trial.freq_rowmean_far)
    print(f"N={n:4d}: P(|F-p| > 0.1) ~ {trial.freq_fiedler_far:.3f},  "
          f"P(max row-mean dev >= N^-1/4) ~ {trial.freq_rowmean_far:.3f}")
ax.plot(sizes, fiedler_freq, "o-", label="Fiedler far from p")
ax.plot(sizes, rowmean_freq, "s-", label="row mean far from q")
ax.set_xlabel("group size N")
ax.set_ylabel("frequency (150 samples)")
ax.set_ylim(-0.05, 1.05)
ax.legend()
ax.set_title("bad-coupling frequencies")

# 3. exact tail vs analytic bound
ax = axes[2]
n = 50
zs, exacts, bounds = [], [], []
for k in range(math.ceil(Q * n), n + 1):
    result = binomial_tail(n, Q, k / n)
    zs.append(k / n)
    exacts.append(result.exact)
    bounds.append(result.bound)
ax.semilogy(zs, exacts, label="exact tail")
ax.semilogy(zs, bounds, "--", label="analytic bound")
ax.set_xlabel("threshold z")
ax.set_ylabel(f"P(mean of {n} Bernoulli({Q}) >= z)")
ax.legend()
ax.set_title("binomial tail domination")

fig.tight_layout()
fig.savefig(OUT / "coupling_spectra.png", dpi=150)
print(f"wrote {OUT / 'coupling_spectra.png'}")
