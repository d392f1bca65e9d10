"""Speckle potentials and their exact ground-state energies.

Generates a handful of disorder realizations, checks the textbook
intensity statistics (exponential law, mean v0), solves the 1-D
Schroedinger problem for each, and draws two example potentials with
their ground-state energy levels.

Run:  python demos/speckle_potentials.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from qrc import SpeckleParams, generate_speckle, ground_state_energy

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

params = SpeckleParams(n_instances=400)
print(f"grid: {params.k_points} points, box {params.box_length}, "
      f"correlation length {params.correlation_length}")
print(f"mean intensity v0 = {params.mean_intensity:g}, boundary = {params.boundary}")

# intensity statistics over many instances
values = np.concatenate([generate_speckle(params, i)[::32] for i in range(400)])
print(f"\nsampled {values.size} well-separated intensity values")
print(f"  empirical mean   {values.mean():.3e}  (v0 = {params.mean_intensity:.3e})")
print(f"  empirical median {np.median(values):.3e}  (exponential: v0 ln2 = "
      f"{params.mean_intensity * np.log(2):.3e})")

fig, axes = plt.subplots(1, 2, figsize=(11, 4))
axes[0].hist(values / params.mean_intensity, bins=60, density=True, alpha=0.7)
grid = np.linspace(0, 8, 200)
axes[0].plot(grid, np.exp(-grid), "k--", label=r"$e^{-V/v_0}$")
axes[0].set_xlabel("V / v0")
axes[0].set_ylabel("density")
axes[0].set_yscale("log")
axes[0].legend()
axes[0].set_title("intensity law")

# two realizations with their ground-state energies
x = np.arange(params.k_points)
for idx, color in ((0, "tab:blue"), (1, "tab:orange")):
    v = generate_speckle(params, idx)
    energy = ground_state_energy(v, params)
    axes[1].plot(x, v / params.mean_intensity, color=color, lw=0.8,
                 label=f"instance {idx}: E0 = {energy:.3e}")
    axes[1].axhline(energy / params.mean_intensity, color=color, ls=":")
    print(f"  instance {idx}: ground-state energy {energy:.6e}")
axes[1].set_xlabel("grid point")
axes[1].set_ylabel("V / v0")
axes[1].legend(fontsize=8)
axes[1].set_title("realizations and E0 (dotted)")

fig.tight_layout()
fig.savefig(OUT / "speckle_potentials.png", dpi=130)
print(f"\nfigure written to {OUT / 'speckle_potentials.png'}")
