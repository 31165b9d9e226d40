"""The lossy cavity reflection as a quantum channel.

Shows the on-resonance reflection amplitudes across the (C, eta) plane,
then reflects a displaced squeezed state off cavities of decreasing quality
and watches the output cat degrade.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gkpcavity import fock
from gkpcavity.channel import (
    AtomConfig,
    CavityParams,
    apply_reflection,
    reflection_coefficients,
)
from gkpcavity.fock import FockVector

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def main():
    # reflection amplitudes vs cooperativity
    etas = (0.8, 0.95, 0.99)
    cs = np.logspace(-1, 3, 200)
    fig, ax = plt.subplots(figsize=(6, 4))
    for eta in etas:
        r1 = [reflection_coefficients(CavityParams(c, eta)).r1 for c in cs]
        ax.semilogx(cs, r1, label=f"eta = {eta}")
    ax.axhline(1.0, color="k", lw=0.5)
    ax.set_xlabel("cooperativity C")
    ax.set_ylabel("coupled-branch reflection r1")
    ax.legend()
    fig.tight_layout()
    fig.savefig(OUT / "reflection_amplitudes.png", dpi=150)

    # one reflection turns a displaced squeezed state into a cat
    dim = 140
    alpha = math.sqrt(2 * math.pi) / 2
    base = fock.squeezed_vacuum(0.9, dim).amplitudes
    rho_in = FockVector(
        fock.displacement_operator(alpha, dim) @ base
    ).to_density_matrix()
    grid = np.linspace(-5, 5, 121)
    cavities = {
        "ideal": CavityParams.ideal(),
        "C0 = 2000": CavityParams.from_internal(2000.0, 0.985),
        "C0 = 200": CavityParams.from_internal(200.0, 0.95),
        "C0 = 20": CavityParams.from_internal(20.0, 0.85),
    }
    fig, axes = plt.subplots(1, len(cavities), figsize=(3.2 * len(cavities), 3.2))
    for ax, (label, cavity) in zip(axes, cavities.items()):
        out, prob = apply_reflection(rho_in, cavity, AtomConfig.plus_plus())
        w = fock.wigner(out, grid, grid)
        vmax = np.abs(w).max()
        ax.pcolormesh(grid, grid, w, cmap="RdBu_r", vmin=-vmax, vmax=vmax)
        ax.set_title(f"{label}\np(+) = {prob:.3f}", fontsize=9)
        ax.set_xlabel("x")
    axes[0].set_ylabel("p")
    fig.tight_layout()
    fig.savefig(OUT / "reflection_cats.png", dpi=150)
    print(f"wrote {OUT / 'reflection_amplitudes.png'}")
    print(f"wrote {OUT / 'reflection_cats.png'}")


if __name__ == "__main__":
    main()
