"""Step-by-step grid state generation with the cavity.

Runs the displacement-reflection loop for one to three rounds on an ideal
and on a C0 = 2000 cavity, printing the squeezing report after each run and
saving Wigner snapshots of the N = 2 states.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gkpcavity import fock
from gkpcavity.channel import CavityParams
from gkpcavity.protocol import ProtocolConfig, run_protocol, two_level_weighting_config

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def report_line(tag, res):
    rep = res.squeezing
    print(
        f"  {tag:26s} dB_x = {rep.db_x:6.2f}  dB_p = {rep.db_p:6.2f} "
        f" min = {rep.min_db:6.2f}  p_success = {res.success_probability:.4f}"
    )


def main():
    ideal = CavityParams.ideal()
    noisy = CavityParams.from_internal(2000.0, 0.985)

    print("ideal cavity, r = 1.15 input:")
    for n in (1, 2, 3):
        res = run_protocol(ProtocolConfig(n_steps=n, input_squeezing=1.15, cavity=ideal))
        report_line(f"N = {n}", res)
    res = run_protocol(
        ProtocolConfig(
            n_steps=2, input_squeezing=1.15, cavity=ideal,
            atoms=two_level_weighting_config(2),
        )
    )
    report_line("N = 2, two-level atom", res)
    res = run_protocol(
        ProtocolConfig(
            n_steps=2, input_squeezing=1.15, cavity=ideal,
            deterministic_first_step=True,
        )
    )
    report_line("N = 2, deterministic", res)

    print("\nC0 = 2000 cavity (eta = 0.985):")
    states = {}
    for n in (1, 2):
        res = run_protocol(
            ProtocolConfig(
                n_steps=n, input_squeezing=1.0, cavity=noisy, displacement_scale=1.02
            )
        )
        report_line(f"N = {n}", res)
        states[n] = res.state

    grid = np.linspace(-6, 6, 161)
    fig, axes = plt.subplots(2, 2, figsize=(9, 7), height_ratios=(3, 1))
    for col, (n, state) in enumerate(states.items()):
        w = fock.wigner(state, grid, grid)
        vmax = np.abs(w).max()
        axes[0, col].pcolormesh(grid, grid, w, cmap="RdBu_r", vmin=-vmax, vmax=vmax)
        axes[0, col].set_title(f"N = {n}")
        axes[1, col].plot(grid, fock.quadrature_distribution(state, "x", grid), lw=0.9)
        axes[1, col].plot(grid, fock.quadrature_distribution(state, "p", grid), lw=0.9)
        axes[1, col].set_xlabel("x, p")
    axes[0, 0].set_ylabel("p")
    fig.tight_layout()
    fig.savefig(OUT / "protocol_states.png", dpi=150)
    print(f"\nwrote {OUT / 'protocol_states.png'}")


if __name__ == "__main__":
    main()
