"""Tuning the cavity working point.

Sweeps a coarse internal-cooperativity grid for the cavity-only and the
breeding protocol (small budgets, a couple of minutes) and plots the
achievable min(dB_x, dB_p) together with the optimal escape efficiency.
The same machinery drives the `gkpcavity sweep` command.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from gkpcavity.optimize import SearchSpace, sweep

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def main():
    c0_grid = [50.0, 200.0, 800.0, 3200.0]
    budget = 90  # keep the demo quick; the CLI default is 300

    runs = {
        "cavity, N=1": ("cavity", [1], SearchSpace(optimize_scale=True)),
        "cavity, N=2": ("cavity", [2], SearchSpace(optimize_scale=True)),
        "breeding, M=2": ("breeding", [2], SearchSpace(optimize_scale=True)),
    }
    fig, (ax_db, ax_eta) = plt.subplots(1, 2, figsize=(10, 4))
    for label, (protocol, steps, space) in runs.items():
        result = sweep(c0_grid, protocol, steps, space, budget=budget, seed=17)
        best = [result.best_for(c0) for c0 in c0_grid]
        print(f"{label}:")
        for point in best:
            print(
                f"  C0 = {point.c0:6.0f}: min dB = {point.best.min_db:5.2f} "
                f" (eta = {point.eta:.4f}, C = {point.cooperativity:6.1f},"
                f" r = {point.best.params['r']:.2f})"
            )
        ax_db.semilogx(c0_grid, [p.best.min_db for p in best], "o-", label=label)
        ax_eta.semilogx(c0_grid, [p.eta for p in best], "o-", label=label)
    ax_db.set_xlabel("internal cooperativity C0")
    ax_db.set_ylabel("min effective squeezing [dB]")
    ax_db.legend()
    ax_eta.set_xlabel("internal cooperativity C0")
    ax_eta.set_ylabel("optimal escape efficiency")
    fig.tight_layout()
    fig.savefig(OUT / "sweep_curves.png", dpi=150)
    print(f"\nwrote {OUT / 'sweep_curves.png'}")


if __name__ == "__main__":
    main()
