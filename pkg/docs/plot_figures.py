"""Plot CSVs written by the repforward CLI.

    python3 docs/plot_figures.py out/

Needs matplotlib, which the package itself does not depend on.
"""

import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in rows[0] if rows[0][k] not in ("true", "false")}


def plot_dir(out: Path):
    traj = sorted(out.glob("replicator_*.csv"))
    if traj:
        fig, (ax_p, ax_u) = plt.subplots(1, 2, figsize=(10, 4))
        for path in traj:
            d = load(path)
            label = path.stem.removeprefix("replicator_")
            ax_p.plot(d["t"], d["p"], label=label)
            ax_u.plot(d["t"], d["u_dove"], label=label)
        ax_p.set(xlabel="t", ylabel="dove share p")
        ax_u.set(xlabel="t", ylabel="dove utility")
        ax_p.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(out / "replicator.png", dpi=120)

    sims = sorted(out.glob("manet_*.csv"))
    if sims:
        fig, ax = plt.subplots(figsize=(6, 4))
        for path in sims:
            d = load(path)
            ax.plot(d["epoch"], d["normalized_forwarded"], label=path.stem.removeprefix("manet_"))
        ax.set(xlabel="epoch", ylabel="forwarded / requested", ylim=(-0.05, 1.05))
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(out / "manet.png", dpi=120)


if __name__ == "__main__":
    plot_dir(Path(sys.argv[1] if len(sys.argv) > 1 else "out"))
