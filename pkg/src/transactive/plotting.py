"""Line charts of a finished run (needs matplotlib)."""
from __future__ import annotations

from pathlib import Path


def plot_records(records, out_dir, names=None) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = names or {}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ks = [r.k for r in records]
    ids = sorted({a for r in records for a in r.power})
    written = []

    for kind, title, fname in (("generator", "Generated power", "generation.png"),
                               ("consumer", "Controllable demand", "demand.png")):
        fig, ax = plt.subplots(figsize=(7, 4))
        for a in ids:
            pts = [(r.k, r.power[a]) for r in records if r.kind.get(a) == kind]
            if pts:
                ax.plot(*zip(*pts), label=names.get(a, str(a)))
        ax.set(xlabel="iteration k", ylabel="W", title=title)
        ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(out / fname, dpi=120)
        plt.close(fig)
        written.append(out / fname)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ks, [r.price for r in records])
    ax.set(xlabel="iteration k", ylabel="price", title="System price")
    fig.tight_layout()
    fig.savefig(out / "price.png", dpi=120)
    plt.close(fig)
    written.append(out / "price.png")
    return written
