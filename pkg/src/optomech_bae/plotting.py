"""Optional PNG rendering of CLI results (needs matplotlib)."""
from __future__ import annotations

from pathlib import Path


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("--plot needs matplotlib; install the 'plot' extra") from exc
    matplotlib.use("Agg")
    matplotlib.rcParams.update({"font.size": 11, "savefig.dpi": 150,
                                "svg.hashsalt": "optomech-bae"})
    from matplotlib import pyplot
    return pyplot


def plot_curves(path: Path, curves: dict, xlabel: str, ylabel: str, logy: bool = False) -> None:
    """One line per ``{label: (x, y)}`` entry."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (x, y) in curves.items():
        ax.plot(x, y, label=label, lw=1.2)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(curves) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def plot_sweep(path: Path, ratios, sums) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ratios, sums, "o-", ms=3, lw=1.2)
    ax.axhline(1.0, ls="--", color="k", lw=0.8)
    ax.set_xlabel("G+/G-")
    ax.set_ylabel("duan sum")
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
