"""SVG figures with byte-reproducible output.

The Agg backend plus a fixed svg.hashsalt and a cleared Date field make
repeated renders of the same data byte-identical, so figures can be
checksummed in pipelines.
"""

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "fsar"

import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_band(band, path, truth=None):
    """Slope estimate with its pointwise band; optional reference curve."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    t = band.grid.points
    ax.fill_between(t, band.lower, band.upper, alpha=0.25, color="C0",
                    linewidth=0, label=f"{band.level:.0%} pointwise band")
    ax.plot(t, band.center, color="C0", label="estimate")
    if truth is not None:
        ax.plot(t, truth, color="C3", linestyle="--", label="reference")
    ax.set_xlabel("t")
    ax.set_ylabel("slope")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def plot_curves(sample, path, max_curves=20):
    """Spaghetti plot of the first few curves in a sample."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    shown = min(int(max_curves), sample.n)
    for row in sample.curves[:shown]:
        ax.plot(sample.grid.points, row, color="C0", alpha=0.4, linewidth=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("X(t)")
    ax.set_title(f"{shown} of {sample.n} curves")
    fig.tight_layout()
    _save(fig, path)


def plot_slope(grid, values, path, raw=None):
    """Slope function, optionally next to the raw curve it smooths."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    if raw is not None:
        ax.plot(grid.points, raw, color="C7", alpha=0.6, linewidth=0.8,
                label="raw")
    ax.plot(grid.points, values, color="C0", label="slope")
    ax.set_xlabel("t")
    ax.set_ylabel("beta(t)")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)
