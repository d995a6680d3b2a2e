"""Figure rendering for the report paths; everything goes straight to files."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import ReliabilityBin


def save_reliability_figure(bins: list[ReliabilityBin], path: str, title: str | None = None) -> None:
    """Scatter of (mean prediction, empirical rate) per non-empty bin against
    the y = x diagonal."""
    xs = [b.mean_pred for b in bins if b.count]
    ys = [b.empirical for b in bins if b.count]
    counts = [b.count for b in bins if b.count]
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.plot([0, 1], [0, 1], linestyle="--", color="0.5", linewidth=1.0, label="perfect calibration")
    ax.scatter(xs, ys, s=28, color="tab:blue", zorder=3, label="bins")
    for x, y, c in zip(xs, ys, counts):
        ax.annotate(str(c), (x, y), textcoords="offset points", xytext=(4, 4), fontsize=7, color="0.35")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("mean predicted probability")
    ax.set_ylabel("empirical probability")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper left", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def save_benchmark_figure(rows: list[dict], path: str) -> None:
    """Horizontal bars of median ECE and AUC percent change per method."""
    methods = [r["method"] for r in rows]
    ece_med = [r["median_ece_delta_pct"] for r in rows]
    auc_med = [r["median_auc_delta_pct"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 0.6 * len(rows) + 2.0), sharey=True)
    pos = range(len(methods))
    for ax, vals, label in ((ax1, ece_med, "median ECE change (%)"),
                            (ax2, auc_med, "median AUC change (%)")):
        clean = [0.0 if v is None else v for v in vals]
        ax.barh(list(pos), clean, color="tab:blue", height=0.6)
        ax.axvline(0.0, color="0.3", linewidth=0.8)
        ax.set_xlabel(label)
        ax.grid(True, axis="x", alpha=0.3)
    ax1.set_yticks(list(pos), methods)
    ax1.invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
