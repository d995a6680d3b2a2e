"""Calibration metrics: reliability binning, expected calibration error, AUC, log loss.

Binning convention: ``m`` equal-width bins over [0, 1]; bin ``i`` covers
``[i/m, (i+1)/m)`` except the last, which is closed on the right so that a
prediction of exactly 1.0 has a home.
"""

from dataclasses import dataclass

import numpy as np

from .data import CalibrationDataset


@dataclass(frozen=True)
class ReliabilityBin:
    """One reliability-diagram bin: its population, mean prediction, and
    empirical positive rate (the latter two are None for empty bins)."""

    bin_index: int
    count: int
    mean_pred: float | None
    empirical: float | None


def bin_indices(probs: np.ndarray, m: int) -> np.ndarray:
    """Assign each probability to its equal-width bin (last bin right-closed)."""
    if m < 1:
        raise ValueError("bin count must be >= 1")
    idx = (np.asarray(probs, dtype=np.float64) * m).astype(np.int64)
    return np.minimum(idx, m - 1)


def bin_reliability(d: CalibrationDataset, m: int) -> list[ReliabilityBin]:
    """Per-bin count, mean predicted probability, and empirical rate."""
    idx = bin_indices(d.probs, m)
    counts = np.bincount(idx, minlength=m)
    sum_p = np.bincount(idx, weights=d.probs, minlength=m)
    sum_y = np.bincount(idx, weights=d.labels.astype(np.float64), minlength=m)
    bins = []
    for i in range(m):
        c = int(counts[i])
        if c == 0:
            bins.append(ReliabilityBin(i, 0, None, None))
        else:
            bins.append(ReliabilityBin(i, c, float(sum_p[i] / c), float(sum_y[i] / c)))
    return bins


def ece(d: CalibrationDataset, m: int) -> float:
    """Expected calibration error: bin-size-weighted mean absolute gap between
    empirical rate and mean prediction, over non-empty bins. Result in [0, 1].
    """
    bins = bin_reliability(d, m)
    n = len(d)
    total = 0.0
    for b in bins:
        if b.count:
            total += (b.count / n) * abs(b.empirical - b.mean_pred)
    return total


def auc(d: CalibrationDataset) -> float | None:
    """Probability that a random positive outranks a random negative, ties
    credited 1/2 (Mann-Whitney). None when either class is absent."""
    y = d.labels
    p = d.probs
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(p, kind="mergesort")
    ps = p[order]
    pos = np.arange(1, len(ps) + 1, dtype=np.float64)
    new_group = np.concatenate(([True], ps[1:] != ps[:-1]))
    grp = np.cumsum(new_group) - 1
    counts = np.bincount(grp)
    rank_sums = np.bincount(grp, weights=pos)
    avg_rank = rank_sums / counts
    ranks = np.empty(len(ps))
    ranks[order] = avg_rank[grp]
    r_pos = float(ranks[y == 1].sum())
    u = r_pos - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def log_loss(d: CalibrationDataset, clip: float = 1e-12) -> float:
    """Mean negative log likelihood with probabilities clipped into
    [clip, 1 - clip]."""
    if not (0.0 < clip < 0.5):
        raise ValueError("clip must lie strictly between 0 and 0.5")
    p = np.clip(d.probs, clip, 1.0 - clip)
    y = d.labels.astype(np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def delta_pct(before: float | None, after: float | None) -> float | None:
    """Relative percent change, 100 * (after - before) / before; None when the
    base is zero or either input is undefined."""
    if before is None or after is None or before == 0.0:
        return None
    return 100.0 * (after - before) / before


@dataclass(frozen=True)
class EvalRow:
    """Before/after metrics for one calibrator (negative deltas = reduction)."""

    method: str
    ece_before: float
    ece_after: float
    auc_before: float | None
    auc_after: float | None

    @property
    def ece_delta_pct(self) -> float | None:
        return delta_pct(self.ece_before, self.ece_after)

    @property
    def auc_delta_pct(self) -> float | None:
        return delta_pct(self.auc_before, self.auc_after)


def evaluate_pair(method: str, probs: np.ndarray, calibrated: np.ndarray,
                  labels: np.ndarray, ece_bins: int) -> EvalRow:
    """Score a (raw, calibrated) prediction pair against shared labels."""
    before = CalibrationDataset(probs, labels)
    after = CalibrationDataset(calibrated, labels)
    return EvalRow(
        method=method,
        ece_before=ece(before, ece_bins),
        ece_after=ece(after, ece_bins),
        auc_before=auc(before),
        auc_after=auc(after),
    )


def reliability_csv_text(bins: list[ReliabilityBin]) -> str:
    """Render reliability bins as CSV (empty mean/empirical fields for empty
    bins); values use the shortest round-trip decimal representation."""
    lines = ["bin_index,count,mean_pred,empirical"]
    for b in bins:
        mp = "" if b.mean_pred is None else repr(float(b.mean_pred))
        em = "" if b.empirical is None else repr(float(b.empirical))
        lines.append(f"{b.bin_index},{b.count},{mp},{em}")
    return "\n".join(lines) + "\n"


def write_reliability_csv(bins: list[ReliabilityBin], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(reliability_csv_text(bins))
