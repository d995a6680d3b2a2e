"""Prediction datasets: typed containers, CSV ingestion/egress, deterministic splits.

The wire format is a plain CSV with header ``p,y`` (one predicted probability
and one binary label per row). An extended ``p,y,q`` form carries the latent
true rate emitted by the synthetic generator; the extra column is accepted and
ignored on load.
"""

from dataclasses import dataclass

import numpy as np


class DataFormatError(ValueError):
    """A prediction file (or one of its rows) failed validation."""


@dataclass(frozen=True)
class CalibrationDataset:
    """Parallel arrays of predicted probabilities and binary labels.

    The constructor enforces shape only (equal, nonzero length); value-level
    checks live in :func:`validate_dataset` so that malformed data can be
    inspected rather than rejected outright.
    """

    probs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        labels = np.asarray(self.labels)
        if labels.dtype.kind == "f" and np.all(np.isfinite(labels)) and np.all(labels == np.floor(labels)):
            labels = labels.astype(np.int64)
        else:
            labels = np.array(labels)
        if probs.ndim != 1 or labels.ndim != 1:
            raise ValueError("probs and labels must be one-dimensional")
        if len(probs) != len(labels):
            raise ValueError(f"length mismatch: {len(probs)} probs vs {len(labels)} labels")
        if len(probs) == 0:
            raise ValueError("dataset must contain at least one record")
        probs.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.probs)

    @property
    def n(self) -> int:
        return len(self.probs)

    def subset(self, indices: np.ndarray) -> "CalibrationDataset":
        return CalibrationDataset(self.probs[indices], self.labels[indices])


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic calibration/test split: fraction of rows routed to the
    calibration side and the permutation seed."""

    calibration_fraction: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.calibration_fraction < 1.0):
            raise ValueError("calibration_fraction must lie strictly between 0 and 1")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class InvariantViolation:
    index: int
    message: str


def validate_dataset(d: CalibrationDataset) -> list[InvariantViolation]:
    """Return every per-record invariant violation; the dataset is valid iff
    the list is empty."""
    out: list[InvariantViolation] = []
    finite = np.isfinite(d.probs)
    in_range = finite & (d.probs >= 0.0) & (d.probs <= 1.0)
    for i in np.nonzero(~in_range)[0]:
        out.append(InvariantViolation(int(i), f"probability {d.probs[i]!r} outside [0, 1]"))
    binary = (d.labels == 0) | (d.labels == 1)
    for i in np.nonzero(~binary)[0]:
        out.append(InvariantViolation(int(i), f"label {d.labels[i]!r} not in {{0, 1}}"))
    out.sort(key=lambda v: v.index)
    return out


def partition(d: CalibrationDataset, spec: SplitSpec) -> tuple[CalibrationDataset, CalibrationDataset]:
    """Split ``d`` into (calibration, test) by a seeded permutation.

    The first ``floor(n * calibration_fraction)`` permuted records form the
    calibration side; identical (dataset, spec) inputs always produce
    identical outputs.
    """
    n = len(d)
    perm = np.random.default_rng(spec.seed).permutation(n)
    n_cal = int(n * spec.calibration_fraction)
    if n_cal == 0 or n_cal == n:
        raise ValueError(
            f"calibration_fraction={spec.calibration_fraction} leaves an empty side for n={n}"
        )
    return d.subset(perm[:n_cal]), d.subset(perm[n_cal:])


def _parse_prob(field: str, path: str, lineno: int, column: str) -> float:
    try:
        value = float(field)
    except ValueError:
        raise DataFormatError(f"{path}:{lineno}: non-numeric {column} value {field!r}") from None
    if not np.isfinite(value) or not (0.0 <= value <= 1.0):
        raise DataFormatError(f"{path}:{lineno}: {column}={field!r} outside [0, 1]")
    return value


def _parse_label(field: str, path: str, lineno: int) -> int:
    try:
        value = int(field)
    except ValueError:
        raise DataFormatError(f"{path}:{lineno}: non-integer label {field!r}") from None
    if value not in (0, 1):
        raise DataFormatError(f"{path}:{lineno}: label {field!r} not in {{0, 1}}")
    return value


def _read_rows(path: str, header_variants: tuple[str, ...]) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    header = [c.strip() for c in lines[0].split(",")]
    if ",".join(header) not in header_variants:
        raise DataFormatError(
            f"{path}:1: expected header {' or '.join(repr(h) for h in header_variants)}, got {lines[0]!r}"
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line.strip() == "":
            continue
        fields = [c.strip() for c in line.split(",")]
        if len(fields) != len(header):
            raise DataFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}")
        rows.append(fields)
    if not rows:
        raise DataFormatError(f"{path}: no data rows (header only)")
    return header, rows


def load_csv(path: str) -> CalibrationDataset:
    """Load a ``p,y`` prediction CSV (the extended ``p,y,q`` form is accepted;
    the q column is ignored). Malformed rows raise with a 1-based line number.
    """
    _, rows = _read_rows(str(path), ("p,y", "p,y,q"))
    probs, labels = [], []
    for lineno, fields in enumerate(rows, start=2):
        probs.append(_parse_prob(fields[0], str(path), lineno, "p"))
        labels.append(_parse_label(fields[1], str(path), lineno))
    return CalibrationDataset(np.array(probs), np.array(labels, dtype=np.int64))


def load_calibrated_csv(path: str) -> tuple[CalibrationDataset, np.ndarray]:
    """Load a ``p,y,p_cal`` CSV produced by the apply command."""
    _, rows = _read_rows(str(path), ("p,y,p_cal",))
    probs, labels, cal = [], [], []
    for lineno, fields in enumerate(rows, start=2):
        probs.append(_parse_prob(fields[0], str(path), lineno, "p"))
        labels.append(_parse_label(fields[1], str(path), lineno))
        cal.append(_parse_prob(fields[2], str(path), lineno, "p_cal"))
    return CalibrationDataset(np.array(probs), np.array(labels, dtype=np.int64)), np.array(cal)


def _fmt(x: float) -> str:
    # repr of a Python float is the shortest decimal string that round-trips.
    return repr(float(x))


def save_csv(d: CalibrationDataset, path: str, true_rates: np.ndarray | None = None) -> None:
    """Write ``p,y`` (or ``p,y,q`` when true rates are supplied); probabilities
    use the shortest round-trip decimal representation."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if true_rates is None:
            fh.write("p,y\n")
            for p, y in zip(d.probs.tolist(), d.labels.tolist()):
                fh.write(f"{_fmt(p)},{int(y)}\n")
        else:
            if len(true_rates) != len(d):
                raise ValueError("true_rates length must match dataset length")
            fh.write("p,y,q\n")
            for p, y, q in zip(d.probs.tolist(), d.labels.tolist(), np.asarray(true_rates).tolist()):
                fh.write(f"{_fmt(p)},{int(y)},{_fmt(q)}\n")


def save_calibrated_csv(d: CalibrationDataset, p_cal: np.ndarray, path: str) -> None:
    """Write ``p,y,p_cal`` preserving row order."""
    p_cal = np.asarray(p_cal, dtype=np.float64)
    if len(p_cal) != len(d):
        raise ValueError("p_cal length must match dataset length")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("p,y,p_cal\n")
        for p, y, c in zip(d.probs.tolist(), d.labels.tolist(), p_cal.tolist()):
            fh.write(f"{_fmt(p)},{int(y)},{_fmt(c)}\n")
