"""The forecal calibrator: binned bootstrap resampling feeding a monotone forest.

Calibration-set predictions are divided into equal-width bins; each non-empty
bin contributes a fixed number of bootstrap resamples (drawn with replacement,
resample size = bin size), and every resample becomes one regression row
(mean predicted probability, empirical rate) weighted by the bin size. A
random forest constrained to be non-decreasing in the mean-prediction feature
is then fit on those rows, yielding a calibration map that stays inside [0, 1]
and never inverts the ranking of its inputs.
"""

from dataclasses import dataclass, field

import numpy as np

from .data import CalibrationDataset
from .forest import ForestParams, MonotonicForest, fit_forest
from .metrics import bin_indices


@dataclass(frozen=True)
class ForecalConfig:
    """Bin count, bootstrap resamples per bin, forest parameters, and the seed
    driving the resample streams."""

    n_bins: int = 10
    n_bootstrap: int = 100
    forest: ForestParams = field(default_factory=ForestParams)
    seed: int = 0

    def __post_init__(self):
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")
        if self.n_bootstrap < 1:
            raise ValueError("n_bootstrap must be >= 1")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class RegressionSample:
    """One bootstrap-derived training row: resample mean prediction, resample
    empirical rate, and the originating bin's size as weight."""

    mu_p: float
    mu_y: float
    weight: int


def _bootstrap_columns(d: CalibrationDataset, extra: np.ndarray | None,
                       n_bins: int, n_bootstrap: int, seed: int):
    """Shared resampling core. Returns (mu_p, mu_extra, mu_y, weights); the
    resample indices depend only on (seed, bin, resample) and the bin
    membership, so adding extra columns never perturbs the draws."""
    idx = bin_indices(d.probs, n_bins)
    mu_p, mu_y, weights = [], [], []
    mu_extra = [] if extra is not None else None
    for i in range(n_bins):
        members = np.nonzero(idx == i)[0]
        nb = len(members)
        if nb == 0:
            continue
        for k in range(n_bootstrap):
            rng = np.random.default_rng([seed, i, k])
            draw = members[rng.integers(0, nb, size=nb)]
            mu_p.append(float(d.probs[draw].mean()))
            mu_y.append(float(d.labels[draw].mean()))
            weights.append(nb)
            if mu_extra is not None:
                mu_extra.append(extra[draw].mean(axis=0))
    mu_p = np.array(mu_p)
    mu_y = np.array(mu_y)
    weights = np.array(weights, dtype=np.float64)
    mu_extra = np.array(mu_extra) if mu_extra is not None else None
    return mu_p, mu_extra, mu_y, weights


def build_regression_dataset(d: CalibrationDataset, n_bins: int,
                             n_bootstrap: int, seed: int) -> list[RegressionSample]:
    """Construct the bootstrap regression rows: n_bootstrap rows per non-empty
    bin, in (bin, resample) order; empty bins contribute nothing."""
    mu_p, _, mu_y, weights = _bootstrap_columns(d, None, n_bins, n_bootstrap, seed)
    return [RegressionSample(float(p), float(y), int(w))
            for p, y, w in zip(mu_p, mu_y, weights)]


@dataclass
class ForecalCalibrator:
    """Fitted calibration map. Output is always within [0, 1] (the forest is
    range-preserving over empirical-rate targets) and non-decreasing in the
    input probability (the first feature carries a +1 constraint)."""

    forest: MonotonicForest
    config: ForecalConfig
    n_extra: int = 0

    def calibrate(self, p: float) -> float:
        return float(self.calibrate_many(np.array([p]))[0])

    def calibrate_many(self, probs) -> np.ndarray:
        if self.n_extra:
            raise ValueError(
                f"calibrator was fitted with {self.n_extra} extra feature(s); "
                "use calibrate_with_features"
            )
        probs = self._check_probs(probs)
        return self.forest.predict_many(probs.reshape(-1, 1))

    def calibrate_with_features(self, p: float, extra) -> float:
        extra = np.asarray(extra, dtype=np.float64).reshape(1, -1) if np.size(extra) else np.empty((1, 0))
        return float(self.calibrate_with_features_many(np.array([p]), extra)[0])

    def calibrate_with_features_many(self, probs, extra) -> np.ndarray:
        probs = self._check_probs(probs)
        extra = np.asarray(extra, dtype=np.float64)
        if extra.ndim == 1:
            extra = extra.reshape(-1, 1) if self.n_extra == 1 else extra.reshape(len(probs), -1)
        if extra.shape != (len(probs), self.n_extra):
            raise ValueError(
                f"extra features must have shape ({len(probs)}, {self.n_extra}), got {extra.shape}"
            )
        X = np.column_stack([probs.reshape(-1, 1), extra]) if self.n_extra else probs.reshape(-1, 1)
        return self.forest.predict_many(X)

    @staticmethod
    def _check_probs(probs) -> np.ndarray:
        probs = np.asarray(probs, dtype=np.float64)
        if probs.size and (not np.all(np.isfinite(probs)) or probs.min() < 0.0 or probs.max() > 1.0):
            raise ValueError("probabilities must lie within [0, 1]")
        return probs


def fit_forecal(d: CalibrationDataset, config: ForecalConfig | None = None,
                extra: np.ndarray | None = None,
                extra_constraints=None) -> ForecalCalibrator:
    """Fit the calibrator on a prediction dataset.

    ``extra`` (optional, shape (n, e)) supplies exogenous features; each
    bootstrap row then carries the resample mean of every extra column.
    Extra features are unconstrained unless ``extra_constraints`` says
    otherwise; the probability feature is always constrained non-decreasing.
    """
    config = config or ForecalConfig()
    if extra is not None:
        extra = np.asarray(extra, dtype=np.float64)
        if extra.ndim == 1:
            extra = extra.reshape(-1, 1)
        if len(extra) != len(d):
            raise ValueError("extra feature rows must match the dataset length")
    mu_p, mu_extra, mu_y, weights = _bootstrap_columns(
        d, extra, config.n_bins, config.n_bootstrap, config.seed
    )
    n_extra = 0 if extra is None else extra.shape[1]
    if n_extra:
        X = np.column_stack([mu_p, mu_extra])
        if extra_constraints is None:
            extra_constraints = (0,) * n_extra
        constraints = (1,) + tuple(int(c) for c in extra_constraints)
    else:
        X = mu_p.reshape(-1, 1)
        constraints = (1,)
    forest = fit_forest(X, mu_y, weights, constraints, config.forest)
    return ForecalCalibrator(forest=forest, config=config, n_extra=n_extra)
