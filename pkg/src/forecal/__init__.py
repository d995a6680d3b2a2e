"""Probability calibration toolkit.

The flagship calibrator trains a monotonically-constrained, range-preserving
random forest on binned bootstrap resamples of a calibration set; classic
baselines (Platt, temperature, isotonic, histogram, simplified BBQ), the usual
calibration metrics, a synthetic miscalibration generator, and a benchmark
CLI round out the package.
"""

from .baselines import (
    BBQCalibrator,
    HistogramCalibrator,
    IsotonicCalibrator,
    PlattCalibrator,
    TemperatureCalibrator,
    calibrate_baseline,
    fit_bbq,
    fit_histogram,
    fit_isotonic,
    fit_platt,
    fit_temperature,
    pav_fit,
    to_logit,
)
from .calibrator import (
    ForecalCalibrator,
    ForecalConfig,
    RegressionSample,
    build_regression_dataset,
    fit_forecal,
)
from .data import (
    CalibrationDataset,
    DataFormatError,
    SplitSpec,
    load_csv,
    partition,
    save_csv,
    validate_dataset,
)
from .forest import (
    ForestParams,
    MonotonicForest,
    RegressionTree,
    check_monotone,
    fit_forest,
)
from .metrics import EvalRow, ReliabilityBin, auc, bin_reliability, ece, log_loss
from .serialize import load_model, save_model
from .synthetic import DistortionSpec, distort, generate, oracle_calibration

__version__ = "0.1.0"

__all__ = [
    "BBQCalibrator",
    "CalibrationDataset",
    "DataFormatError",
    "DistortionSpec",
    "EvalRow",
    "ForecalCalibrator",
    "ForecalConfig",
    "ForestParams",
    "HistogramCalibrator",
    "IsotonicCalibrator",
    "MonotonicForest",
    "PlattCalibrator",
    "RegressionSample",
    "RegressionTree",
    "ReliabilityBin",
    "SplitSpec",
    "TemperatureCalibrator",
    "auc",
    "bin_reliability",
    "build_regression_dataset",
    "calibrate_baseline",
    "check_monotone",
    "distort",
    "ece",
    "fit_bbq",
    "fit_forecal",
    "fit_forest",
    "fit_histogram",
    "fit_isotonic",
    "fit_platt",
    "fit_temperature",
    "generate",
    "load_csv",
    "load_model",
    "log_loss",
    "oracle_calibration",
    "partition",
    "pav_fit",
    "save_csv",
    "save_model",
    "to_logit",
    "validate_dataset",
]
