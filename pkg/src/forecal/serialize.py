"""Model persistence: one tagged JSON envelope for every calibrator variant.

Floats serialize through Python's shortest round-trip repr, so a reloaded
model predicts bit-identically; infinities (tree bounds, binning edges) use
JSON's non-strict Infinity literals, which the standard parser accepts.
"""

import json

import numpy as np

from .baselines import (
    BBQCalibrator,
    HistogramCalibrator,
    IsotonicCalibrator,
    PlattCalibrator,
    TemperatureCalibrator,
)
from .calibrator import ForecalCalibrator, ForecalConfig
from .forest import ForestParams, MonotonicForest, RegressionTree

FORMAT = "forecal-model"
VERSION = 1


class ModelFormatError(ValueError):
    """A model file failed to parse or carried an unknown tag/version."""


def _tree_to_dict(t: RegressionTree) -> dict:
    return {
        "feature": t.feature.tolist(),
        "threshold": t.threshold.tolist(),
        "left": t.left.tolist(),
        "right": t.right.tolist(),
        "value": t.value.tolist(),
        "lower": t.lower.tolist(),
        "upper": t.upper.tolist(),
    }


def _tree_from_dict(d: dict) -> RegressionTree:
    return RegressionTree(
        feature=np.array(d["feature"], dtype=np.int64),
        threshold=np.array(d["threshold"], dtype=np.float64),
        left=np.array(d["left"], dtype=np.int64),
        right=np.array(d["right"], dtype=np.int64),
        value=np.array(d["value"], dtype=np.float64),
        lower=np.array(d["lower"], dtype=np.float64),
        upper=np.array(d["upper"], dtype=np.float64),
    )


def _forest_to_dict(f: MonotonicForest) -> dict:
    return {
        "params": {
            "n_trees": f.params.n_trees,
            "min_samples_leaf": f.params.min_samples_leaf,
            "max_depth": f.params.max_depth,
            "bootstrap": f.params.bootstrap,
            "seed": f.params.seed,
        },
        "constraints": list(f.constraints),
        "y_min": f.y_min,
        "y_max": f.y_max,
        "trees": [_tree_to_dict(t) for t in f.trees],
    }


def _forest_from_dict(d: dict) -> MonotonicForest:
    return MonotonicForest(
        trees=[_tree_from_dict(t) for t in d["trees"]],
        params=ForestParams(**d["params"]),
        constraints=tuple(d["constraints"]),
        y_min=d["y_min"],
        y_max=d["y_max"],
    )


def model_to_dict(model) -> dict:
    if isinstance(model, PlattCalibrator):
        method, payload = "platt", {"a": model.a, "b": model.b}
    elif isinstance(model, TemperatureCalibrator):
        method, payload = "temperature", {"t": model.t}
    elif isinstance(model, IsotonicCalibrator):
        method, payload = "isotonic", {
            "breakpoints": model.breakpoints.tolist(),
            "values": model.values.tolist(),
        }
    elif isinstance(model, HistogramCalibrator):
        method, payload = "histogram", {
            "m": model.m,
            "values": list(model.values),
            "resolved": model.resolved.tolist(),
        }
    elif isinstance(model, BBQCalibrator):
        method, payload = "bbq", {
            "edges": [list(e) for e in model.edges],
            "predictions": [list(p) for p in model.predictions],
            "weights": model.weights.tolist(),
        }
    elif isinstance(model, ForecalCalibrator):
        method, payload = "forecal", {
            "config": {
                "n_bins": model.config.n_bins,
                "n_bootstrap": model.config.n_bootstrap,
                "seed": model.config.seed,
            },
            "n_extra": model.n_extra,
            "forest": _forest_to_dict(model.forest),
        }
    else:
        raise ModelFormatError(f"cannot serialize object of type {type(model).__name__}")
    return {"format": FORMAT, "version": VERSION, "method": method, "payload": payload}


def model_from_dict(doc: dict):
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFormatError("not a calibrator model document")
    if doc.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    method = doc.get("method")
    payload = doc.get("payload", {})
    if method == "platt":
        return PlattCalibrator(a=payload["a"], b=payload["b"])
    if method == "temperature":
        return TemperatureCalibrator(t=payload["t"])
    if method == "isotonic":
        return IsotonicCalibrator(
            breakpoints=np.array(payload["breakpoints"], dtype=np.float64),
            values=np.array(payload["values"], dtype=np.float64),
        )
    if method == "histogram":
        return HistogramCalibrator(
            m=payload["m"],
            values=tuple(payload["values"]),
            resolved=np.array(payload["resolved"], dtype=np.float64),
        )
    if method == "bbq":
        return BBQCalibrator(
            edges=tuple(tuple(e) for e in payload["edges"]),
            predictions=tuple(tuple(p) for p in payload["predictions"]),
            weights=np.array(payload["weights"], dtype=np.float64),
        )
    if method == "forecal":
        forest = _forest_from_dict(payload["forest"])
        config = ForecalConfig(
            n_bins=payload["config"]["n_bins"],
            n_bootstrap=payload["config"]["n_bootstrap"],
            forest=forest.params,
            seed=payload["config"]["seed"],
        )
        return ForecalCalibrator(forest=forest, config=config, n_extra=payload["n_extra"])
    raise ModelFormatError(f"unknown method tag {method!r}")


def method_tag(model) -> str:
    return model_to_dict(model)["method"]


def save_model(model, path: str) -> None:
    text = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
        fh.write("\n")


def load_model(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid model JSON ({exc})") from None
    return model_from_dict(doc)
