"""Synthetic miscalibrated predictions with a known true calibration map.

Latent event rates q are drawn from a Beta distribution, labels from
Bernoulli(q), and the emitted prediction distorts q: the sigmoid kinds expand
or shrink the logit by a factor k (k > 1 pushes mass toward 0 and 1, k < 1
toward the middle), the shift kind adds a clamped offset. For the sigmoid
kinds the distortion is invertible, so the exact calibration map is known in
closed form: ground truth that no real prediction file can supply.
"""

from dataclasses import dataclass

import numpy as np

from .data import CalibrationDataset

SIGMOID_KINDS = ("overconfident-sigmoid", "underconfident-sigmoid")
KINDS = SIGMOID_KINDS + ("shift",)


@dataclass(frozen=True)
class DistortionSpec:
    """Distortion kind plus severity; beta_a/beta_b shape the latent rates."""

    kind: str
    k: float
    beta_a: float = 2.0
    beta_b: float = 2.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not np.isfinite(self.k):
            raise ValueError("k must be finite")
        if self.kind in SIGMOID_KINDS and not self.k > 0.0:
            raise ValueError("sigmoid distortions require k > 0")
        if not (self.beta_a > 0.0 and self.beta_b > 0.0):
            raise ValueError("beta shape parameters must be > 0")


def _sigmoid_warp(q: np.ndarray, k: float) -> np.ndarray:
    # sigma(k * logit(q)) written as q^k / (q^k + (1-q)^k): exact at 0 and 1.
    qk = np.power(q, k)
    return qk / (qk + np.power(1.0 - q, k))


def distort(q, spec: DistortionSpec):
    """Map true rates to emitted predictions under the distortion."""
    q = np.asarray(q, dtype=np.float64)
    if spec.kind in SIGMOID_KINDS:
        out = _sigmoid_warp(q, spec.k)
    else:
        out = np.clip(q + spec.k, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def generate(n: int, spec: DistortionSpec, seed: int) -> tuple[CalibrationDataset, np.ndarray]:
    """Draw n records: returns the (p, y) dataset plus the latent true rates q."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    q = rng.beta(spec.beta_a, spec.beta_b, size=n)
    y = (rng.random(n) < q).astype(np.int64)
    return CalibrationDataset(distort(q, spec), y), q


def oracle_calibration(spec: DistortionSpec, p):
    """The exact calibration map for the distortion: sigma(logit(p) / k) for
    the sigmoid kinds (undefined at p in {0, 1}), clamp(p - k, 0, 1) for shift.
    """
    arr = np.asarray(p, dtype=np.float64)
    if spec.kind in SIGMOID_KINDS:
        if np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise ValueError("oracle for sigmoid distortions requires p strictly inside (0, 1)")
        out = _sigmoid_warp(arr, 1.0 / spec.k)
    else:
        out = np.clip(arr - spec.k, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out
