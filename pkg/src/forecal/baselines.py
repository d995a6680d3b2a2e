"""Baseline calibrators behind one contract: fit on (p, y), map [0,1] -> [0,1].

Platt and temperature scaling operate in logit space. Fitting clips inputs to
[clip, 1 - clip] so the optimization domain is finite; application uses the
exact logit (infinite at 0 and 1), which keeps both maps strictly increasing
over distinct inputs. Clipping at application time would collapse extreme
predictions into ties and silently change AUC.
"""

import math
from dataclasses import dataclass

import numpy as np

from .data import CalibrationDataset
from .metrics import bin_indices, bin_reliability

LOGIT_CLIP = 1e-6


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def to_logit(p, clip: float = LOGIT_CLIP):
    """ln(p / (1 - p)) with p clipped into [clip, 1 - clip] first."""
    if not (0.0 < clip < 0.5):
        raise ValueError("clip must lie strictly between 0 and 0.5")
    p = np.clip(np.asarray(p, dtype=np.float64), clip, 1.0 - clip)
    z = np.log(p) - np.log1p(-p)
    return float(z) if z.ndim == 0 else z


def _exact_logit(p: np.ndarray) -> np.ndarray:
    # +/- inf at the endpoints; strictly increasing everywhere on [0, 1].
    with np.errstate(divide="ignore"):
        return np.log(p) - np.log1p(-p)


def _check_probs(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.size and (not np.all(np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("probabilities must lie within [0, 1]")
    return p


def _require_both_classes(d: CalibrationDataset, method: str) -> None:
    pos = int(np.count_nonzero(d.labels == 1))
    if pos == 0 or pos == len(d):
        raise ValueError(f"{method} requires both classes in the fitting data")


@dataclass(frozen=True)
class PlattCalibrator:
    """Logistic map on logits: c(p) = sigmoid(a * logit(p) + b)."""

    a: float
    b: float

    def calibrate_many(self, p) -> np.ndarray:
        p = _check_probs(p)
        z = _exact_logit(p)
        with np.errstate(invalid="ignore"):
            arg = self.a * z + self.b
        # a * (+/-inf) is well-defined for a != 0; a == 0 maps endpoints to b.
        arg = np.where(np.isnan(arg), self.b, arg)
        return _sigmoid(arg)

    def calibrate(self, p: float) -> float:
        return float(self.calibrate_many(np.array([p]))[0])


@dataclass(frozen=True)
class TemperatureCalibrator:
    """Single-parameter logit scaling: c(p) = sigmoid(logit(p) / t), t > 0.

    t == 1 is the identity and is returned as such (the logit round trip
    would otherwise perturb values by an ulp).
    """

    t: float

    def __post_init__(self):
        if not (self.t > 0.0 and math.isfinite(self.t)):
            raise ValueError("temperature must be finite and > 0")

    def calibrate_many(self, p) -> np.ndarray:
        p = _check_probs(p)
        if self.t == 1.0:
            return p.copy()
        return _sigmoid(_exact_logit(p) / self.t)

    def calibrate(self, p: float) -> float:
        return float(self.calibrate_many(np.array([p]))[0])


@dataclass(frozen=True)
class IsotonicCalibrator:
    """Step function from pool-adjacent-violators: right-continuous lookup over
    the distinct fitted support, clamped to the end blocks."""

    breakpoints: np.ndarray
    values: np.ndarray

    def calibrate_many(self, p) -> np.ndarray:
        p = _check_probs(p)
        idx = np.searchsorted(self.breakpoints, p, side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        return self.values[idx]

    def calibrate(self, p: float) -> float:
        return float(self.calibrate_many(np.array([p]))[0])


@dataclass(frozen=True)
class HistogramCalibrator:
    """Equal-width binning: each bin maps to its empirical rate; empty bins
    borrow the nearest non-empty bin's value (bin-center distance, ties toward
    the lower bin)."""

    m: int
    values: tuple  # per-bin empirical rate, None where the bin was empty
    resolved: np.ndarray  # values with empty bins filled by the fallback rule

    def calibrate_many(self, p) -> np.ndarray:
        p = _check_probs(p)
        return self.resolved[bin_indices(p, self.m)]

    def calibrate(self, p: float) -> float:
        return float(self.calibrate_many(np.array([p]))[0])


@dataclass(frozen=True)
class BBQCalibrator:
    """Simplified Bayesian binning ensemble: equal-frequency binning models
    scored by their uniform-prior Bernoulli marginal likelihood, predictions
    averaged under the normalized scores."""

    edges: tuple        # per model: value-space bin edges (len = bins - 1)
    predictions: tuple  # per model: posterior-mean rate per bin
    weights: np.ndarray

    def calibrate_many(self, p) -> np.ndarray:
        p = _check_probs(p)
        out = np.zeros(len(p))
        for edges, preds, wt in zip(self.edges, self.predictions, self.weights):
            groups = np.searchsorted(np.asarray(edges), p, side="right")
            out += wt * np.asarray(preds)[groups]
        return out

    def calibrate(self, p: float) -> float:
        return float(self.calibrate_many(np.array([p]))[0])


def fit_platt(d: CalibrationDataset, clip: float = LOGIT_CLIP) -> PlattCalibrator:
    """Fit (a, b) by damped Newton on the mean NLL of sigmoid(a*z + b), with
    the classic smoothed targets y+ = (N+ + 1)/(N+ + 2), y- = 1/(N- + 2)."""
    _require_both_classes(d, "platt scaling")
    z = to_logit(d.probs, clip)
    n_pos = int(np.count_nonzero(d.labels == 1))
    n_neg = len(d) - n_pos
    t_pos = (n_pos + 1.0) / (n_pos + 2.0)
    t_neg = 1.0 / (n_neg + 2.0)
    t = np.where(d.labels == 1, t_pos, t_neg)

    def nll(a: float, b: float) -> float:
        s = _sigmoid(a * z + b)
        s = np.clip(s, 1e-300, 1.0 - 1e-16)
        return float(-np.mean(t * np.log(s) + (1.0 - t) * np.log(1.0 - s)))

    a, b = 1.0, 0.0
    for _ in range(100):
        s = _sigmoid(a * z + b)
        r = s - t
        g_a = float(np.mean(r * z))
        g_b = float(np.mean(r))
        if math.hypot(g_a, g_b) < 1e-10:
            break
        v = s * (1.0 - s)
        h_aa = float(np.mean(v * z * z))
        h_ab = float(np.mean(v * z))
        h_bb = float(np.mean(v))
        det = h_aa * h_bb - h_ab * h_ab
        if det <= 1e-300:
            step_a, step_b = -g_a, -g_b
        else:
            step_a = -(g_a * h_bb - g_b * h_ab) / det
            step_b = -(g_b * h_aa - g_a * h_ab) / det
        base = nll(a, b)
        scale = 1.0
        for _ in range(60):
            na, nb = a + scale * step_a, b + scale * step_b
            if nll(na, nb) <= base:
                a, b = na, nb
                break
            scale *= 0.5
        else:
            break
    return PlattCalibrator(a=float(a), b=float(b))


def fit_temperature(d: CalibrationDataset, clip: float = LOGIT_CLIP) -> TemperatureCalibrator:
    """Fit t > 0 by golden-section search on ln t over [ln 0.05, ln 20],
    minimizing the mean NLL of sigmoid(z / t)."""
    _require_both_classes(d, "temperature scaling")
    z = to_logit(d.probs, clip)
    y = d.labels.astype(np.float64)

    def nll(u: float) -> float:
        s = np.clip(_sigmoid(z / math.exp(u)), 1e-300, 1.0 - 1e-16)
        return float(-np.mean(y * np.log(s) + (1.0 - y) * np.log(1.0 - s)))

    lo, hi = math.log(0.05), math.log(20.0)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    e = lo + invphi * (hi - lo)
    fc, fe = nll(c), nll(e)
    while hi - lo > 1e-8:
        if fc <= fe:
            hi, e, fe = e, c, fc
            c = hi - invphi * (hi - lo)
            fc = nll(c)
        else:
            lo, c, fc = c, e, fe
            e = lo + invphi * (hi - lo)
            fe = nll(e)
    return TemperatureCalibrator(t=math.exp((lo + hi) / 2.0))


def pav_fit(x, y, w=None) -> IsotonicCalibrator:
    """Weighted least-squares monotone fit by pool-adjacent-violators.

    Points sharing an x value are pre-merged by weighted averaging; the result
    maps each distinct x to its block value (non-decreasing).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("isotonic fit requires at least one point")
    order = np.argsort(x, kind="mergesort")
    xs, ys, ws = x[order], y[order], w[order]
    ux, inverse = np.unique(xs, return_inverse=True)
    wm = np.bincount(inverse, weights=ws)
    ym = np.bincount(inverse, weights=ws * ys) / wm
    # stack of blocks [value, weight, size]; the prefix below the top is
    # always isotonic, so each new point only merges backward
    values: list[float] = []
    weights: list[float] = []
    sizes: list[int] = []
    for v, wt in zip(ym, wm):
        values.append(float(v))
        weights.append(float(wt))
        sizes.append(1)
        while len(values) >= 2 and values[-2] > values[-1]:
            v2, w2, s2 = values.pop(), weights.pop(), sizes.pop()
            total = weights[-1] + w2
            values[-1] = (values[-1] * weights[-1] + v2 * w2) / total
            weights[-1] = total
            sizes[-1] += s2
    fitted = np.repeat(values, sizes)
    return IsotonicCalibrator(breakpoints=ux, values=fitted)


def fit_isotonic(d: CalibrationDataset) -> IsotonicCalibrator:
    return pav_fit(d.probs, d.labels)


def fit_histogram(d: CalibrationDataset, m: int = 10) -> HistogramCalibrator:
    if m < 1:
        raise ValueError("bin count must be >= 1")
    bins = bin_reliability(d, m)
    values = tuple(b.empirical for b in bins)
    filled = [i for i, v in enumerate(values) if v is not None]
    centers = (np.arange(m) + 0.5) / m
    resolved = np.empty(m)
    for i in range(m):
        if values[i] is not None:
            resolved[i] = values[i]
        else:
            j = filled[int(np.argmin(np.abs(centers[filled] - centers[i])))]
            resolved[i] = values[j]
    return HistogramCalibrator(m=m, values=values, resolved=resolved)


def _bbq_candidate_counts(n: int) -> range:
    lo = max(2, math.isqrt(n) // 2)
    t = math.isqrt(4 * n)
    hi = t if t * t == 4 * n else t + 1
    return range(lo, max(lo, hi) + 1)


def _bbq_cuts(n: int, b: int) -> list[int]:
    return [(j * n) // b for j in range(1, b)]


def fit_bbq(d: CalibrationDataset) -> BBQCalibrator:
    """Fit the equal-frequency binning ensemble.

    Candidate bin counts span [max(2, floor(sqrt(n)/2)), ceil(2*sqrt(n))].
    Groups split the sorted predictions at index cuts floor(j*n/b); each group
    scores B(n1+1, n0+1) under a uniform prior and predicts the posterior mean
    (n1+1)/(n1+n0+2). Model weights normalize the per-model score products
    (computed in log space). Lookup edges are midpoints between the boundary
    predictions, so empty groups (possible when b > n) are never selected.
    """
    order = np.argsort(d.probs, kind="mergesort")
    ps = d.probs[order]
    ys = d.labels[order]
    n = len(d)
    cum_pos = np.concatenate(([0], np.cumsum(ys == 1)))
    all_edges, all_preds, log_scores = [], [], []
    for b in _bbq_candidate_counts(n):
        cuts = _bbq_cuts(n, b)
        bounds = [0] + cuts + [n]
        edges, preds = [], []
        score = 0.0
        for g in range(b):
            lo_i, hi_i = bounds[g], bounds[g + 1]
            n1 = int(cum_pos[hi_i] - cum_pos[lo_i])
            n0 = (hi_i - lo_i) - n1
            score += math.lgamma(n1 + 1) + math.lgamma(n0 + 1) - math.lgamma(n1 + n0 + 2)
            preds.append((n1 + 1.0) / (n1 + n0 + 2.0))
        for c in cuts:
            if c <= 0:
                edges.append(-math.inf)
            elif c >= n:
                edges.append(math.inf)
            else:
                edges.append((float(ps[c - 1]) + float(ps[c])) / 2.0)
        all_edges.append(tuple(edges))
        all_preds.append(tuple(preds))
        log_scores.append(score)
    log_scores = np.array(log_scores)
    shifted = np.exp(log_scores - log_scores.max())
    weights = shifted / shifted.sum()
    return BBQCalibrator(edges=tuple(all_edges), predictions=tuple(all_preds), weights=weights)


def calibrate_baseline(model, p: float) -> float:
    """Apply any fitted calibrator (baseline or forecal) to one probability."""
    return model.calibrate(p)


def calibrate_baseline_many(model, p) -> np.ndarray:
    return model.calibrate_many(p)
