"""Shared test fixtures and independent oracles.

Every oracle here deliberately re-derives its quantity from first principles
(plain loops, exhaustive enumeration, exact rational arithmetic, grid search)
so the production code is checked against something it shares no code with.
"""

import math
from fractions import Fraction

import numpy as np

from forecal.data import CalibrationDataset


def random_dataset(rng: np.random.Generator, n: int | None = None,
                   allow_single_class: bool = False) -> CalibrationDataset:
    n = n or int(rng.integers(1, 200))
    probs = rng.random(n)
    labels = (rng.random(n) < probs).astype(np.int64)
    if not allow_single_class and n >= 2 and len(np.unique(labels)) == 1:
        labels[0] = 1 - labels[0]
    return CalibrationDataset(probs, labels)


def ece_oracle(probs, labels, m: int) -> float:
    """Straight loop over records: assign bins, average, weight by bin size / n."""
    buckets = [[] for _ in range(m)]
    for p, y in zip(probs, labels):
        i = min(int(p * m), m - 1)
        buckets[i].append((float(p), int(y)))
    n = len(probs)
    total = 0.0
    for bucket in buckets:
        if bucket:
            mean_p = sum(p for p, _ in bucket) / len(bucket)
            mean_y = sum(y for _, y in bucket) / len(bucket)
            total += (len(bucket) / n) * abs(mean_y - mean_p)
    return total


def auc_pairwise_oracle(probs, labels) -> float | None:
    """O(n^2) enumeration over (positive, negative) pairs with tie credit 1/2."""
    pos = [float(p) for p, y in zip(probs, labels) if y == 1]
    neg = [float(p) for p, y in zip(probs, labels) if y == 0]
    if not pos or not neg:
        return None
    score = 0.0
    for pp in pos:
        for pn in neg:
            if pp > pn:
                score += 1.0
            elif pp == pn:
                score += 0.5
    return score / (len(pos) * len(neg))


def isotonic_bruteforce(y, w) -> np.ndarray:
    """Exact monotone least squares by enumerating all 2^(n-1) consecutive-block
    partitions and keeping the best whose block means are non-decreasing."""
    y = [float(v) for v in y]
    w = [float(v) for v in w]
    n = len(y)
    best_cost = math.inf
    best_fit = None
    for mask in range(1 << (n - 1)):
        bounds = [0] + [i + 1 for i in range(n - 1) if mask & (1 << i)] + [n]
        means = []
        cost = 0.0
        ok = True
        prev = -math.inf
        for a, b in zip(bounds[:-1], bounds[1:]):
            ws = sum(w[a:b])
            mean = sum(wi * yi for wi, yi in zip(w[a:b], y[a:b])) / ws
            if mean < prev - 1e-15:
                ok = False
                break
            prev = mean
            means.append((a, b, mean))
            cost += sum(wi * (yi - mean) ** 2 for wi, yi in zip(w[a:b], y[a:b]))
        if ok and cost < best_cost:
            best_cost = cost
            fit = np.empty(n)
            for a, b, mean in means:
                fit[a:b] = mean
            best_fit = fit
    return best_fit


def platt_grid_oracle(z, targets, rounds: int = 30) -> tuple[float, float]:
    """2-D mean-NLL minimization by iteratively refined grid search."""
    z = np.asarray(z)
    targets = np.asarray(targets)

    def nll(a, b):
        s = 1.0 / (1.0 + np.exp(-(a * z + b)))
        s = np.clip(s, 1e-300, 1 - 1e-16)
        return float(-np.mean(targets * np.log(s) + (1 - targets) * np.log(1 - s)))

    a_lo, a_hi, b_lo, b_hi = -10.0, 10.0, -10.0, 10.0
    best = (1.0, 0.0)
    for _ in range(rounds):
        a_grid = np.linspace(a_lo, a_hi, 21)
        b_grid = np.linspace(b_lo, b_hi, 21)
        scores = [(nll(a, b), a, b) for a in a_grid for b in b_grid]
        _, a_best, b_best = min(scores)
        best = (a_best, b_best)
        a_span = (a_hi - a_lo) * 0.2
        b_span = (b_hi - b_lo) * 0.2
        a_lo, a_hi = a_best - a_span / 2, a_best + a_span / 2
        b_lo, b_hi = b_best - b_span / 2, b_best + b_span / 2
    return best


def bbq_exhaustive_oracle(probs, labels):
    """Exact-rational re-derivation of the binning ensemble: every candidate
    bin count, index cuts floor(j*n/b), per-bin score n1! n0! / (n1+n0+1)!,
    weights by direct normalization. Returns (log_scores, weights, predict)."""
    order = sorted(range(len(probs)), key=lambda i: probs[i])
    ps = [float(probs[i]) for i in order]
    ys = [int(labels[i]) for i in order]
    n = len(ps)
    lo = max(2, math.isqrt(n) // 2)
    t = math.isqrt(4 * n)
    hi = t if t * t == 4 * n else t + 1
    hi = max(lo, hi)
    models = []
    scores = []
    for b in range(lo, hi + 1):
        cuts = [(j * n) // b for j in range(1, b)]
        bounds = [0] + cuts + [n]
        score = Fraction(1)
        preds = []
        for a, c in zip(bounds[:-1], bounds[1:]):
            n1 = sum(ys[a:c])
            n0 = (c - a) - n1
            score *= Fraction(math.factorial(n1) * math.factorial(n0),
                              math.factorial(n1 + n0 + 1))
            preds.append(Fraction(n1 + 1, n1 + n0 + 2))
        edges = []
        for c in cuts:
            if c <= 0:
                edges.append(-math.inf)
            elif c >= n:
                edges.append(math.inf)
            else:
                edges.append((ps[c - 1] + ps[c]) / 2.0)
        models.append((edges, preds))
        scores.append(score)
    total = sum(scores)
    weights = [s / total for s in scores]

    def predict(p: float) -> float:
        # values sitting exactly on an edge belong to the right bin
        acc = Fraction(0)
        for (edges, preds), wt in zip(models, weights):
            g = 0
            for e in edges:
                if p >= e:
                    g += 1
            acc += wt * preds[g]
        return float(acc)

    log_scores = [math.log(s.numerator) - math.log(s.denominator) for s in scores]
    return log_scores, [float(w) for w in weights], predict
