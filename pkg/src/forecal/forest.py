"""Weighted regression trees with per-feature monotonicity constraints, bagged.

Monotonicity is enforced by bound propagation: every node carries a [lo, hi]
interval for admissible leaf values. A split on a constrained feature computes
mid = (mean_left + mean_right) / 2 (clamped into the node interval so child
intervals stay non-empty), hands the low side [lo, mid] and the high side
[mid, hi], and rejects candidate splits whose child means are ordered against
the constraint. Leaf values clamp into their interval, so every leaf on the
low side is <= mid <= every leaf on the high side and the tree is weakly
monotone by induction; averaging monotone trees keeps the ensemble monotone.

Ensemble predictions are clipped into the training-target range recorded at
fit time: the mean of in-range leaf values can drift past the hull by one ulp
in floating point, and the range guarantee here is exact.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ForestParams:
    """Ensemble knobs: tree count, leaf size floor, depth cap (None = unlimited),
    bagging toggle, and the seed from which per-tree streams are derived."""

    n_trees: int = 200
    min_samples_leaf: int = 5
    max_depth: int | None = None
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class RegressionTree:
    """Flattened node arrays; feature == -1 marks a leaf. lower/upper are the
    value bounds that were active at each node during fitting."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not active.any():
                break
            rows = np.nonzero(active)[0]
            cur = node[rows]
            go_left = X[rows, feat[rows]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
        return self.value[node]


@dataclass
class MonotonicForest:
    """Bagged monotone regression trees; prediction is the arithmetic mean of
    tree outputs, clipped into the training-target hull."""

    trees: list[RegressionTree]
    params: ForestParams
    constraints: tuple[int, ...]
    y_min: float
    y_max: float

    @property
    def n_features(self) -> int:
        return len(self.constraints)

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        if not np.all(np.isfinite(X)):
            raise ValueError("probe points must be finite")
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict_many(X)
        return np.clip(total / len(self.trees), self.y_min, self.y_max)

    def predict(self, x) -> float:
        return float(self.predict_many(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


@dataclass(frozen=True)
class MonotoneViolation:
    """First adjacent grid pair whose predictions break the constraint."""

    index: int
    x_low: float
    x_high: float
    y_low: float
    y_high: float


class _TreeBuilder:
    """Grows one tree. Rows are carried in per-feature sorted order so each
    node's split scan is a linear pass; zero-weight rows (out-of-bag under
    bootstrap) stay in the tree and count toward min_samples_leaf but not
    toward gains or leaf values."""

    def __init__(self, X, y, w, constraints, params):
        self.X = X
        self.y = y
        self.w = w
        self.constraints = constraints
        self.min_leaf = params.min_samples_leaf
        self.max_depth = params.max_depth
        self.n, self.d = X.shape
        self.nodes_feature: list[int] = []
        self.nodes_threshold: list[float] = []
        self.nodes_left: list[int] = []
        self.nodes_right: list[int] = []
        self.nodes_value: list[float] = []
        self.nodes_lower: list[float] = []
        self.nodes_upper: list[float] = []
        self._member = np.zeros(self.n, dtype=bool)

    def build(self) -> RegressionTree:
        root_sorted = [np.argsort(self.X[:, f], kind="stable") for f in range(self.d)]
        root = self._new_node()
        stack = [(root, root_sorted, -np.inf, np.inf, 0)]
        while stack:
            node_id, sorted_ids, lo, hi, depth = stack.pop()
            ids = sorted_ids[0]
            wn = self.w[ids]
            yn = self.y[ids]
            wsum = float(wn.sum())
            mean = float(np.dot(wn, yn) / wsum)
            value = min(max(mean, lo), hi)
            sse = float(np.dot(wn, yn * yn) - wsum * mean * mean)
            splittable = (
                len(ids) >= 2 * self.min_leaf
                and sse > 0.0
                and (self.max_depth is None or depth < self.max_depth)
            )
            best = self._best_split(sorted_ids, sse) if splittable else None
            if best is None:
                self._set_leaf(node_id, value, lo, hi)
                continue
            f, threshold, mean_l, mean_r = best
            if self.constraints[f] == 0:
                lo_l, hi_l, lo_r, hi_r = lo, hi, lo, hi
            else:
                mid = min(max((mean_l + mean_r) / 2.0, lo), hi)
                if self.constraints[f] > 0:
                    lo_l, hi_l, lo_r, hi_r = lo, mid, mid, hi
                else:
                    lo_l, hi_l, lo_r, hi_r = mid, hi, lo, mid
            left_sorted, right_sorted = self._partition(sorted_ids, f, threshold)
            left_id = self._new_node()
            right_id = self._new_node()
            self.nodes_feature[node_id] = f
            self.nodes_threshold[node_id] = threshold
            self.nodes_left[node_id] = left_id
            self.nodes_right[node_id] = right_id
            self.nodes_value[node_id] = value
            self.nodes_lower[node_id] = lo
            self.nodes_upper[node_id] = hi
            stack.append((right_id, right_sorted, lo_r, hi_r, depth + 1))
            stack.append((left_id, left_sorted, lo_l, hi_l, depth + 1))
        return RegressionTree(
            feature=np.array(self.nodes_feature, dtype=np.int64),
            threshold=np.array(self.nodes_threshold, dtype=np.float64),
            left=np.array(self.nodes_left, dtype=np.int64),
            right=np.array(self.nodes_right, dtype=np.int64),
            value=np.array(self.nodes_value, dtype=np.float64),
            lower=np.array(self.nodes_lower, dtype=np.float64),
            upper=np.array(self.nodes_upper, dtype=np.float64),
        )

    def _new_node(self) -> int:
        self.nodes_feature.append(-1)
        self.nodes_threshold.append(np.nan)
        self.nodes_left.append(-1)
        self.nodes_right.append(-1)
        self.nodes_value.append(0.0)
        self.nodes_lower.append(-np.inf)
        self.nodes_upper.append(np.inf)
        return len(self.nodes_feature) - 1

    def _set_leaf(self, node_id, value, lo, hi):
        self.nodes_value[node_id] = value
        self.nodes_lower[node_id] = lo
        self.nodes_upper[node_id] = hi

    def _best_split(self, sorted_ids, sse_node):
        best_gain = 0.0
        best = None
        m = self.min_leaf
        for f in range(self.d):
            ids = sorted_ids[f]
            k = len(ids)
            xs = self.X[ids, f]
            ws = self.w[ids]
            ys = self.y[ids]
            cw = np.cumsum(ws)
            cwy = np.cumsum(ws * ys)
            cwyy = np.cumsum(ws * ys * ys)
            wl = cw[:-1]
            wr = cw[-1] - wl
            counts_l = np.arange(1, k)
            ok = (xs[:-1] != xs[1:]) & (counts_l >= m) & (k - counts_l >= m) & (wl > 0) & (wr > 0)
            if not ok.any():
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                mean_l = cwy[:-1] / wl
                mean_r = (cwy[-1] - cwy[:-1]) / wr
                sse_l = cwyy[:-1] - wl * mean_l * mean_l
                sse_r = (cwyy[-1] - cwyy[:-1]) - wr * mean_r * mean_r
            c = self.constraints[f]
            if c > 0:
                ok &= mean_l <= mean_r
            elif c < 0:
                ok &= mean_l >= mean_r
            gain = np.where(ok, sse_node - sse_l - sse_r, -np.inf)
            i = int(np.argmax(gain))
            if gain[i] > best_gain:
                threshold = (xs[i] + xs[i + 1]) / 2.0
                if threshold >= xs[i + 1]:
                    threshold = xs[i]
                best_gain = float(gain[i])
                best = (f, float(threshold), float(mean_l[i]), float(mean_r[i]))
        return best

    def _partition(self, sorted_ids, f, threshold):
        ids = sorted_ids[f]
        go_left = self.X[ids, f] <= threshold
        member = self._member
        member[ids[go_left]] = True
        left_sorted = []
        right_sorted = []
        for g in range(self.d):
            mask = member[sorted_ids[g]]
            left_sorted.append(sorted_ids[g][mask])
            right_sorted.append(sorted_ids[g][~mask])
        member[ids[go_left]] = False
        return left_sorted, right_sorted


def fit_forest(X, y, w, constraints, params: ForestParams) -> MonotonicForest:
    """Fit a bagged ensemble of monotone regression trees.

    When bootstrap is on, each tree draws a multinomial resample of size n
    with row probability proportional to ``w`` (stream seeded by
    (params.seed, tree_index)); draw counts become that tree's fitting
    weights, so identical inputs always yield identical forests. With
    bootstrap off, every tree fits the full data under ``w`` directly.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n, d = X.shape
    if n < 1:
        raise ValueError("at least one sample is required")
    if len(y) != n or len(w) != n:
        raise ValueError("X, y, and w must agree on the number of rows")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise ValueError("X and y must be finite")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("sample weights must be finite and > 0")
    constraints = tuple(int(c) for c in constraints)
    if len(constraints) != d:
        raise ValueError(f"constraint vector length {len(constraints)} != feature count {d}")
    if any(c not in (-1, 0, 1) for c in constraints):
        raise ValueError("constraint directions must be -1, 0, or +1")
    prob = w / w.sum()
    trees = []
    for t in range(params.n_trees):
        if params.bootstrap:
            rng = np.random.default_rng([params.seed, t])
            draws = rng.choice(n, size=n, replace=True, p=prob)
            tw = np.bincount(draws, minlength=n).astype(np.float64)
        else:
            tw = w
        trees.append(_TreeBuilder(X, y, tw, constraints, params).build())
    return MonotonicForest(trees, params, constraints, float(y.min()), float(y.max()))


def check_monotone(forest: MonotonicForest, feature: int, grid,
                   others=None, tol: float = 1e-12) -> MonotoneViolation | None:
    """Probe the forest along ``grid`` (sorted ascending) in one constrained
    feature, holding the other coordinates at ``others``; returns None when
    the constraint holds within ``tol``, else the first violating pair.
    """
    d = forest.n_features
    if not (0 <= feature < d):
        raise ValueError(f"feature index {feature} out of range for d={d}")
    direction = forest.constraints[feature]
    if direction == 0:
        raise ValueError(f"feature {feature} is unconstrained; nothing to check")
    grid = np.asarray(grid, dtype=np.float64)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted ascending")
    base = np.zeros(d) if others is None else np.asarray(others, dtype=np.float64)
    if len(base) != d:
        raise ValueError(f"others must supply {d} coordinates")
    X = np.tile(base, (len(grid), 1))
    X[:, feature] = grid
    preds = forest.predict_many(X)
    gaps = (preds[1:] - preds[:-1]) * direction
    bad = np.nonzero(gaps < -tol)[0]
    if len(bad) == 0:
        return None
    i = int(bad[0])
    return MonotoneViolation(i, float(grid[i]), float(grid[i + 1]),
                             float(preds[i]), float(preds[i + 1]))
