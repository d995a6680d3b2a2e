import numpy as np
import pytest

from forecal.calibrator import (
    ForecalConfig,
    RegressionSample,
    build_regression_dataset,
    fit_forecal,
)
from forecal.data import CalibrationDataset
from forecal.forest import ForestParams
from forecal.metrics import auc, ece
from forecal.synthetic import DistortionSpec, generate


def small_config(seed=0, **forest_kw):
    forest_kw.setdefault("n_trees", 30)
    forest_kw.setdefault("seed", seed)
    return ForecalConfig(n_bins=10, n_bootstrap=20, forest=ForestParams(**forest_kw), seed=seed)


def test_build_dataset_singleton_bins():
    d = CalibrationDataset([0.1, 0.9], [0, 1])
    rows = build_regression_dataset(d, 2, 3, seed=1)
    assert len(rows) == 6
    assert rows[:3] == [RegressionSample(0.1, 0.0, 1)] * 3
    assert rows[3:] == [RegressionSample(0.9, 1.0, 1)] * 3


def test_build_dataset_skips_empty_bins():
    d = CalibrationDataset([0.1], [0])
    rows = build_regression_dataset(d, 2, 5, seed=0)
    assert rows == [RegressionSample(0.1, 0.0, 1)] * 5


def test_build_dataset_two_element_bin_outcomes():
    d = CalibrationDataset([0.2, 0.2, 0.8, 0.8], [0, 1, 1, 1])
    rows = build_regression_dataset(d, 2, 50, seed=3)
    assert len(rows) == 100
    assert all(r.weight == 2 for r in rows)
    assert all(r.mu_p in (0.2, 0.8) for r in rows)
    lower_mu_y = {r.mu_y for r in rows if r.mu_p == 0.2}
    assert lower_mu_y <= {0.0, 0.5, 1.0}


def test_build_dataset_size_contract():
    rng = np.random.default_rng(10)
    for _ in range(10):
        n = int(rng.integers(1, 400))
        probs = rng.random(n)
        labels = (rng.random(n) < probs).astype(int)
        d = CalibrationDataset(probs, labels)
        n_bins = int(rng.integers(1, 20))
        n_boot = int(rng.integers(1, 8))
        rows = build_regression_dataset(d, n_bins, n_boot, seed=int(rng.integers(0, 999)))
        occupied = len(np.unique(np.minimum((probs * n_bins).astype(int), n_bins - 1)))
        assert len(rows) == n_boot * occupied


def test_build_dataset_deterministic():
    d = CalibrationDataset(np.linspace(0.01, 0.99, 60), [0, 1] * 30)
    a = build_regression_dataset(d, 10, 7, seed=42)
    b = build_regression_dataset(d, 10, 7, seed=42)
    assert a == b


def test_bootstrap_mean_matches_bin_rate():
    # the resample empirical rate is unbiased for the bin rate
    labels = np.array([1, 0, 0, 1, 0])
    d = CalibrationDataset([0.2, 0.21, 0.22, 0.23, 0.24], labels)
    rows = build_regression_dataset(d, 10, 10000, seed=5)
    mu_y = np.array([r.mu_y for r in rows])
    rate = labels.mean()
    sigma2 = np.mean((labels - rate) ** 2)
    se = np.sqrt(sigma2 / len(labels) / len(rows))
    assert abs(mu_y.mean() - rate) < 3 * se


def test_fit_pure_bins_exact():
    d = CalibrationDataset([0.1, 0.9], [0, 1])
    cal = fit_forecal(d, ForecalConfig(n_bins=2, n_bootstrap=10, forest=ForestParams(seed=6), seed=6))
    assert cal.calibrate(0.1) == 0.0
    assert cal.calibrate(0.9) == 1.0
    assert cal.calibrate(0.0) == 0.0


def test_fit_all_negative_labels():
    d = CalibrationDataset([0.2, 0.5, 0.8], [0, 0, 0])
    cal = fit_forecal(d, small_config())
    assert cal.calibrate(0.7) == 0.0
    assert cal.calibrate(0.0) == 0.0


def test_fit_deterministic():
    d, _ = generate(400, DistortionSpec("overconfident-sigmoid", 3.0), seed=2)
    c1 = fit_forecal(d, small_config(seed=9))
    c2 = fit_forecal(d, small_config(seed=9))
    grid = np.linspace(0, 1, 501)
    assert np.array_equal(c1.calibrate_many(grid), c2.calibrate_many(grid))


def test_calibrate_domain_check():
    d = CalibrationDataset([0.1, 0.9], [0, 1])
    cal = fit_forecal(d, small_config())
    with pytest.raises(ValueError):
        cal.calibrate(1.3)
    with pytest.raises(ValueError):
        cal.calibrate(-0.1)


def test_output_in_unit_interval_and_monotone():
    rng = np.random.default_rng(12)
    grid = np.linspace(0, 1, 1001)
    for seed in range(5):
        n = int(rng.integers(30, 600))
        probs = rng.random(n)
        labels = (rng.random(n) < probs**2).astype(int)
        cal = fit_forecal(CalibrationDataset(probs, labels), small_config(seed=seed))
        out = cal.calibrate_many(grid)
        assert out.min() >= 0.0 and out.max() <= 1.0
        assert np.all(np.diff(out) >= 0.0)


def test_rank_preservation_only_adds_ties():
    d, _ = generate(800, DistortionSpec("overconfident-sigmoid", 3.0), seed=7)
    cal = fit_forecal(d, small_config(seed=7))
    out = cal.calibrate_many(d.probs)
    order = np.argsort(d.probs, kind="mergesort")
    assert np.all(np.diff(out[order]) >= 0.0)
    # monotone map can only shrink |AUC| toward ties, never invert pairs
    before = auc(d)
    after = auc(CalibrationDataset(out, d.labels))
    assert abs(after - before) < 0.02


def test_auc_identical_where_map_is_injective():
    d, _ = generate(800, DistortionSpec("overconfident-sigmoid", 3.0), seed=7)
    cal = fit_forecal(d, small_config(seed=7))
    out = cal.calibrate_many(d.probs)
    # one representative per output plateau: the restricted map is injective
    _, idx = np.unique(out, return_index=True)
    sub = d.subset(idx)
    assert len(np.unique(sub.labels)) == 2
    assert auc(CalibrationDataset(out[idx], sub.labels)) == auc(sub)


def test_calibrate_with_features_zero_extras_identical():
    d = CalibrationDataset([0.1, 0.5, 0.9], [0, 1, 1])
    cal = fit_forecal(d, small_config())
    assert cal.calibrate_with_features(0.4, []) == cal.calibrate(0.4)


def test_calibrate_with_features_monotone_in_p():
    rng = np.random.default_rng(3)
    n = 400
    probs = rng.random(n)
    extra = rng.normal(size=(n, 2))
    labels = (rng.random(n) < probs).astype(int)
    cal = fit_forecal(CalibrationDataset(probs, labels), small_config(seed=4), extra=extra)
    fixed = np.array([0.3, -0.2])
    grid = np.linspace(0, 1, 301)
    out = cal.calibrate_with_features_many(grid, np.tile(fixed, (len(grid), 1)))
    assert np.all(np.diff(out) >= 0.0)


def test_calibrate_with_features_dimension_mismatch():
    rng = np.random.default_rng(3)
    probs = rng.random(50)
    labels = (rng.random(50) < probs).astype(int)
    cal = fit_forecal(CalibrationDataset(probs, labels), small_config(), extra=rng.normal(size=(50, 2)))
    with pytest.raises(ValueError):
        cal.calibrate_with_features(0.5, [1.0])
    with pytest.raises(ValueError):
        cal.calibrate(0.5)


def _segment_data(rng, n):
    """Two sub-populations with opposite distortions; the segment id is the
    informative extra feature."""
    seg = (rng.random(n) < 0.5).astype(float)
    q = rng.beta(2.0, 2.0, size=n)
    k = np.where(seg == 0, 3.0, 1.0 / 3.0)
    p = q**k / (q**k + (1 - q) ** k)
    y = (rng.random(n) < q).astype(int)
    return p, y, seg


def test_informative_extras_beat_permuted():
    wins = []
    for seed in range(10):
        rng = np.random.default_rng(1000 + seed)
        p, y, seg = _segment_data(rng, 3000)
        pt, yt, st = _segment_data(rng, 3000)
        cal_d = CalibrationDataset(p, y)
        cfg = small_config(seed=seed)
        informative = fit_forecal(cal_d, cfg, extra=seg.reshape(-1, 1))
        permuted = fit_forecal(cal_d, cfg, extra=rng.permutation(seg).reshape(-1, 1))
        test_extra = st.reshape(-1, 1)
        ece_inf = ece(CalibrationDataset(
            informative.calibrate_with_features_many(pt, test_extra), yt), 10)
        ece_perm = ece(CalibrationDataset(
            permuted.calibrate_with_features_many(pt, test_extra), yt), 10)
        wins.append(ece_inf - ece_perm)
    assert np.median(wins) <= 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        ForecalConfig(n_bins=0)
    with pytest.raises(ValueError):
        ForecalConfig(n_bootstrap=0)
