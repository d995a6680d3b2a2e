"""Command-line harness: fit/apply/evaluate calibrators, export reliability
diagrams, generate synthetic prediction files, and run the multi-seed
benchmark that reports per-method median ECE/AUC percent changes.

Exit codes: 0 success, 1 IO/data error, 2 usage error.
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import fit_bbq, fit_histogram, fit_isotonic, fit_platt, fit_temperature
from .calibrator import ForecalConfig, fit_forecal
from .data import (
    CalibrationDataset,
    DataFormatError,
    SplitSpec,
    load_calibrated_csv,
    load_csv,
    partition,
    save_calibrated_csv,
    save_csv,
)
from .forest import ForestParams
from .metrics import EvalRow, bin_reliability, evaluate_pair, reliability_csv_text
from .serialize import ModelFormatError, load_model, method_tag, save_model
from .synthetic import KINDS, DistortionSpec, generate

METHODS = ("platt", "temperature", "isotonic", "histogram", "bbq", "forecal")

# Medians reported by the original full-scale evaluation (43 UCI datasets,
# DNN base models); printed for orientation, not reproduced at desk scale.
REFERENCE_FOOTER = (
    "reference (full-scale UCI/DNN evaluation): "
    "forecal ece_delta -75.93 ± 0.18 %, auc_delta -0.65 ± 0.01 %"
)


def _fit_method(name: str, d: CalibrationDataset, *, bins: int, bootstrap: int,
                trees: int, min_leaf: int, seed: int):
    if name == "platt":
        return fit_platt(d)
    if name == "temperature":
        return fit_temperature(d)
    if name == "isotonic":
        return fit_isotonic(d)
    if name == "histogram":
        return fit_histogram(d, bins)
    if name == "bbq":
        return fit_bbq(d)
    if name == "forecal":
        config = ForecalConfig(
            n_bins=bins,
            n_bootstrap=bootstrap,
            forest=ForestParams(n_trees=trees, min_samples_leaf=min_leaf, seed=seed),
            seed=seed,
        )
        return fit_forecal(d, config)
    raise ValueError(f"unknown method {name!r}")


def _fit_summary(name: str, model, n: int) -> str:
    if name == "platt":
        return f"method=platt n={n} a={model.a:.6g} b={model.b:.6g}"
    if name == "temperature":
        return f"method=temperature n={n} t={model.t:.6g}"
    if name == "isotonic":
        return f"method=isotonic n={n} blocks={len(np.unique(model.values))}"
    if name == "histogram":
        filled = sum(1 for v in model.values if v is not None)
        return f"method=histogram n={n} bins={model.m} filled={filled}"
    if name == "bbq":
        best = int(np.argmax(model.weights))
        return (f"method=bbq n={n} models={len(model.weights)} "
                f"top_weight={float(model.weights[best]):.4f}")
    rows = sum(len(t.feature) for t in model.forest.trees)
    return (f"method=forecal n={n} bins={model.config.n_bins} "
            f"bootstrap={model.config.n_bootstrap} trees={model.forest.params.n_trees} "
            f"nodes={rows}")


def _num(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def eval_csv_text(rows: list[EvalRow]) -> str:
    lines = ["method,ece_before,ece_after,ece_delta_pct,auc_before,auc_after,auc_delta_pct"]
    for r in rows:
        lines.append(",".join([
            r.method,
            _num(r.ece_before), _num(r.ece_after), _num(r.ece_delta_pct),
            _num(r.auc_before), _num(r.auc_after), _num(r.auc_delta_pct),
        ]))
    return "\n".join(lines) + "\n"


def _print_eval(row: EvalRow, n: int) -> None:
    def fmt(v, signed=False):
        if v is None:
            return "-"
        return f"{v:+.4f}" if signed else f"{v:.6f}"

    print(f"method={row.method} n={n}")
    print(f"ece_before={fmt(row.ece_before)} ece_after={fmt(row.ece_after)} "
          f"ece_delta_pct={fmt(row.ece_delta_pct, signed=True)}")
    print(f"auc_before={fmt(row.auc_before)} auc_after={fmt(row.auc_after)} "
          f"auc_delta_pct={fmt(row.auc_delta_pct, signed=True)}")


def run_fit(args) -> int:
    dataset = load_csv(args.input)
    model = _fit_method(
        args.method, dataset,
        bins=args.bins, bootstrap=args.bootstrap,
        trees=args.trees, min_leaf=args.min_leaf, seed=args.seed,
    )
    save_model(model, args.out)
    print(_fit_summary(args.method, model, len(dataset)))
    return 0


def run_apply(args) -> int:
    model = load_model(args.model)
    dataset = load_csv(args.input)
    p_cal = model.calibrate_many(dataset.probs)
    save_calibrated_csv(dataset, p_cal, args.out)
    print(f"wrote {args.out} ({len(dataset)} rows, method={method_tag(model)})")
    return 0


def run_evaluate(args) -> int:
    if args.model:
        model = load_model(args.model)
        dataset = load_csv(args.input)
        p_cal = model.calibrate_many(dataset.probs)
        name = method_tag(model)
    else:
        dataset, p_cal = load_calibrated_csv(args.input)
        name = "precalibrated"
    row = evaluate_pair(name, dataset.probs, p_cal, dataset.labels, args.ece_bins)
    _print_eval(row, len(dataset))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(eval_csv_text([row]))
    return 0


def run_reliability(args) -> int:
    dataset = load_csv(args.input)
    bins = bin_reliability(dataset, args.bins)
    text = reliability_csv_text(bins)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    if args.svg:
        from .plots import save_reliability_figure

        svg_path = str(Path(args.out).with_suffix(".svg"))
        save_reliability_figure(bins, svg_path, title=f"n={len(dataset)}, bins={args.bins}")
        print(f"wrote {svg_path}")
    return 0


def run_synth(args) -> int:
    spec = DistortionSpec(kind=args.kind, k=args.k, beta_a=args.beta_a, beta_b=args.beta_b)
    dataset, q = generate(args.n, spec, args.seed)
    save_csv(dataset, args.out, true_rates=q if args.with_q else None)
    print(f"wrote {args.out} ({args.n} rows, kind={args.kind}, k={args.k:g}, seed={args.seed})")
    return 0


@dataclass(frozen=True)
class BenchmarkConfig:
    """Everything one benchmark run depends on; identical configs produce
    byte-identical report CSVs regardless of the worker count."""

    methods: tuple
    n_seeds: int = 10
    base_seed: int = 0
    ece_bins: int = 10
    cal_fraction: float = 0.6
    dataset: CalibrationDataset | None = None
    synth: DistortionSpec | None = None
    synth_n: int = 0
    bins: int = 10
    bootstrap: int = 100
    trees: int = 200
    min_leaf: int = 5
    jobs: int = 1


def _benchmark_seed(task) -> list[EvalRow]:
    config, seed = task
    try:
        if config.synth is not None:
            dataset, _ = generate(config.synth_n, config.synth, seed)
        else:
            dataset = config.dataset
        cal, test = partition(dataset, SplitSpec(config.cal_fraction, seed))
        rows = []
        for name in config.methods:
            model = _fit_method(
                name, cal,
                bins=config.bins, bootstrap=config.bootstrap,
                trees=config.trees, min_leaf=config.min_leaf, seed=seed,
            )
            p_cal = model.calibrate_many(test.probs)
            rows.append(evaluate_pair(name, test.probs, p_cal, test.labels, config.ece_bins))
        return rows
    except Exception as exc:
        raise RuntimeError(f"benchmark seed {seed} failed: {exc}") from exc


def _median_and_se(values: list[float], rng: np.random.Generator) -> tuple[float | None, float | None]:
    """Median plus a bootstrap standard error of the median (1000 resamples)."""
    if not values:
        return None, None
    arr = np.asarray(values, dtype=np.float64)
    med = float(np.median(arr))
    if len(arr) == 1:
        return med, 0.0
    idx = rng.integers(0, len(arr), size=(1000, len(arr)))
    meds = np.median(arr[idx], axis=1)
    return med, float(np.std(meds, ddof=1))


def run_benchmark_config(config: BenchmarkConfig) -> tuple[list[dict], list[list[EvalRow]]]:
    """Run every seed, fit every method on the calibration side, score on the
    test side, and aggregate per-method medians; returns (summary rows,
    per-seed evaluation rows)."""
    tasks = [(config, config.base_seed + s) for s in range(config.n_seeds)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            per_seed = list(pool.map(_benchmark_seed, tasks))
    else:
        per_seed = [_benchmark_seed(t) for t in tasks]
    summary = []
    for mi, name in enumerate(config.methods):
        ece_deltas = [rows[mi].ece_delta_pct for rows in per_seed if rows[mi].ece_delta_pct is not None]
        auc_deltas = [rows[mi].auc_delta_pct for rows in per_seed if rows[mi].auc_delta_pct is not None]
        rng = np.random.default_rng([config.base_seed, 104729, mi])
        ece_med, ece_se = _median_and_se(ece_deltas, rng)
        auc_med, auc_se = _median_and_se(auc_deltas, rng)
        summary.append({
            "method": name,
            "median_ece_delta_pct": ece_med,
            "se_ece_delta_pct": ece_se,
            "median_auc_delta_pct": auc_med,
            "se_auc_delta_pct": auc_se,
        })
    return summary, per_seed


BENCHMARK_COLUMNS = ("method", "median_ece_delta_pct", "se_ece_delta_pct",
                     "median_auc_delta_pct", "se_auc_delta_pct")


def benchmark_csv_text(summary: list[dict]) -> str:
    lines = [",".join(BENCHMARK_COLUMNS)]
    for row in summary:
        lines.append(",".join([row["method"]] + [_num(row[c]) for c in BENCHMARK_COLUMNS[1:]]))
    return "\n".join(lines) + "\n"


def benchmark_table_text(summary: list[dict]) -> str:
    headers = BENCHMARK_COLUMNS
    cells = [headers]
    for row in summary:
        cells.append(tuple(
            [row["method"]] +
            ["-" if row[c] is None else f"{row[c]:.4f}" for c in headers[1:]]
        ))
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = []
    for r in cells:
        lines.append("  ".join(
            r[0].ljust(widths[0]) if i == 0 else r[i].rjust(widths[i])
            for i in range(len(headers))
        ))
    lines.append(REFERENCE_FOOTER)
    return "\n".join(lines) + "\n"


def run_benchmark(args) -> int:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    dataset = load_csv(args.input) if args.input else None
    synth = None
    if args.input is None:
        synth = DistortionSpec(kind=args.kind, k=args.k, beta_a=args.beta_a, beta_b=args.beta_b)
    config = BenchmarkConfig(
        methods=methods,
        n_seeds=args.seeds,
        base_seed=args.seed,
        ece_bins=args.ece_bins,
        cal_fraction=args.cal_fraction,
        dataset=dataset,
        synth=synth,
        synth_n=args.synth_n,
        bins=args.bins,
        bootstrap=args.bootstrap,
        trees=args.trees,
        min_leaf=args.min_leaf,
        jobs=args.jobs,
    )
    summary, _ = run_benchmark_config(config)
    sys.stdout.write(benchmark_table_text(summary))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(benchmark_csv_text(summary))
        print(f"wrote {args.out}")
        if args.svg:
            from .plots import save_benchmark_figure

            svg_path = str(Path(args.out).with_suffix(".svg"))
            save_benchmark_figure(summary, svg_path)
            print(f"wrote {svg_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forecal",
        description="Probability calibration toolkit: fit, apply, and benchmark calibrators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a calibrator on a p,y CSV and save the model")
    p_fit.add_argument("input")
    p_fit.add_argument("--method", required=True, choices=METHODS)
    p_fit.add_argument("--bins", type=int, default=10,
                       help="bin count (histogram bins / forecal bootstrap bins)")
    p_fit.add_argument("--bootstrap", type=int, default=100,
                       help="bootstrap resamples per bin (forecal)")
    p_fit.add_argument("--trees", type=int, default=200, help="forest size (forecal)")
    p_fit.add_argument("--min-leaf", type=int, default=5, help="minimum leaf size (forecal)")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--out", required=True, help="model output path (JSON)")

    p_apply = sub.add_parser("apply", help="apply a saved model; writes p,y,p_cal")
    p_apply.add_argument("input")
    p_apply.add_argument("--model", required=True)
    p_apply.add_argument("--out", required=True)

    p_eval = sub.add_parser("evaluate", help="ECE/AUC before and after calibration")
    p_eval.add_argument("input", help="p,y,p_cal CSV, or p,y CSV when --model is given")
    p_eval.add_argument("--model", default=None)
    p_eval.add_argument("--ece-bins", type=int, default=10)
    p_eval.add_argument("--out", default=None, help="also write the report CSV here")

    p_rel = sub.add_parser("reliability", help="export reliability-diagram data")
    p_rel.add_argument("input")
    p_rel.add_argument("--bins", type=int, default=10)
    p_rel.add_argument("--out", default=None, help="CSV output path (stdout when omitted)")
    p_rel.add_argument("--svg", action="store_true",
                       help="also render the diagram as SVG next to --out")

    p_synth = sub.add_parser("synth", help="generate a synthetic miscalibrated p,y CSV")
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--kind", required=True, choices=KINDS)
    p_synth.add_argument("--k", type=float, required=True)
    p_synth.add_argument("--beta-a", type=float, default=2.0)
    p_synth.add_argument("--beta-b", type=float, default=2.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--with-q", action="store_true", help="emit the true-rate column")
    p_synth.add_argument("--out", required=True)

    p_bench = sub.add_parser("benchmark", help="multi-seed comparison of calibrators")
    p_bench.add_argument("--input", default=None, help="p,y CSV (omit to use synthetic data)")
    p_bench.add_argument("--kind", default="overconfident-sigmoid", choices=KINDS)
    p_bench.add_argument("--k", type=float, default=3.0)
    p_bench.add_argument("--beta-a", type=float, default=2.0)
    p_bench.add_argument("--beta-b", type=float, default=2.0)
    p_bench.add_argument("--synth-n", type=int, default=10000,
                         help="synthetic rows per seed (before the cal/test split)")
    p_bench.add_argument("--methods", default=",".join(METHODS))
    p_bench.add_argument("--seeds", type=int, default=10, help="number of repetitions")
    p_bench.add_argument("--seed", type=int, default=0, help="base seed")
    p_bench.add_argument("--ece-bins", type=int, default=10)
    p_bench.add_argument("--cal-fraction", type=float, default=0.6)
    p_bench.add_argument("--bins", type=int, default=10)
    p_bench.add_argument("--bootstrap", type=int, default=100)
    p_bench.add_argument("--trees", type=int, default=200)
    p_bench.add_argument("--min-leaf", type=int, default=5)
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel seed workers")
    p_bench.add_argument("--svg", action="store_true",
                         help="also render a summary figure next to --out")
    p_bench.add_argument("--out", default=None, help="report CSV output path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "reliability" and args.svg and not args.out:
        parser.error("--svg requires --out")
    if args.command == "benchmark":
        if args.svg and not args.out:
            parser.error("--svg requires --out")
        for m in args.methods.split(","):
            if m.strip() and m.strip() not in METHODS:
                parser.error(f"unknown method {m.strip()!r} (choose from {', '.join(METHODS)})")
        if not any(m.strip() for m in args.methods.split(",")):
            parser.error("at least one method is required")
        if args.seeds < 1:
            parser.error("--seeds must be >= 1")
    handlers = {
        "fit": run_fit,
        "apply": run_apply,
        "evaluate": run_evaluate,
        "reliability": run_reliability,
        "synth": run_synth,
        "benchmark": run_benchmark,
    }
    try:
        return handlers[args.command](args)
    except (DataFormatError, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
