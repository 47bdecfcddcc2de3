"""Command-line front end.

Subcommands cover the main workflows: fitting derivative models,
benchmarking them across dimensions, the divergence study, change
detection and feature selection.  All randomness flows from --seed, so
reruns with the same arguments reproduce outputs byte for byte.  Exit
codes: 0 on success, 2 for usage or configuration problems, 3 when a
computation fails numerically.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import experiments
from .changepoint import WindowConfig, roc_auc
from .datasets import sample_normal, normal_derivative_truth
from .derivatives import CvGrid, fit_mised, predict_derivative, save_model
from .errors import NumericalError
from .experiments import (
    DERIVATIVE_METHODS,
    KL_METHODS,
    change_detection_trial,
    derivative_nmse_trial,
    feature_selection_trial,
    fit_derivative_cv,
    kl_trial,
)
from .kernels import multi_indices

THREADS_ENV = "MISED_THREADS"


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if count < 1:
        raise ValueError(f"{THREADS_ENV} must be at least 1")
    return count


def _seed_map(fn, seeds):
    """Run fn over seeds, optionally on a thread pool; order preserved."""
    workers = _worker_count()
    seeds = list(seeds)
    if workers == 1 or len(seeds) <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def _int_list(text: str):
    try:
        return [int(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str):
    try:
        return [float(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _method_list(text: str, allowed):
    methods = [v.strip().upper() for v in str(text).split(",") if v.strip()]
    for m in methods:
        if m not in allowed:
            raise ValueError(f"unknown method {m!r}; choose from " + ", ".join(allowed))
    if not methods:
        raise ValueError("no methods given")
    return methods


def _load_csv_matrix(path: str) -> np.ndarray:
    if not os.path.exists(path):
        raise FileNotFoundError(f"input file not found: {path}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return np.asarray(data, dtype=float)


def _write_csv(path: str, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write_json(path: str, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _jtag(j) -> str:
    return "_".join(str(v) for v in j)


def cmd_fit_derivative(args) -> int:
    if args.input is not None:
        samples = _load_csv_matrix(args.input)
        truth_known = False
    else:
        samples = sample_normal(args.n, args.d, args.seed)
        truth_known = True
    order = args.k
    if args.sigma is not None and args.ridge is not None:
        model = fit_mised(samples, order, args.sigma, args.ridge)
    elif args.sigma is None and args.ridge is None:
        grid = CvGrid(seed=args.seed)
        model = fit_derivative_cv(samples, order, grid)
    else:
        raise ValueError("give both --sigma and --ridge, or neither")
    if args.model is not None:
        save_model(model, args.model)
    if args.output is not None:
        d = samples.shape[1]
        indices = multi_indices(order, d)
        header = [f"x{m + 1}" for m in range(d)]
        header += [f"est_{_jtag(j)}" for j in indices]
        cols = [predict_derivative(model, j, samples) for j in indices]
        if truth_known:
            header += [f"true_{_jtag(j)}" for j in indices]
            cols += [normal_derivative_truth(samples, j) for j in indices]
        block = np.column_stack([samples] + [c[:, None] for c in cols])
        _write_csv(args.output, header, ([float(v) for v in row] for row in block))
    print(f"fitted order-{order} model: sigma={model.sigma:g} "
          f"ridge={model.ridge:g} centers={model.centers.shape[0]}")
    return 0


def cmd_dim_sweep(args) -> int:
    methods = _method_list(args.methods, DERIVATIVE_METHODS)
    rows = []
    for d in args.dims:
        def one(seed, d=d):
            return derivative_nmse_trial(args.n, d, args.k, seed, methods)
        per_seed = _seed_map(one, range(args.seed, args.seed + args.seeds))
        for method in methods:
            vals = np.array([r[method] for r in per_seed])
            rows.append([d, method, float(vals.mean()), float(vals.std())])
        print(f"d={d}: " + "  ".join(
            f"{m}={np.mean([r[m] for r in per_seed]):.4f}" for m in methods))
    _write_csv(args.output, ["d", "method", "nmse_mean", "nmse_std"], rows)
    return 0


def cmd_kl_experiment(args) -> int:
    methods = _method_list(args.methods, KL_METHODS)
    rows = []
    for rho in args.rho:
        for n in args.n:
            for method in methods:
                def one(seed, rho=rho, n=n, method=method):
                    return kl_trial(method, rho, n, seed, d=args.d)
                res = _seed_map(one, range(args.seed, args.seed + args.seeds))
                estimates = np.array([r[0] for r in res])
                true_kl = res[0][1]
                rows.append([float(rho), n, method, float(estimates.mean()),
                             float(estimates.std()), float(true_kl)])
                print(f"rho={rho:g} n={n} {method}: "
                      f"{estimates.mean():.3f} +- {estimates.std():.3f} "
                      f"(true {true_kl:.3f})")
    _write_csv(args.output,
               ["rho", "n", "method", "estimate_mean", "estimate_std", "true_kl"],
               rows)
    return 0


def cmd_change_detect(args) -> int:
    method = _method_list(args.method, KL_METHODS)[0]
    cfg = WindowConfig(r=args.r, m=args.m)
    if cfg.r <= cfg.m:
        print(f"warning: each sample set has r={cfg.r} points in m={cfg.m} "
              "dimensions; estimates will be rough", file=sys.stderr)
    spec0 = experiments.three_regime_spec(args.shift, args.duration, args.seed)

    def one(seed):
        spec = experiments.three_regime_spec(args.shift, args.duration, seed)
        series = change_detection_trial(method, spec, cfg, seed=seed)
        if args.tolerance is not None:
            series.tolerance = int(args.tolerance)
        return series

    all_series = _seed_map(one, range(args.seed, args.seed + args.seeds))
    aucs = [roc_auc(s) for s in all_series]
    if args.scores is not None:
        all_series[0].to_csv(args.scores)
    if args.auc is not None:
        _write_json(args.auc, {
            "method": method,
            "auc": [float(a) for a in aucs],
            "seeds": list(range(args.seed, args.seed + args.seeds)),
            "mean": float(np.mean(aucs)),
            "std": float(np.std(aucs)),
        })
    print(f"{method} change detection: auc mean {np.mean(aucs):.3f} "
          f"+- {np.std(aucs):.3f} over {args.seeds} seeds "
          f"(series from {spec0.segments[0][1]}-long regimes)")
    return 0


def cmd_feature_select(args) -> int:
    method = _method_list(args.method, KL_METHODS)[0]
    doc = {"method": method}
    if args.input is not None:
        data = _load_csv_matrix(args.input)
        if data.shape[1] < 2:
            raise ValueError("input needs feature columns plus a final label column")
        x, y = data[:, :-1], data[:, -1].astype(int)
        from .features import forward_select
        est = experiments.kl_estimator(method, seed=args.seed)
        chosen = forward_select(x, y, args.num_features, est)
        doc["chosen"] = [int(c) for c in chosen]
    else:
        chosen, informative, scores = feature_selection_trial(
            method, args.n, args.d, args.shift, args.num_features, args.seed)
        doc["chosen"] = [int(c) for c in chosen]
        doc["informative"] = int(informative)
        doc["scores"] = [float(s) for s in scores]
    if args.output is not None:
        _write_json(args.output, doc)
    print(f"{method} forward selection chose features {doc['chosen']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mised",
        description="Direct density-derivative estimation and the "
                    "divergence tools built on it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-derivative",
                       help="fit derivative models to data or a generator")
    p.add_argument("--input", help="CSV of samples (header row, one column per dimension)")
    p.add_argument("--generator", choices=["normal"], default="normal")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--k", type=int, default=1, help="derivative order")
    p.add_argument("--cv", choices=["default"], default="default",
                   help="hyper-parameter search grid (used unless sigma/ridge given)")
    p.add_argument("--sigma", type=float, help="fix the kernel width")
    p.add_argument("--ridge", type=float, help="fix the regularization")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", help="write the fitted model as JSON")
    p.add_argument("--output", help="write per-sample estimates as CSV")
    p.set_defaults(fn=cmd_fit_derivative)

    p = sub.add_parser("dim-sweep",
                       help="derivative error versus dimension, all methods")
    p.add_argument("--dims", type=_int_list, default=[1, 2, 3, 4, 5])
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--methods", default=",".join(DERIVATIVE_METHODS))
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_dim_sweep)

    p = sub.add_parser("kl-experiment",
                       help="divergence estimates on generalized-Gaussian pairs")
    p.add_argument("--rho", type=_float_list, default=[1.0, 2.0, 3.0])
    p.add_argument("--n", type=_int_list, default=[500, 1000])
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--methods", default=",".join(KL_METHODS))
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_kl_experiment)

    p = sub.add_parser("change-detect",
                       help="score synthetic regime-switching series")
    p.add_argument("--method", default="MISED")
    p.add_argument("--r", type=int, default=3, help="points per sample set")
    p.add_argument("--m", type=int, default=100, help="delay-embedding dimension")
    p.add_argument("--shift", type=float, default=5.0)
    p.add_argument("--duration", type=int, default=300)
    p.add_argument("--tolerance", type=int,
                   help="detection tolerance (defaults to r + m)")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scores", help="write the first seed's score CSV")
    p.add_argument("--auc", help="write the AUC summary JSON")
    p.set_defaults(fn=cmd_change_detect)

    p = sub.add_parser("feature-select",
                       help="greedy forward selection by divergence score")
    p.add_argument("--method", default="GP")
    p.add_argument("--input",
                   help="CSV with feature columns and a final integer label column")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--d", type=int, default=6)
    p.add_argument("--shift", type=float, default=2.0)
    p.add_argument("--num-features", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="write the chosen features as JSON")
    p.set_defaults(fn=cmd_feature_select)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
