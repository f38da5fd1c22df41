"""Command-line interface.

Subcommands: train, predict, simulate, threshold-table.

Exit codes: 0 success; 2 usage error (argparse); 3 infeasible request
(not enough class-0 data, or a bound that cannot be formed); 4 numerical
failure (singular matrix, non-convergence).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .classifier import (
    NpMethod,
    TrainOptions,
    adaptive_tau,
    model_from_json,
    model_to_json,
    train,
    train_voting,
)
from .data import LabeledDataset
from .errors import DomainError, FeasibilityError, NumericalError
from .experiments import preset, preset_ids, run_eigenbound_study, run_experiment, run_split_study
from .statcore import RngStream
from .thresholding import k_prime, k_star, min_class0_size, violation_rate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4


def _read_labeled_csv(path: str) -> LabeledDataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DomainError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if "label" not in header:
            raise DomainError(f"{path}: no 'label' column in header")
        label_col = header.index("label")
        feats, labels = [], []
        for row in reader:
            if not row:
                continue
            labels.append(int(float(row[label_col])))
            feats.append([float(v) for i, v in enumerate(row) if i != label_col])
    if not feats:
        raise DomainError(f"{path}: no data rows")
    return LabeledDataset(np.asarray(feats, float), np.asarray(labels))


def _read_feature_csv(path: str) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DomainError(f"{path}: empty file")
        header = [h.strip() for h in header]
        skip = header.index("label") if "label" in header else -1
        feats = []
        for row in reader:
            if not row:
                continue
            feats.append([float(v) for i, v in enumerate(row) if i != skip])
    if not feats:
        raise DomainError(f"{path}: no data rows")
    return np.asarray(feats, float)


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_train(args: argparse.Namespace) -> int:
    dataset = _read_labeled_csv(args.data)
    method = NpMethod(args.method)
    lambda_ = None
    if args.lambda_ not in (None, "cv"):
        lambda_ = float(args.lambda_)
        if lambda_ < 0:
            raise DomainError("lambda must be nonnegative or 'cv'")
    options = TrainOptions(lambda_=lambda_, cv_folds=args.folds, epsilon=args.epsilon)
    rng = RngStream(args.seed)

    if method is NpMethod.CLASSIC_SLDA:
        if args.alpha is not None:
            print("note: --alpha is ignored by the plain sparse-LDA sign rule",
                  file=sys.stderr)
        clf = train(dataset, method, None, None, None, rng, options)
        tau_used = None
    else:
        alpha = args.alpha if args.alpha is not None else 0.05
        if args.adaptive:
            tau_used, _ = adaptive_tau(dataset, method, alpha, args.delta,
                                       folds=args.folds, rng=rng.child(0),
                                       options=options)
        else:
            tau_used = args.tau
        if args.splits > 1:
            clf = train_voting(dataset, method, alpha, args.delta, tau_used,
                               args.splits, rng.child(1), options)
        else:
            clf = train(dataset, method, alpha, args.delta, tau_used,
                        rng.child(1), options)

    doc = model_to_json(clf)
    _write_text(args.model_out, doc)
    if args.model_out not in (None, "-"):
        summary = {"method": args.method, "tau": tau_used, "model": args.model_out}
        print(json.dumps(summary))
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    with open(args.model) as fh:
        clf = model_from_json(fh.read())
    x = _read_feature_csv(args.data)
    if x.shape[1] != clf.score.d:
        raise DomainError(
            f"feature dimension mismatch: data has {x.shape[1]} columns, "
            f"model expects {clf.score.d}"
        )
    labels = clf.predict(x)
    rows = ["row_id,score,label" if args.scores else "row_id,label"]
    if args.scores:
        scores = clf.score.score(x)
        rows += [f"{i},{scores[i]:.17g},{labels[i]}" for i in range(x.shape[0])]
    else:
        rows += [f"{i},{labels[i]}" for i in range(x.shape[0])]
    _write_text(args.output, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        spec = preset(args.example, reps=args.reps, seed=args.seed)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.example.lower() == "ex8":
        report = run_eigenbound_study(reps=spec.reps, seed=spec.seed)
    elif args.example.lower() in ("ex6a", "ex6b", "ex7"):
        report = run_split_study(spec)
    else:
        report = run_experiment(spec)
    text = report.to_json() if args.format == "json" else report.to_csv()
    _write_text(args.output, text)
    return EXIT_OK


def cmd_threshold_table(args: argparse.Namespace) -> int:
    alpha, delta0, n = args.alpha, args.delta, args.n
    required = min_class0_size(alpha, delta0)
    lines = [f"alpha={alpha} delta={delta0} n={n}",
             f"minimum class-0 threshold-set size: {required}"]
    if n < required:
        lines.append(
            f"warning: n={n} is below the minimum {required}; "
            "no order statistic controls the violation probability"
        )
        _write_text(args.output, "\n".join(lines) + "\n")
        return EXIT_OK
    ks = k_star(n, alpha, delta0)
    raw, clamped = k_prime_safe(n, alpha, delta0)
    lines.append(f"selected order k* = {ks}")
    if raw is not None:
        lines.append(f"analytic order k' = {raw} (clamped to {clamped})")
    else:
        lines.append("analytic order k' unavailable: n below 4/(alpha*delta)")
    lines.append("k,violation_bound")
    lo = max(1, ks - args.window)
    hi = min(n, ks + args.window)
    for k in range(lo, hi + 1):
        marker = "  <-- k*" if k == ks else ""
        lines.append(f"{k},{violation_rate(k, n, alpha):.6g}{marker}")
    _write_text(args.output, "\n".join(lines) + "\n")
    return EXIT_OK


def k_prime_safe(n: int, alpha: float, delta0: float):
    try:
        return k_prime(n, alpha, delta0)
    except DomainError:
        return None, None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npclass",
        description="Binary classification with a guaranteed cap on the "
                    "population type I error.",
    )
    parser.add_argument("--seed", type=int, default=42, help="root RNG seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; execution is serial")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a classifier from a labeled CSV")
    p_train.add_argument("--data", required=True, help="CSV with a 'label' column")
    p_train.add_argument("--method", required=True,
                         choices=[m.value for m in NpMethod])
    p_train.add_argument("--alpha", type=float, default=None,
                         help="type I error cap (default 0.05)")
    p_train.add_argument("--delta", type=float, default=0.05,
                         help="tolerated violation probability (default 0.05)")
    p_train.add_argument("--tau", type=float, default=0.5,
                         help="class-0 fraction used for score fitting")
    p_train.add_argument("--adaptive", action="store_true",
                         help="choose the class-0 split fraction by cross-validation")
    p_train.add_argument("--folds", type=int, default=5)
    p_train.add_argument("--splits", type=int, default=1, metavar="M",
                         help="odd number of voting members (1 = single model)")
    p_train.add_argument("--lambda", dest="lambda_", default=None,
                         help="sparse penalty level, or 'cv' (default: cv)")
    p_train.add_argument("--epsilon", type=float, default=1e-3,
                         help="slack exponent in the variance bound")
    p_train.add_argument("--model-out", default=None, help="path for the model JSON")
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="label new rows with a saved model")
    p_pred.add_argument("--model", required=True, help="model JSON from 'train'")
    p_pred.add_argument("--data", required=True, help="feature CSV")
    p_pred.add_argument("--scores", action="store_true",
                        help="include the raw score column")
    p_pred.add_argument("--output", default=None, help="output CSV (default stdout)")
    p_pred.set_defaults(func=cmd_predict)

    p_sim = sub.add_parser("simulate", help="run a named simulation study")
    p_sim.add_argument("--example", required=True,
                       help=f"one of: {', '.join(preset_ids())}")
    p_sim.add_argument("--reps", type=int, default=None)
    p_sim.add_argument("--output", default=None)
    p_sim.add_argument("--format", choices=["csv", "json"], default="csv")
    p_sim.set_defaults(func=cmd_simulate)

    p_tab = sub.add_parser("threshold-table",
                           help="inspect the order-statistic violation bounds")
    p_tab.add_argument("--alpha", type=float, required=True)
    p_tab.add_argument("--delta", type=float, required=True)
    p_tab.add_argument("--n", type=int, required=True,
                       help="class-0 threshold-set size")
    p_tab.add_argument("--window", type=int, default=3,
                       help="rows to print on each side of k*")
    p_tab.add_argument("--output", default=None)
    p_tab.set_defaults(func=cmd_threshold_table)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FeasibilityError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
