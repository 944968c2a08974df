"""Command-line interface.

Subcommands: simulate, aggregate, fit, permtest, curve, hist. Every random
choice is driven by ``--seed`` (default: ``$AGGGLM_SEED`` or 0), so
repeated runs with the same arguments write byte-identical files.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .aggregation import (
    SummaryValidationError,
    recovered_histogram,
    summarize_blocks,
    summarize_targets,
)
from .glm import FAMILIES, predict_means
from .inference import SWEEP_FIELDS, granularity_sweep, permutation_test
from .io import (
    Dataset,
    DatasetError,
    read_dataset,
    read_summary,
    write_csv,
    write_dataset,
    write_json,
    write_summary,
)
from .simulate import SimulationConfig, simulate_glm
from .solver import INIT_SCHEMES, FitOptions, alternate_fit

SEED_ENV = "AGGGLM_SEED"


def _default_seed():
    return int(os.environ.get(SEED_ENV, "0"))


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _out_dir(path):
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _fit_options(args):
    unpenalized = None
    if getattr(args, "unpenalized", None):
        unpenalized = tuple(args.unpenalized)
    return FitOptions(
        lam=args.lam,
        max_outer_iterations=args.max_iter,
        relative_loss_tolerance=args.tol,
        seed=args.seed,
        init_scheme=args.init,
        unpenalized=unpenalized,
    )


def _resolve_unpenalized(args, ds):
    if not getattr(args, "unpenalized", None):
        return
    idx = []
    for name in args.unpenalized:
        if name not in ds.feature_names:
            raise DatasetError("unknown --unpenalized column", column=name)
        idx.append(ds.feature_names.index(name))
    args.unpenalized = idx


def _load(args, *, need_target):
    target = args.target
    if not need_target and target is not None:
        with open(args.data, encoding="utf-8") as fh:
            header = [h.strip() for h in fh.readline().split(",")]
        if target not in header:
            target = None
    return read_dataset(args.data, target=target, block=args.block, features=args.features, family=args.family)


def _summary_for(args, ds):
    if args.summary:
        return read_summary(args.summary)
    if ds.target is None:
        raise DatasetError("need --summary or a --target column to summarize")
    return _summarize(ds, args.bins, args.edges, not args.drop_extremes)


def _summarize(ds, bins, edges, include_extremes):
    if bins is None and edges is None:
        raise DatasetError("need --bins or --edges")
    if ds.block_labels is not None:
        return summarize_blocks(ds.target, ds.block_labels, bins, edges=edges, include_extremes=include_extremes)
    return summarize_targets(ds.target, bins, edges=edges, include_extremes=include_extremes)


# -- subcommands --------------------------------------------------------------


def cmd_simulate(args):
    cfg = SimulationConfig(
        family=args.family,
        n=args.n,
        d=args.d,
        coefficient_scale=args.coefficient_scale,
        covariate_scale=args.covariate_scale,
        seed=args.seed,
        relationship=args.relationship,
    )
    X, z, beta = simulate_glm(cfg)
    names = [f"x{j + 1}" for j in range(cfg.d)]
    write_dataset(args.out, Dataset(names, X, "z", z))
    if args.truth:
        write_json(args.truth, {"family": cfg.family, "beta": [float(b) for b in beta], "seed": cfg.seed})


def cmd_aggregate(args):
    ds = read_dataset(args.data, target=args.target, block=args.block, family=args.family)
    summary = _summarize(ds, args.bins, args.edges, not args.drop_extremes)
    write_summary(args.out, summary)


def cmd_fit(args):
    ds = _load(args, need_target=False)
    _resolve_unpenalized(args, ds)
    summary = read_summary(args.summary)
    state = alternate_fit(ds.X, summary, args.family, _fit_options(args))
    out = _out_dir(args.out_dir)
    payload = state.to_dict()
    payload["features"] = ds.feature_names
    payload["family"] = args.family
    write_json(out / "fit.json", payload)
    means = predict_means(ds.X, state.beta, args.family)
    write_csv(
        out / "imputed.csv",
        ["row", "z_hat", "mean"],
        [[i, float(state.z_hat[i]), float(means[i])] for i in range(ds.n)],
    )


def cmd_permtest(args):
    ds = _load(args, need_target=True)
    _resolve_unpenalized(args, ds)
    summary = None
    if args.summary or args.bins is not None or args.edges is not None:
        summary = _summary_for(args, ds)
    res = permutation_test(
        ds.X, ds.target, args.family, summary, _fit_options(args), n_perms=args.perms, seed=args.seed, jobs=args.jobs
    )
    out = _out_dir(args.out_dir)
    payload = res.to_dict()
    payload["mode"] = "aggregate" if summary is not None else "full-targets"
    write_json(out / "permtest.json", payload)
    write_csv(out / "null_errors.csv", ["replicate", "error"], [[i, float(e)] for i, e in enumerate(res.null_errors)])


def cmd_curve(args):
    options = _fit_options(args)
    records = []
    for k in range(args.seeds):
        seed = args.seed + k
        if args.data:
            ds = read_dataset(args.data, target=args.target, block=args.block, features=args.features, family=args.family)
            X, z, groups = ds.X, ds.target, ds.block_labels
        else:
            cfg = SimulationConfig(family=args.family, n=args.n, d=args.d, seed=seed, relationship=args.relationship)
            X, z, _ = simulate_glm(cfg)
            groups = None
        res = granularity_sweep(
            X,
            z,
            args.family,
            args.bins,
            args.folds,
            options,
            seed,
            groups=groups,
            include_extremes=not args.drop_extremes,
            jobs=args.jobs,
        )
        for r in res.records:
            records.append({"seed": seed, **r})

    out = _out_dir(args.out_dir)
    fields = ("seed",) + SWEEP_FIELDS
    write_csv(out / "curve.csv", list(fields), [[r[f] for f in fields] for r in records])
    summary = []
    for b in sorted(set(args.bins)):
        per_seed = {}
        for r in records:
            if r["bins"] == b:
                per_seed.setdefault(r["seed"], []).append(r)
        row = {"bins": b}
        for name in ("train_error", "test_error", "baseline_train_error", "baseline_test_error"):
            row[f"median_{name}"] = float(np.median([np.mean([r[name] for r in rs]) for rs in per_seed.values()]))
        summary.append(row)
    write_json(out / "curve.json", {"family": args.family, "folds": args.folds, "summary": summary, "records": records})


def cmd_hist(args):
    ds = _load(args, need_target=True)
    if args.imputed:
        imp = read_dataset(args.imputed, features=["z_hat"])
        z_hat = imp.X[:, 0]
        if z_hat.size != ds.n:
            raise DatasetError(f"{args.imputed} has {z_hat.size} rows, dataset has {ds.n}")
    else:
        _resolve_unpenalized(args, ds)
        summary = _summary_for(args, ds)
        z_hat = alternate_fit(ds.X, summary, args.family, _fit_options(args)).z_hat
    if args.hist_edges is not None:
        edges = np.asarray(args.hist_edges)
    else:
        lo = min(ds.target.min(), z_hat.min())
        hi = max(ds.target.max(), z_hat.max())
        edges = np.linspace(lo, hi, args.nbins + 1)
        edges[-1] = np.nextafter(hi, np.inf)
    true_h = recovered_histogram(ds.target, edges)
    rec_h = recovered_histogram(z_hat, edges)
    rows = [
        [float(edges[i]), float(edges[i + 1]), int(true_h.counts[i]), int(rec_h.counts[i])]
        for i in range(edges.size - 1)
    ]
    rows.append(["below", "", true_h.below, rec_h.below])
    rows.append(["above", "", true_h.above, rec_h.above])
    write_csv(args.out, ["left", "right", "true_count", "recovered_count"], rows)


# -- parser -------------------------------------------------------------------


def _add_data_args(p):
    p.add_argument("--data", required=True, help="headered CSV")
    p.add_argument("--target", default="z", help="target column (kept out of the features)")
    p.add_argument("--block", help="block-label column")
    p.add_argument("--features", type=_names, help="comma-separated feature columns")
    p.add_argument("--family", choices=FAMILIES, default="gaussian")


def _add_fit_args(p):
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--unpenalized", type=_names, help="feature columns exempt from the ridge penalty")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--init", choices=INIT_SCHEMES, default="interpolate")


def _add_summary_args(p):
    p.add_argument("--bins", type=int)
    p.add_argument("--edges", type=_floats, help="comma-separated histogram edges")
    p.add_argument("--drop-extremes", action="store_true", help="omit ranks 1 and n")


def build_parser():
    parser = argparse.ArgumentParser(prog="aggglm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic dataset")
    p.add_argument("--family", choices=FAMILIES, default="gaussian")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--coefficient-scale", type=float)
    p.add_argument("--covariate-scale", type=float, default=1.0)
    p.add_argument("--relationship", choices=("linear", "none"), default="linear")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="also write the true coefficients as JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("aggregate", help="summarize a target column into order statistics")
    p.add_argument("--data", required=True)
    p.add_argument("--target", default="z")
    p.add_argument("--block")
    p.add_argument("--family", choices=FAMILIES, default="gaussian")
    _add_summary_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("fit", help="alternating fit from a summary")
    _add_data_args(p)
    p.add_argument("--summary", required=True)
    _add_fit_args(p)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("permtest", help="permutation test of the fit error")
    _add_data_args(p)
    p.add_argument("--summary")
    _add_summary_args(p)
    _add_fit_args(p)
    p.add_argument("--perms", type=int, default=1000)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_permtest)

    p = sub.add_parser("curve", help="cross-validated error versus bin count")
    p.add_argument("--data", help="CSV; simulate per seed when omitted")
    p.add_argument("--target", default="z")
    p.add_argument("--block")
    p.add_argument("--features", type=_names)
    p.add_argument("--family", choices=FAMILIES, default="gaussian")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--relationship", choices=("linear", "none"), default="linear")
    p.add_argument("--bins", type=_ints, default=[2, 5, 10, 25, 50])
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--drop-extremes", action="store_true")
    _add_fit_args(p)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("hist", help="true versus recovered histogram counts")
    _add_data_args(p)
    p.add_argument("--summary")
    _add_summary_args(p)
    p.add_argument("--imputed", help="imputed.csv from a previous fit")
    p.add_argument("--hist-edges", type=_floats, help="edges for the comparison histogram")
    p.add_argument("--nbins", type=int, default=20, help="equal-width bins when --hist-edges is absent")
    _add_fit_args(p)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hist)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (DatasetError, SummaryValidationError, ValueError, OSError) as exc:
        print(f"aggglm {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
