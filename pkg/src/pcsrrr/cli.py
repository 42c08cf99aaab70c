"""Command-line front end: fit, predict, cross-validate, and simulate.

Matrices travel as delimited text with a header row naming the variables.
Fitted models are saved as a self-describing JSON artifact whose floats are
printed at full round-trip precision, so save -> load -> predict reproduces
the in-process predictions bit for bit.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import METHODS
from .model import (
    AllZeroBlock,
    BadFoldCount,
    BadPartition,
    DataPair,
    DimensionMismatch,
    EmptyInput,
    EstimatorError,
    FactorPair,
    GroupPartition,
    Hyperparameters,
    NonDecreasingObjective,
    NonFinite,
    RankTooLarge,
    ZeroCrossProduct,
)
from .benchmark import DEFAULT_ALPHA_GRID, BenchmarkSettings, run_simulation
from .metrics import METRIC_FIELDS, aggregate
from .model_selection import (
    CvPlan,
    cross_validate,
    default_lambda_grid,
    default_theta_grid,
    fit_method,
)
from .simulate import find_scenario, scenario_grid
from .solver import SolverConfig, predict

SCHEMA_VERSION = 1

DATA_ERRORS = (DimensionMismatch, NonFinite, BadPartition, RankTooLarge,
               BadFoldCount, EmptyInput)
NUMERICAL_ERRORS = (AllZeroBlock, ZeroCrossProduct, NonDecreasingObjective)


class ParseError(EstimatorError):
    """A data file could not be parsed; the message names file, row, column."""


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def _detect_delim(line: str) -> str | None:
    for d in ("\t", ";", ","):
        if d in line:
            return d
    return None  # whitespace


def _split(line: str, delim: str | None) -> list:
    parts = line.split(delim) if delim else line.split()
    return [p.strip() for p in parts]


def read_matrix(path) -> tuple:
    """Read a delimited matrix with a header row; returns (names, array)."""
    lines = Path(path).read_text().splitlines()
    rows = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if len(rows) < 2:
        raise ParseError(f"{path}: need a header row and at least one data row")
    delim = _detect_delim(rows[0][1])
    names = _split(rows[0][1], delim)
    data = np.empty((len(rows) - 1, len(names)))
    for r, (lineno, line) in enumerate(rows[1:]):
        cells = _split(line, delim)
        if len(cells) != len(names):
            raise ParseError(
                f"{path}:{lineno}: expected {len(names)} fields, got {len(cells)}")
        try:
            data[r] = np.array(cells, dtype=float)
        except ValueError:
            for c, cell in enumerate(cells):
                try:
                    float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}:{lineno}: column {c + 1} ({names[c]}): "
                        f"cannot parse {cell!r} as a number") from None
            raise
    return names, data


def write_matrix(path, names, data) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for row in np.atleast_2d(data):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_groups(path, x_names) -> tuple:
    """Read predictor-to-group assignments; returns (labels per predictor, partition).

    Each line holds a predictor name and a group label.  A first line whose
    name column matches no predictor is treated as a header and skipped.
    Every predictor must be assigned exactly once.
    """
    lines = Path(path).read_text().splitlines()
    rows = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise ParseError(f"{path}: empty groups file")
    known = set(x_names)
    mapping: dict = {}
    for j, (lineno, line) in enumerate(rows):
        delim = _detect_delim(line)
        cells = _split(line, delim)
        if len(cells) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 fields, got {len(cells)}")
        name, label = cells
        if name not in known:
            if j == 0:
                continue  # header row
            raise BadPartition(f"{path}:{lineno}: unknown predictor {name!r}")
        if name in mapping:
            raise BadPartition(f"{path}:{lineno}: predictor {name!r} assigned twice")
        mapping[name] = label
    missing = [n for n in x_names if n not in mapping]
    if missing:
        raise BadPartition(
            f"{path}: {len(mapping)} assignments for {len(x_names)} predictors "
            f"(missing {missing[:3]}{'...' if len(missing) > 3 else ''})")
    labels = [mapping[n] for n in x_names]
    return labels, GroupPartition.from_labels(labels)


def _arr(value):
    return None if value is None else np.asarray(value, dtype=float)


def save_model(path, report, x_names, y_names, group_labels) -> None:
    doc = {
        "format": "pcsrrr-model",
        "schema_version": SCHEMA_VERSION,
        "method": report.method,
        "hyperparameters": {
            "lam": report.hyperparameters.lam,
            "theta": report.hyperparameters.theta,
            "alpha": report.hyperparameters.alpha,
            "rank": report.hyperparameters.rank,
        },
        "x_names": list(x_names),
        "y_names": list(y_names),
        "group_labels": list(group_labels),
        "C": report.factors.C.tolist(),
        "D": report.factors.D.tolist(),
        "centered": report.centered,
        "x_means": None if report.x_means is None else np.asarray(report.x_means).tolist(),
        "y_means": None if report.y_means is None else np.asarray(report.y_means).tolist(),
        "x_scales": None if report.x_scales is None else np.asarray(report.x_scales).tolist(),
        "y_scales": None if report.y_scales is None else np.asarray(report.y_scales).tolist(),
        "objective_trace": list(report.objective_trace),
        "iterations": report.iterations,
        "converged": report.converged,
        "active_rows": sorted(report.active_rows),
        "degenerate_rows": list(report.degenerate_rows),
        "effective_rank": report.effective_rank,
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: corrupt model file ({err})") from None
    if doc.get("format") != "pcsrrr-model":
        raise ParseError(f"{path}: not a pcsrrr model file")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(
            f"{path}: unsupported schema version {doc.get('schema_version')}")
    D = np.asarray(doc["D"], dtype=float)
    doc["factors"] = FactorPair(np.asarray(doc["C"], dtype=float), D, D.shape[1])
    for key in ("x_means", "y_means", "x_scales", "y_scales"):
        doc[key] = _arr(doc[key])
    return doc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _load_xy(args) -> tuple:
    x_names, X = read_matrix(args.x)
    y_names, Y = read_matrix(args.y)
    data = DataPair(Y, X)
    if args.groups:
        labels, partition = read_groups(args.groups, x_names)
    else:
        labels = ["all"] * data.p
        partition = GroupPartition.single(data.p)
    return data, partition, x_names, y_names, labels


def _solver_config(args) -> SolverConfig:
    return SolverConfig(seed=args.seed, center=not args.no_center)


def _rank_grid(args) -> tuple:
    return tuple(args.rank) if args.rank else (1,)


def _cv_plan(args, data, partition) -> CvPlan:
    ranks = _rank_grid(args)
    factor_rank = (max(ranks) if args.method in ("proposed", "srrr", "errr")
                   else None)
    if args.theta is not None:
        theta_grid = (args.theta,)
    elif args.method == "proposed":
        theta_grid = default_theta_grid(data, partition,
                                        center=not args.no_center)
    else:
        theta_grid = (0.0,)
    return CvPlan(
        lambda_grid=default_lambda_grid(data, rank=factor_rank,
                                        size=args.grid_size,
                                        center=not args.no_center),
        folds=args.folds,
        theta_grid=theta_grid,
        alpha_grid=DEFAULT_ALPHA_GRID if args.alpha is None else (args.alpha,),
        rank_grid=ranks,
        seed=args.seed,
    )


def cmd_fit(args) -> int:
    data, partition, x_names, y_names, labels = _load_xy(args)
    config = _solver_config(args)
    ranks = _rank_grid(args)
    if args.cv or args.lam is None:
        if not args.cv:
            print("error: provide --lambda or use --cv", file=sys.stderr)
            return 2
        result = cross_validate(data, partition, _cv_plan(args, data, partition),
                                args.method, config)
        hp = result.best
        print(f"cv: chose lambda={_fmt(hp.lam)} theta={_fmt(hp.theta)} "
              f"alpha={_fmt(hp.alpha)} rank={hp.rank} "
              f"(mean validation error {_fmt(result.best_error)})")
    else:
        if len(ranks) > 1:
            print("error: a rank grid needs --cv", file=sys.stderr)
            return 2
        hp = Hyperparameters(lam=args.lam,
                             theta=args.theta if args.theta is not None else 0.0,
                             alpha=args.alpha if args.alpha is not None else 1.0,
                             rank=ranks[0])
    report = fit_method(args.method, data, partition, hp, config)
    save_model(args.out, report, x_names, y_names, labels)
    print(f"fit: method={report.method} active_rows={len(report.active_rows)} "
          f"of {data.p} final_objective={_fmt(report.objective_trace[-1])} "
          f"iterations={report.iterations} converged={report.converged}")
    print(f"fit: model written to {args.out}")
    return 0


def cmd_predict(args) -> int:
    doc = load_model(args.model)
    x_names, X = read_matrix(args.x)
    if len(x_names) != len(doc["x_names"]):
        raise DimensionMismatch(
            f"{args.x} has {len(x_names)} predictors, model expects "
            f"{len(doc['x_names'])}")
    if x_names != doc["x_names"]:
        raise DimensionMismatch(
            f"{args.x}: predictor names do not match the model's")
    pred = predict(X, doc["factors"], doc["x_means"], doc["y_means"],
                   doc["x_scales"], doc["y_scales"])
    write_matrix(args.out, doc["y_names"], pred)
    print(f"predict: wrote {pred.shape[0]} rows to {args.out}")
    return 0


def cmd_cv(args) -> int:
    data, partition, _, _, _ = _load_xy(args)
    config = _solver_config(args)
    result = cross_validate(data, partition, _cv_plan(args, data, partition),
                            args.method, config)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write("method,rank,theta,alpha,lambda,mean_error,se_error\n")
            for cell in result.table:
                fh.write(",".join([
                    result.method, str(cell.hp.rank), _fmt(cell.hp.theta),
                    _fmt(cell.hp.alpha), _fmt(cell.hp.lam),
                    _fmt(cell.mean_error), _fmt(cell.se_error)]) + "\n")
        print(f"cv: table written to {args.out}")
    hp = result.best
    print(f"cv: best lambda={_fmt(hp.lam)} theta={_fmt(hp.theta)} "
          f"alpha={_fmt(hp.alpha)} rank={hp.rank} "
          f"mean_error={_fmt(result.best_error)}")
    return 0


def cmd_simulate(args) -> int:
    if args.scenario:
        scenarios = [find_scenario(tag) for tag in args.scenario]
    else:
        scenarios = scenario_grid()
    methods = args.method or list(METHODS)
    settings = BenchmarkSettings(
        folds=args.folds,
        lambda_grid_size=args.grid_size,
    )
    records = run_simulation(scenarios, args.replications, methods,
                             args.seed, settings, jobs=args.jobs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rec_path = out_dir / "records.csv"
    with open(rec_path, "w", newline="\n") as fh:
        fh.write("scenario,method,replication,mse_b,mse_y,tpr,tnr\n")
        for r in records:
            fh.write(",".join([r.scenario, r.method, str(r.replication),
                               _fmt(r.mse_b), _fmt(r.mse_y), _fmt(r.tpr),
                               _fmt(r.tnr)]) + "\n")
    rows = aggregate(records)
    for sc in scenarios:
        path = out_dir / f"aggregate_{sc.tag}.csv"
        with open(path, "w", newline="\n") as fh:
            header = ["method", "replications"]
            for name in METRIC_FIELDS:
                header += [f"{name}_mean", f"{name}_se"]
            fh.write(",".join(header) + "\n")
            for row in rows:
                if row["scenario"] != sc.tag:
                    continue
                cells = [row["method"], str(row["replications"])]
                for name in METRIC_FIELDS:
                    cells += [_fmt(row[f"{name}_mean"]), _fmt(row[f"{name}_se"])]
                fh.write(",".join(cells) + "\n")
    print(f"simulate: {len(records)} records over {len(scenarios)} scenario(s) "
          f"written to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(sub, cv: bool) -> None:
    sub.add_argument("--x", required=True, help="design matrix file")
    sub.add_argument("--y", required=True, help="response matrix file")
    sub.add_argument("--groups", help="predictor-to-group assignment file")
    sub.add_argument("--method", choices=METHODS, default="proposed")
    sub.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="row-sparsity weight (omit with --cv)")
    sub.add_argument("--theta", type=float, default=None,
                     help="principal-component bias weight")
    sub.add_argument("--alpha", type=float, default=None,
                     help="elastic mixing in [0, 1]")
    sub.add_argument("--rank", action="append", type=int, default=None,
                     help="target rank (repeatable with --cv for a rank grid)")
    sub.add_argument("--folds", type=int, default=5)
    sub.add_argument("--grid-size", type=int, default=10,
                     help="points in the default lambda grid")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--no-center", action="store_true",
                     help="skip column centering")
    if cv:
        sub.add_argument("--cv", action="store_true",
                         help="choose hyperparameters by cross-validation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcsrrr",
        description="Principal-component-guided sparse reduced-rank regression")
    subs = parser.add_subparsers(dest="command", required=True)

    p_fit = subs.add_parser("fit", help="fit a model to data files")
    _add_common(p_fit, cv=True)
    p_fit.add_argument("--out", required=True, help="model file to write")
    p_fit.set_defaults(func=cmd_fit)

    p_pred = subs.add_parser("predict", help="apply a saved model")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--x", required=True)
    p_pred.add_argument("--out", required=True)
    p_pred.set_defaults(func=cmd_predict)

    p_cv = subs.add_parser("cv", help="cross-validation grid search")
    _add_common(p_cv, cv=False)
    p_cv.add_argument("--out", help="grid table file to write")
    p_cv.set_defaults(func=cmd_cv)

    p_sim = subs.add_parser("simulate", help="run benchmark scenarios")
    p_sim.add_argument("--scenario", action="append",
                       help="scenario tag (repeatable; default: all 36)")
    p_sim.add_argument("--replications", type=int, default=100)
    p_sim.add_argument("--method", action="append", choices=METHODS,
                       help="method to evaluate (repeatable; default: all)")
    p_sim.add_argument("--folds", type=int, default=5)
    p_sim.add_argument("--grid-size", type=int, default=10)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--jobs", type=int, default=1)
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 0 if err.code in (0, None) else 2
    try:
        return args.func(args)
    except NUMERICAL_ERRORS as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 4
    except (EstimatorError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
