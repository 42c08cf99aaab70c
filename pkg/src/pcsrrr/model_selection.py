"""K-fold cross-validation grid search shared by all estimators.

Every fold refits from the raw rows: centering statistics and the per-group
penalty spectra are computed on the training folds only, so held-out rows
never leak into preprocessing or penalty construction.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .model import (
    BadFoldCount,
    DataPair,
    EstimatorError,
    GroupPartition,
    Hyperparameters,
)
from .baselines import METHODS, baseline_fit
from .metrics import mspe
from .solver import SolverConfig, fit, init_d, predict_from_report


@dataclass(frozen=True)
class CvPlan:
    """Fold count, hyperparameter grids, and the seed of the fold shuffle."""

    lambda_grid: tuple
    folds: int = 5
    theta_grid: tuple = (0.0, 0.1, 1.0, 10.0, 100.0)
    alpha_grid: tuple = (0.1, 0.3, 0.5, 0.7, 0.9)
    rank_grid: tuple = (1,)
    seed: int = 0

    def __post_init__(self):
        for name in ("lambda_grid", "theta_grid", "alpha_grid", "rank_grid"):
            vals = tuple(getattr(self, name))
            object.__setattr__(self, name, vals)
            if len(vals) == 0:
                raise EstimatorError(f"{name} must be non-empty")


@dataclass(frozen=True)
class CvCell:
    """One grid point with its mean validation error across folds."""

    hp: Hyperparameters
    mean_error: float
    se_error: float
    fold_errors: tuple


@dataclass(frozen=True)
class CvResult:
    """Full grid table plus the selected cell."""

    method: str
    table: tuple          # CvCell per grid point, canonical order
    best: Hyperparameters
    best_error: float

    @property
    def best_cell(self) -> CvCell:
        for cell in self.table:
            if cell.hp == self.best:
                return cell
        raise EstimatorError("selected cell missing from table")


def make_folds(n: int, folds: int, seed: int = 0) -> np.ndarray:
    """Deterministic fold labels 0..folds-1 with sizes differing by <= 1."""
    if not 2 <= folds <= n:
        raise BadFoldCount(f"folds must be in 2..{n}, got {folds}")
    perm = np.random.default_rng(seed).permutation(n)
    labels = np.empty(n, dtype=int)
    labels[perm] = np.arange(n) % folds
    return labels


def default_lambda_grid(data: DataPair, rank: int | None = None,
                        size: int = 30, center: bool = True) -> tuple:
    """Log-spaced descending grid from the smallest all-zeroing weight.

    lambda_max is the largest row norm of X' (Y D0) -- the threshold above
    which the first sweep from a zero start kills every row.  With
    rank = None the target is Y itself (full-rank baselines).  The grid runs
    down to lambda_max / 1000.
    """
    if size < 1:
        raise EstimatorError(f"grid size must be >= 1, got {size}")
    from .model import center_columns
    if center and not data.centered:
        data = center_columns(data)
    target = data.Y if rank is None else data.Y @ init_d(data, rank)
    lam_max = float(np.linalg.norm(data.X.T @ target, axis=1).max())
    if lam_max <= 0:
        lam_max = 1.0
    if size == 1:
        return (lam_max,)
    return tuple(np.geomspace(lam_max, 1e-3 * lam_max, size))


def default_theta_grid(data: DataPair, groups: GroupPartition,
                       size: int = 6, center: bool = True) -> tuple:
    """Zero plus a log-spaced range matched to the penalty's scale.

    The quadratic penalty's useful strength depends on the design: its
    diagonal grows with the squared singular values while the row updates
    compare it against squared column norms.  The grid's top value makes the
    two comparable (a fully engaged bias) and the range spans two decades
    below it; theta = 0 keeps the plain sparse reduced-rank model reachable.
    """
    if size < 2:
        return (0.0,)
    from .model import center_columns
    from .penalty import build_penalty_set
    if center and not data.centered:
        data = center_columns(data)
    penalty = build_penalty_set(data, groups)
    mean_diag = float(penalty.diagonal.mean())
    if mean_diag <= 0:
        return (0.0,)
    mean_col = float(np.einsum("ij,ij->j", data.X, data.X).mean())
    theta_ref = mean_col / mean_diag
    return (0.0,) + tuple(np.geomspace(theta_ref / 100.0, theta_ref, size - 1))


def _cells_for(method: str, plan: CvPlan) -> list[Hyperparameters]:
    """Grid points relevant to a method, in canonical order.

    Irrelevant dimensions are pinned: rank, theta and alpha only vary where
    the estimator uses them.
    """
    if method == "proposed":
        return [Hyperparameters(lam=l, theta=t, alpha=1.0, rank=r)
                for r in plan.rank_grid for t in plan.theta_grid
                for l in plan.lambda_grid]
    if method == "srrr":
        return [Hyperparameters(lam=l, theta=0.0, alpha=1.0, rank=r)
                for r in plan.rank_grid for l in plan.lambda_grid]
    if method == "errr":
        return [Hyperparameters(lam=l, theta=0.0, alpha=a, rank=r)
                for r in plan.rank_grid for a in plan.alpha_grid
                for l in plan.lambda_grid]
    if method == "melastic":
        return [Hyperparameters(lam=l, theta=0.0, alpha=a, rank=1)
                for a in plan.alpha_grid for l in plan.lambda_grid]
    if method == "mlasso":
        return [Hyperparameters(lam=l, theta=0.0, alpha=1.0, rank=1)
                for l in plan.lambda_grid]
    raise EstimatorError(f"unknown method {method!r}; expected one of {METHODS}")


def fit_method(method: str, data: DataPair, groups: GroupPartition,
               hp: Hyperparameters, config: SolverConfig = SolverConfig()):
    """Fit any of the five estimators with a uniform signature."""
    if method == "proposed":
        return fit(data, groups, hp, config)
    return baseline_fit(method, data, hp, config)


def cross_validate(data: DataPair, groups: GroupPartition, plan: CvPlan,
                   method: str = "proposed",
                   config: SolverConfig = SolverConfig()) -> CvResult:
    """Grid search by K-fold mean squared prediction error on held-out rows.

    Each fold trains on raw rows (re-centering and penalty construction
    happen inside the fit) and scores the held-out responses.  Ties are
    broken toward larger lambda, then larger theta.  A failed cell scores
    infinity rather than aborting the search.
    """
    labels = make_folds(data.n, plan.folds, plan.seed)
    splits = []
    for f in range(plan.folds):
        val = labels == f
        splits.append((~val, val))
    cells = _cells_for(method, plan)
    table = []
    best = None
    for hp in cells:
        errs = []
        for tr, val in splits:
            train = DataPair(data.Y[tr], data.X[tr])
            try:
                report = fit_method(method, train, groups, hp, config)
                pred = predict_from_report(data.X[val], report)
                errs.append(mspe(data.Y[val], pred))
            except EstimatorError:
                errs.append(float("inf"))
        errs = np.asarray(errs)
        if not np.isfinite(errs).all():
            mean, se = float("inf"), float("inf")
        else:
            mean = float(errs.mean())
            se = (float(errs.std(ddof=1) / np.sqrt(len(errs)))
                  if len(errs) > 1 else 0.0)
        cell = CvCell(hp, mean, se, tuple(errs))
        table.append(cell)
        if best is None or _better(cell, best):
            best = cell
    return CvResult(method=method, table=tuple(table), best=best.hp,
                    best_error=best.mean_error)


def _better(cand: CvCell, best: CvCell) -> bool:
    if cand.mean_error < best.mean_error:
        return True
    if cand.mean_error > best.mean_error:
        return False
    if cand.hp.lam != best.hp.lam:
        return cand.hp.lam > best.hp.lam
    return cand.hp.theta > best.hp.theta
