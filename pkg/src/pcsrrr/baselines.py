"""Comparison estimators: MLasso, MElastic, SRRR, and ERRR.

The two full-rank methods run their own row-wise coordinate descent on the
p x q coefficient matrix.  SRRR and ERRR reuse the alternating solver: SRRR
is the single-group, theta = 0 case, and ERRR plugs a plain ridge identity
in place of the spectral penalty (which cancels the coupling term and only
shifts the row denominator by lam * (1 - alpha)).
"""

from __future__ import annotations

from dataclasses import replace
import numpy as np

from .model import (
    DataPair,
    EstimatorError,
    FactorPair,
    FitReport,
    GroupPartition,
    Hyperparameters,
    NonDecreasingObjective,
)
from .penalty import PenaltySet
from .solver import (
    DEGENERATE_DENOM,
    SolverConfig,
    _als_fit,
    _objective_step_ok,
    _preprocess,
)

METHODS = ("proposed", "mlasso", "melastic", "srrr", "errr")
BASELINES = ("mlasso", "melastic", "srrr", "errr")


def _full_rank_objective(data: DataPair, B: np.ndarray, lam: float,
                         alpha: float) -> float:
    resid = data.Y - data.X @ B
    value = 0.5 * float(np.sum(resid * resid))
    value += lam * alpha * float(np.linalg.norm(B, axis=1).sum())
    if alpha < 1.0:
        value += 0.5 * lam * (1.0 - alpha) * float(np.sum(B * B))
    return value


def _factor_full_rank(B: np.ndarray) -> FactorPair:
    """Wrap a full-rank coefficient matrix as a FactorPair.

    With q <= p the identity works directly; otherwise B is factored through
    its right singular vectors, which preserves exact zero rows.
    """
    p, q = B.shape
    if q <= p:
        return FactorPair(B, np.eye(q), q)
    _, _, vt = np.linalg.svd(B, full_matrices=False)
    D = vt.T
    return FactorPair(B @ D, D, min(p, q))


def _full_rank_cd(data: DataPair, lam: float, alpha: float,
                  config: SolverConfig, method: str,
                  report_hp: Hyperparameters) -> FitReport:
    """Row-wise coordinate descent for the separable full-rank objectives.

    Row update: B_i <- (1 / (x_i'x_i + lam (1-alpha))) *
    (1 - lam alpha / ||x_i'R_i||)_+ x_i'R_i, with R_i the partial residual.
    """
    from ._kernels import full_rank_sweep

    data = _preprocess(data, config)
    n, p, q = data.n, data.p, data.q
    X, Y = data.X, data.Y
    col_norms = np.einsum("ij,ij->j", X, X)
    ridge = lam * (1.0 - alpha)
    thr = lam * alpha
    B = np.zeros((p, q))
    W = Y.copy()                      # residual Y - X @ B
    flags = np.zeros(p, dtype=np.bool_)
    trace = [_full_rank_objective(data, B, lam, alpha)]
    converged = False
    iterations = 0
    for _ in range(config.max_outer_iterations):
        for _ in range(config.inner_sweeps):
            full_rank_sweep(X, B, W, col_norms, float(thr), float(ridge), flags)
        W = Y - X @ B                  # bound incremental drift each pass
        obj = _full_rank_objective(data, B, lam, alpha)
        prev = trace[-1]
        if not _objective_step_ok(prev, obj):
            raise NonDecreasingObjective(
                f"objective rose from {prev!r} to {obj!r} at iteration {iterations + 1}")
        trace.append(obj)
        iterations += 1
        if prev - obj <= config.objective_tolerance * max(abs(prev), 1e-12):
            converged = True
            break
    degenerate = {int(i) for i in np.flatnonzero(flags)}
    factors = _factor_full_rank(B)
    norms = np.linalg.norm(factors.C, axis=1)
    active = frozenset(int(i) for i in np.flatnonzero(norms > 0.0))
    if active:
        sv = np.linalg.svd(factors.C, compute_uv=False)
        eff = int(np.sum(sv > 1e-8 * sv[0]))
    else:
        eff = 0
    return FitReport(
        factors=factors,
        objective_trace=tuple(trace),
        iterations=iterations,
        converged=converged,
        active_rows=active,
        hyperparameters=report_hp,
        method=method,
        centered=data.centered,
        x_means=data.x_means,
        y_means=data.y_means,
        x_scales=data.x_scales,
        y_scales=data.y_scales,
        degenerate_rows=tuple(sorted(degenerate)),
        effective_rank=eff,
    )


def mlasso_fit(data: DataPair, hp: Hyperparameters,
               config: SolverConfig = SolverConfig()) -> FitReport:
    """Multivariate lasso: squared loss plus a row-wise l2 penalty on B."""
    return _full_rank_cd(data, hp.lam, 1.0, config, "mlasso",
                         replace(hp, alpha=1.0, theta=0.0))


def melastic_fit(data: DataPair, hp: Hyperparameters,
                 config: SolverConfig = SolverConfig()) -> FitReport:
    """Multivariate elastic net: row-wise l2 plus squared-Frobenius shrinkage."""
    return _full_rank_cd(data, hp.lam, hp.alpha, config, "melastic",
                         replace(hp, theta=0.0))


def srrr_fit(data: DataPair, hp: Hyperparameters,
             config: SolverConfig = SolverConfig()) -> FitReport:
    """Sparse reduced-rank regression: the alternating solver with one group
    and no quadratic penalty."""
    from .solver import fit
    groups = GroupPartition.single(np.asarray(data.X).shape[1])
    report = fit(data, groups, replace(hp, theta=0.0), config)
    return replace(report, method="srrr")


def errr_fit(data: DataPair, hp: Hyperparameters,
             config: SolverConfig = SolverConfig()) -> FitReport:
    """Reduced-rank regression with an elastic net penalty on C.

    Runs the shared alternating loop with threshold lam * alpha and a ridge
    identity penalty of weight lam * (1 - alpha); at alpha = 1 this is
    exactly the SRRR path.
    """
    data = _preprocess(data, config)
    groups = GroupPartition.single(data.p)
    from .model import validate_inputs
    validate_inputs(data, groups, hp)
    ridge = hp.lam * (1.0 - hp.alpha)
    report_hp = replace(hp, theta=0.0)
    if ridge > 0:
        p = data.p
        penalty = PenaltySet((ridge * np.eye(p),), (), np.full(p, ridge))
        report = _als_fit(data, groups, hp.lam * hp.alpha, 1.0, penalty,
                          report_hp, config, method="errr")
    else:
        report = _als_fit(data, groups, hp.lam * hp.alpha, 0.0, None,
                          report_hp, config, method="errr")
    return report


def baseline_fit(kind: str, data: DataPair, hp: Hyperparameters,
                 config: SolverConfig = SolverConfig()) -> FitReport:
    """Dispatch on a baseline tag from METHODS (excluding "proposed")."""
    if kind == "mlasso":
        return mlasso_fit(data, hp, config)
    if kind == "melastic":
        return melastic_fit(data, hp, config)
    if kind == "srrr":
        return srrr_fit(data, hp, config)
    if kind == "errr":
        return errr_fit(data, hp, config)
    raise EstimatorError(f"unknown baseline {kind!r}; expected one of {BASELINES}")
