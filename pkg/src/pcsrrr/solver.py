"""Alternating estimation of the sparse low-rank coefficient factors.

The outer loop alternates two exact minimizations:

  * a Gauss-Seidel sweep over the rows of C, each row solved in closed form
    by group soft-thresholding (the quadratic penalty only shifts the
    denominator and the linear term), and
  * an orthogonal Procrustes update of D from the SVD of Y^T X C.

Both steps never increase the objective, so the recorded trace is
monotone up to floating-point slack.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .model import (
    DataPair,
    DimensionMismatch,
    FactorPair,
    FitReport,
    GroupPartition,
    Hyperparameters,
    NonDecreasingObjective,
    ZeroCrossProduct,
    center_columns,
    scale_columns,
    validate_inputs,
)
from .penalty import PenaltySet, build_penalty_set

# A row whose quadratic coefficient falls below this is frozen at zero
# (zero-variance predictor with no penalty mass on its diagonal).
DEGENERATE_DENOM = 1e-14

# Absolute slack allowed on each recorded objective step, plus a relative
# term so the internal assertion stays meaningful at large objective scales.
DESCENT_SLACK_ABS = 1e-9
DESCENT_SLACK_REL = 1e-13


@dataclass(frozen=True)
class SolverConfig:
    """Iteration and preprocessing controls for all fitting routines."""

    max_outer_iterations: int = 500
    objective_tolerance: float = 1e-8
    inner_sweeps: int = 1
    seed: int = 0
    center: bool = True
    scale: bool = False
    rank_tolerance: float = 1e-10

    def __post_init__(self):
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")
        if self.objective_tolerance < 0:
            raise ValueError("objective_tolerance must be >= 0")
        if self.inner_sweeps < 1:
            raise ValueError("inner_sweeps must be >= 1")


@dataclass
class SolverState:
    """Working variables of one fit.

    W caches the partial residual Y @ D - X @ C; each row update adjusts it
    incrementally and the outer loop rebuilds it in full (it must be rebuilt
    after every D update anyway), which bounds incremental drift.  a_full is
    the block-diagonal embedding of the group penalty matrices used by the
    compiled sweep; it is None when theta is zero.
    """

    C: np.ndarray
    D: np.ndarray
    W: np.ndarray
    col_norms: np.ndarray
    penalty: PenaltySet | None
    group_of: np.ndarray
    pos_in_group: np.ndarray
    a_full: np.ndarray | None = None
    degenerate: set = field(default_factory=set)


def objective(data: DataPair, groups: GroupPartition, penalty: PenaltySet | None,
              factors: FactorPair, hp: Hyperparameters) -> float:
    """Value of the penalized reduced-rank objective.

    ``penalty`` may be None only when hp.theta == 0, in which case the
    quadratic term is absent.
    """
    resid = data.Y - (data.X @ factors.C) @ factors.D.T
    value = 0.5 * float(np.sum(resid * resid))
    if hp.lam > 0:
        value += hp.lam * float(np.linalg.norm(factors.C, axis=1).sum())
    if hp.theta > 0:
        if penalty is None:
            raise ValueError("penalty matrices required when theta > 0")
        for k in range(groups.K):
            Ck = factors.C[groups.indices[k]]
            value += 0.5 * hp.theta * float(np.sum(Ck * (penalty.matrices[k] @ Ck)))
    return value


def _embed_penalty(penalty: PenaltySet, groups: GroupPartition, p: int) -> np.ndarray:
    """Block-diagonal embedding of the group penalties in predictor order."""
    a_full = np.zeros((p, p))
    for k in range(groups.K):
        idx = groups.indices[k]
        a_full[np.ix_(idx, idx)] = penalty.matrices[k]
    return a_full


def _make_state(data: DataPair, groups: GroupPartition, rank: int,
                penalty: PenaltySet | None, seed: int) -> SolverState:
    p = data.p
    D = init_d(data, rank, seed)
    pos = np.empty(p, dtype=int)
    for k in range(groups.K):
        pos[groups.indices[k]] = np.arange(groups.sizes[k])
    a_full = None if penalty is None else _embed_penalty(penalty, groups, p)
    return SolverState(
        C=np.zeros((p, rank)),
        D=D,
        W=data.Y @ D,
        col_norms=np.einsum("ij,ij->j", data.X, data.X),
        penalty=penalty,
        group_of=groups.assignment,
        pos_in_group=pos,
        a_full=a_full,
    )


def init_d(data: DataPair, rank: int, seed: int = 0) -> np.ndarray:
    """Initial orthonormal response factor: top left singular vectors of Y^T X.

    If the cross-product has numerical rank below the target, the remaining
    columns are completed with a seeded random orthonormal basis; the first
    C sweep then sees a deterministic, fully orthonormal D.
    """
    M = data.Y.T @ data.X
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    have = int(np.sum(s > 1e-12 * s[0])) if s.size and s[0] > 0 else 0
    have = min(have, rank)
    D = np.zeros((data.q, rank))
    D[:, :have] = U[:, :have]
    if have < rank:
        rng = np.random.default_rng(seed)
        extra = rng.standard_normal((data.q, rank - have))
        extra -= D[:, :have] @ (D[:, :have].T @ extra)
        Q, _ = np.linalg.qr(extra)
        D[:, have:] = Q[:, : rank - have]
    return D


def update_c_row(i: int, state: SolverState, data: DataPair,
                 groups: GroupPartition, hp: Hyperparameters) -> np.ndarray:
    """Closed-form update of one row of C; applies it to the state.

    The row is the exact minimizer of the objective restricted to row i with
    every other row and D held at their current values.  It is exactly zero
    iff the soft-threshold numerator norm is <= lam.
    """
    x = data.X[:, i]
    c_old = state.C[i]
    xtq = x @ state.W + state.col_norms[i] * c_old
    if hp.theta > 0:
        k = state.group_of[i]
        j = state.pos_in_group[i]
        A = state.penalty.matrices[k]
        Ck = state.C[groups.indices[k]]
        s_i = A[j] @ Ck - A[j, j] * c_old
        u = xtq - hp.theta * s_i
        denom = state.col_norms[i] + hp.theta * A[j, j]
    else:
        u = xtq
        denom = state.col_norms[i]
    if denom <= DEGENERATE_DENOM:
        state.degenerate.add(int(i))
        c_new = np.zeros_like(c_old)
    else:
        u_norm = float(np.linalg.norm(u))
        if u_norm <= hp.lam:
            c_new = np.zeros_like(c_old)
        else:
            c_new = ((1.0 - hp.lam / u_norm) / denom) * u
    delta = c_new - c_old
    if delta.any():
        state.W -= np.outer(x, delta)
        state.C[i] = c_new
    return c_new


def update_c(state: SolverState, data: DataPair, groups: GroupPartition,
             hp: Hyperparameters, sweeps: int = 1) -> np.ndarray:
    """Run full Gauss-Seidel passes over all groups and rows.

    Delegates to the compiled sweep kernel; the arithmetic per row matches
    update_c_row.
    """
    from ._kernels import group_sweep

    order = np.concatenate(groups.indices)
    flags = np.zeros(data.p, dtype=np.bool_)
    if hp.theta > 0:
        if state.a_full is None:
            state.a_full = _embed_penalty(state.penalty, groups, data.p)
        a_full = state.a_full
    else:
        a_full = np.empty((0, 0))
    for _ in range(sweeps):
        group_sweep(data.X, state.C, state.W, state.col_norms,
                    float(hp.lam), float(hp.theta), a_full, order, flags)
    state.degenerate.update(int(i) for i in np.flatnonzero(flags))
    return state.C


def procrustes(M: np.ndarray, prev: np.ndarray | None = None) -> np.ndarray:
    """Orthonormal D maximizing tr(M^T D), via the SVD polar factor.

    For a q x r cross-product M = U L V^T the maximizer is U V^T; when M is
    rank deficient the SVD's trailing singular vectors provide an orthonormal
    completion that leaves the objective unchanged.  An identically zero M
    determines nothing: the previous iterate is returned if supplied,
    otherwise ZeroCrossProduct is raised.
    """
    M = np.asarray(M, dtype=float)
    if not M.any():
        if prev is None:
            raise ZeroCrossProduct("cross-product matrix is identically zero")
        return prev
    U, _, Vt = np.linalg.svd(M, full_matrices=False)
    return U @ Vt


def update_d(data: DataPair, C: np.ndarray,
             prev: np.ndarray | None = None) -> np.ndarray:
    """Optimal orthonormal response factor for fixed C."""
    return procrustes(data.Y.T @ (data.X @ C), prev)


def _objective_step_ok(prev: float, new: float) -> bool:
    return new <= prev + DESCENT_SLACK_ABS + DESCENT_SLACK_REL * abs(prev)


def _als_fit(data: DataPair, groups: GroupPartition, lam: float, theta: float,
             penalty: PenaltySet | None, report_hp: Hyperparameters,
             config: SolverConfig, method: str) -> FitReport:
    """Shared alternating loop; the penalty distinguishes the estimators."""
    rank = report_hp.rank
    work_hp = Hyperparameters(lam=lam, theta=theta, alpha=report_hp.alpha, rank=rank)
    state = _make_state(data, groups, rank, penalty, config.seed)
    factors = FactorPair(state.C.copy(), state.D.copy(), rank)
    trace = [objective(data, groups, penalty, factors, work_hp)]
    converged = False
    iterations = 0
    for _ in range(config.max_outer_iterations):
        update_c(state, data, groups, work_hp, config.inner_sweeps)
        state.D = update_d(data, state.C, prev=state.D)
        state.W = data.Y @ state.D - data.X @ state.C
        factors = FactorPair(state.C.copy(), state.D.copy(), rank)
        obj = objective(data, groups, penalty, factors, work_hp)
        prev = trace[-1]
        if not _objective_step_ok(prev, obj):
            raise NonDecreasingObjective(
                f"objective rose from {prev!r} to {obj!r} at iteration {iterations + 1}")
        trace.append(obj)
        iterations += 1
        if prev - obj <= config.objective_tolerance * max(abs(prev), 1e-12):
            converged = True
            break
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
        degenerate_rows=tuple(sorted(state.degenerate)),
        effective_rank=eff,
    )


def _preprocess(data: DataPair, config: SolverConfig) -> DataPair:
    if config.center and not data.centered:
        data = center_columns(data)
    if config.scale:
        data = scale_columns(data)
    return data


def fit(data: DataPair, groups: GroupPartition, hp: Hyperparameters,
        config: SolverConfig = SolverConfig()) -> FitReport:
    """Estimate the factors by alternating row sweeps and Procrustes updates.

    Stops when the relative objective change drops below
    ``config.objective_tolerance`` or after ``config.max_outer_iterations``.
    The quadratic penalty matrices are built once up front from the
    (preprocessed) design; with theta == 0 they are skipped entirely.
    """
    validate_inputs(data, groups, hp)
    data = _preprocess(data, config)
    penalty = (build_penalty_set(data, groups, config.rank_tolerance)
               if hp.theta > 0 else None)
    return _als_fit(data, groups, hp.lam, hp.theta, penalty, hp, config,
                    method="proposed")


def predict(X_new: np.ndarray, factors: FactorPair,
            x_means: np.ndarray | None = None,
            y_means: np.ndarray | None = None,
            x_scales: np.ndarray | None = None,
            y_scales: np.ndarray | None = None) -> np.ndarray:
    """Apply the fitted coefficients to new rows, undoing any preprocessing."""
    X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
    if X_new.shape[1] != factors.p:
        raise DimensionMismatch(
            f"X_new has {X_new.shape[1]} columns, model expects {factors.p}")
    Z = X_new if x_means is None else X_new - x_means
    if x_scales is not None:
        Z = Z / x_scales
    out = (Z @ factors.C) @ factors.D.T
    if y_scales is not None:
        out = out * y_scales
    if y_means is not None:
        out = out + y_means
    return out


def predict_from_report(X_new: np.ndarray, report: FitReport) -> np.ndarray:
    """Predict using a fit report's factors and stored preprocessing."""
    return predict(X_new, report.factors, report.x_means, report.y_means,
                   report.x_scales, report.y_scales)
