"""Evaluation metrics and table aggregation for the simulation study."""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .model import DimensionMismatch, EmptyInput, FactorPair


@dataclass(frozen=True)
class EvalRecord:
    """Metrics of one (scenario, method, replication) cell."""

    scenario: str
    method: str
    replication: int
    mse_b: float
    mse_y: float
    tpr: float
    tnr: float


def mse_b(fit: FactorPair, truth) -> float:
    """Mean squared error of the coefficient matrix against the ground truth."""
    B_hat = fit.C @ fit.D.T
    B_true = truth.B
    if B_hat.shape != B_true.shape:
        raise DimensionMismatch(
            f"estimated B is {B_hat.shape}, truth is {B_true.shape}")
    p, q = B_true.shape
    diff = B_hat - B_true
    return float(np.sum(diff * diff)) / (p * q)


def mse_y(X_test: np.ndarray, fit: FactorPair, truth) -> float:
    """Mean squared error of noiseless test predictions.

    Compares X_test @ B_hat with the clean signal X_test @ B_true, not with
    any observed noisy responses.
    """
    X_test = np.asarray(X_test, dtype=float)
    if X_test.shape[1] != fit.p or X_test.shape[1] != truth.B.shape[0]:
        raise DimensionMismatch(
            f"X_test has {X_test.shape[1]} columns, expected {fit.p}")
    diff = X_test @ (fit.C @ fit.D.T) - X_test @ truth.B
    n_test, q = diff.shape
    return float(np.sum(diff * diff)) / (n_test * q)


def tpr_tnr(active_rows, truth_nonzero, p: int) -> tuple:
    """True positive / true negative rates of the selected predictor rows.

    Vacuous denominators score 1: with no truly nonzero rows TPR is 1, with
    no truly zero rows TNR is 1.
    """
    active = frozenset(int(i) for i in active_rows)
    nonzero = frozenset(int(i) for i in truth_nonzero)
    zero = frozenset(range(p)) - nonzero
    tpr = len(active & nonzero) / len(nonzero) if nonzero else 1.0
    tnr = len(zero - active) / len(zero) if zero else 1.0
    return float(tpr), float(tnr)


def mspe(Y_observed: np.ndarray, Y_predicted: np.ndarray) -> float:
    """Mean squared prediction error against observed responses."""
    Y_observed = np.asarray(Y_observed, dtype=float)
    Y_predicted = np.asarray(Y_predicted, dtype=float)
    if Y_observed.shape != Y_predicted.shape:
        raise DimensionMismatch(
            f"shapes {Y_observed.shape} and {Y_predicted.shape} differ")
    diff = Y_observed - Y_predicted
    n, q = diff.shape
    return float(np.sum(diff * diff)) / (n * q)


METRIC_FIELDS = ("mse_b", "mse_y", "tpr", "tnr")


def aggregate(records) -> list:
    """Per-(scenario, method) mean and standard error of every metric.

    Returns rows as dicts ordered by scenario (first appearance) and then by
    the canonical method order.  SE is the sample standard deviation divided
    by sqrt(m); a single replication has SE 0 by convention.
    """
    records = list(records)
    if not records:
        raise EmptyInput("no records to aggregate")
    from .baselines import METHODS
    scenario_order = []
    for rec in records:
        if rec.scenario not in scenario_order:
            scenario_order.append(rec.scenario)
    method_rank = {m: i for i, m in enumerate(METHODS)}
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.scenario, rec.method), []).append(rec)
    rows = []
    for scenario in scenario_order:
        keys = [k for k in groups if k[0] == scenario]
        keys.sort(key=lambda k: method_rank.get(k[1], len(method_rank)))
        for key in keys:
            cell = groups[key]
            row = {"scenario": scenario, "method": key[1],
                   "replications": len(cell)}
            for name in METRIC_FIELDS:
                vals = np.array([getattr(r, name) for r in cell], dtype=float)
                row[f"{name}_mean"] = float(vals.mean())
                row[f"{name}_se"] = (float(vals.std(ddof=1) / np.sqrt(vals.size))
                                     if vals.size > 1 else 0.0)
            rows.append(row)
    return rows
