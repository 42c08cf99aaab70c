"""Core data containers, validation, and column preprocessing."""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class EstimatorError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(EstimatorError):
    """Row or column counts of the supplied matrices disagree."""


class NonFinite(EstimatorError):
    """A NaN or infinity was found in input data."""


class BadPartition(EstimatorError):
    """Group assignment is empty, overlapping, or of the wrong length."""


class RankTooLarge(EstimatorError):
    """Requested rank exceeds min(p, q)."""


class AllZeroBlock(EstimatorError):
    """A group's design block is identically zero (no usable spectrum)."""


class ZeroCrossProduct(EstimatorError):
    """The cross-product driving the orthonormal-factor update is zero."""


class NonDecreasingObjective(EstimatorError):
    """Internal descent assertion failed; indicates an implementation bug."""


class BadFoldCount(EstimatorError):
    """Fold count outside 2..n."""


class EmptyInput(EstimatorError):
    """An aggregation was requested over zero records."""


# ---------------------------------------------------------------------------
# Data containers
# ---------------------------------------------------------------------------

CENTERED_MEAN_TOL = 1e-10


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-d, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be non-empty, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class DataPair:
    """Response matrix Y (n x q) and design matrix X (n x p).

    ``centered`` records whether column means have been removed; the removed
    means (and optional unit-variance scales) are kept so predictions can be
    mapped back to the original coordinates.
    """

    Y: np.ndarray
    X: np.ndarray
    centered: bool = False
    x_means: np.ndarray | None = None
    y_means: np.ndarray | None = None
    x_scales: np.ndarray | None = None
    y_scales: np.ndarray | None = None

    def __post_init__(self):
        Y = _as_matrix(self.Y, "Y")
        X = _as_matrix(self.X, "X")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "X", X)
        if Y.shape[0] != X.shape[0]:
            raise DimensionMismatch(
                f"Y has {Y.shape[0]} rows but X has {X.shape[0]}")
        if not (np.isfinite(Y).all() and np.isfinite(X).all()):
            raise NonFinite("X or Y contains NaN or infinite entries")
        if self.centered:
            worst = max(np.abs(X.mean(axis=0)).max(), np.abs(Y.mean(axis=0)).max())
            if worst > CENTERED_MEAN_TOL:
                raise EstimatorError(
                    f"data flagged centered but a column mean is {worst:.3e}")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def q(self) -> int:
        return self.Y.shape[1]


@dataclass(frozen=True)
class GroupPartition:
    """Non-overlapping assignment of the p predictors to K groups.

    ``assignment[i]`` is the 0-based group index of predictor i.  Groups need
    not be contiguous in column order; ``indices[k]`` lists the member columns
    of group k in their original order.
    """

    assignment: np.ndarray
    K: int
    sizes: tuple = field(init=False)
    indices: tuple = field(init=False)

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=int)
        if a.ndim != 1 or a.size < 1:
            raise BadPartition(f"assignment must be a non-empty vector, got shape {a.shape}")
        if self.K < 1:
            raise BadPartition(f"group count must be >= 1, got {self.K}")
        if a.min() < 0 or a.max() >= self.K:
            raise BadPartition(
                f"assignment values must lie in 0..{self.K - 1}")
        idx = tuple(np.flatnonzero(a == k) for k in range(self.K))
        sizes = tuple(int(ix.size) for ix in idx)
        if min(sizes) < 1:
            empty = sizes.index(0)
            raise BadPartition(f"group {empty} is empty")
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "indices", idx)

    @property
    def p(self) -> int:
        return self.assignment.size

    @classmethod
    def single(cls, p: int) -> "GroupPartition":
        """All p predictors in one group."""
        return cls(np.zeros(p, dtype=int), 1)

    @classmethod
    def from_labels(cls, labels) -> "GroupPartition":
        """Build a partition from arbitrary hashable labels.

        Group indices follow the order in which labels first appear.
        """
        seen: dict = {}
        assignment = np.empty(len(labels), dtype=int)
        for i, lab in enumerate(labels):
            if lab not in seen:
                seen[lab] = len(seen)
            assignment[i] = seen[lab]
        return cls(assignment, len(seen))


ORTHONORMAL_TOL = 1e-10


@dataclass(frozen=True)
class FactorPair:
    """Predictor factor C (p x r) and orthonormal response factor D (q x r).

    The coefficient matrix they encode is B = C @ D.T.
    """

    C: np.ndarray
    D: np.ndarray
    r: int

    def __post_init__(self):
        C = _as_matrix(self.C, "C")
        D = _as_matrix(self.D, "D")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        if C.shape[1] != self.r or D.shape[1] != self.r:
            raise DimensionMismatch(
                f"factors must have {self.r} columns, got {C.shape[1]} and {D.shape[1]}")
        if self.r > min(C.shape[0], D.shape[0]):
            raise RankTooLarge(
                f"rank {self.r} exceeds min(p, q) = {min(C.shape[0], D.shape[0])}")
        gram = D.T @ D
        if np.linalg.norm(gram - np.eye(self.r)) > ORTHONORMAL_TOL:
            raise EstimatorError("D does not have orthonormal columns")

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def q(self) -> int:
        return self.D.shape[0]


def coefficient_matrix(factors: FactorPair) -> np.ndarray:
    """The p x q coefficient matrix B = C @ D.T."""
    return factors.C @ factors.D.T


@dataclass(frozen=True)
class Hyperparameters:
    """Penalty weights and target rank.

    lam    -- row-sparsity weight (the objective's group-lasso multiplier)
    theta  -- principal-component bias weight
    alpha  -- elastic mixing in [0, 1]; used by the elastic-net baselines only
    rank   -- target rank r of the coefficient matrix
    """

    lam: float = 0.0
    theta: float = 0.0
    alpha: float = 1.0
    rank: int = 1

    def __post_init__(self):
        if self.lam < 0:
            raise EstimatorError(f"lam must be >= 0, got {self.lam}")
        if self.theta < 0:
            raise EstimatorError(f"theta must be >= 0, got {self.theta}")
        if not 0.0 <= self.alpha <= 1.0:
            raise EstimatorError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.rank < 1:
            raise EstimatorError(f"rank must be >= 1, got {self.rank}")


@dataclass(frozen=True)
class FitReport:
    """Everything a fit produces: factors, trace, selection, and preprocessing."""

    factors: FactorPair
    objective_trace: tuple
    iterations: int
    converged: bool
    active_rows: frozenset
    hyperparameters: Hyperparameters
    method: str = "proposed"
    centered: bool = False
    x_means: np.ndarray | None = None
    y_means: np.ndarray | None = None
    x_scales: np.ndarray | None = None
    y_scales: np.ndarray | None = None
    degenerate_rows: tuple = ()
    effective_rank: int = 0

    def __post_init__(self):
        norms = np.linalg.norm(self.factors.C, axis=1)
        expected = frozenset(int(i) for i in np.flatnonzero(norms > 0.0))
        if expected != self.active_rows:
            raise EstimatorError("active_rows inconsistent with factor C")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def validate_inputs(data: DataPair, groups: GroupPartition,
                    hp: Hyperparameters):
    """Check the cross-type constraints and hand the inputs back.

    Raises DimensionMismatch, NonFinite, BadPartition, or RankTooLarge.
    Individual type invariants are enforced at construction; this adds the
    checks that span types.
    """
    if groups.p != data.p:
        raise BadPartition(
            f"partition covers {groups.p} predictors but X has {data.p} columns")
    if hp.rank > min(data.p, data.q):
        raise RankTooLarge(
            f"rank {hp.rank} exceeds min(p, q) = {min(data.p, data.q)}")
    return data, groups, hp


def center_columns(data: DataPair) -> DataPair:
    """Remove column means from X and Y, remembering them for prediction.

    Idempotent up to floating point: centering already-centered data leaves
    it unchanged and accumulates the (near-zero) means.
    """
    xm = data.X.mean(axis=0)
    ym = data.Y.mean(axis=0)
    prev_xm = data.x_means if data.x_means is not None else 0.0
    prev_ym = data.y_means if data.y_means is not None else 0.0
    return DataPair(
        Y=data.Y - ym,
        X=data.X - xm,
        centered=True,
        x_means=prev_xm + xm,
        y_means=prev_ym + ym,
        x_scales=data.x_scales,
        y_scales=data.y_scales,
    )


def scale_columns(data: DataPair) -> DataPair:
    """Scale columns of X and Y to unit sample standard deviation.

    Zero-variance columns are left untouched (scale 1).  Off by default in
    the solver: the penalty is built from the raw singular spectrum, which
    scaling would alter.
    """
    xs = data.X.std(axis=0, ddof=0)
    ys = data.Y.std(axis=0, ddof=0)
    xs = np.where(xs > 0, xs, 1.0)
    ys = np.where(ys > 0, ys, 1.0)
    prev_xs = data.x_scales if data.x_scales is not None else 1.0
    prev_ys = data.y_scales if data.y_scales is not None else 1.0
    return DataPair(
        Y=data.Y / ys,
        X=data.X / xs,
        centered=data.centered,
        x_means=data.x_means,
        y_means=data.y_means,
        x_scales=prev_xs * xs,
        y_scales=prev_ys * ys,
    )
