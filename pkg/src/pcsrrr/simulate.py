"""Deterministic generators for the synthetic benchmark scenarios.

Signal design blocks are near-rank-3: a weighted sum of three Gaussian outer
products plus unit Gaussian noise.  True coefficient rows follow the top
three principal loadings of the (column-centered) training signal block, so
the ground truth is aligned with the block's high-variance directions.

The outer-product loading directions define the signal block's row
covariance; they are drawn once per replication and shared between the
training and test draws, while the row factors and every noise term come
from disjoint child seed streams.  Train and test are therefore independent
samples from one distribution, which is what makes the benchmark's
prediction errors comparable across methods.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .model import DataPair, EstimatorError, GroupPartition

SIGNAL_WEIGHTS = (1.0, 2.0, 3.0)
N_GROUPS = 10
N_SIGNAL_GROUPS = 5


@dataclass(frozen=True)
class Scenario:
    """One cell of the benchmark design grid."""

    grouped: bool
    p: int
    n: int
    n_test: int
    tau: float
    q: int = 5
    r_true: int = 3

    def __post_init__(self):
        p0 = self.p * self.tau
        if abs(p0 - round(p0)) > 1e-9 or round(p0) < self.r_true:
            raise EstimatorError(
                f"p * tau must be an integer >= {self.r_true}, got {p0}")
        if self.grouped:
            if self.p % N_GROUPS != 0:
                raise EstimatorError(f"grouped scenarios need p divisible by {N_GROUPS}")
            if round(p0) % N_SIGNAL_GROUPS != 0:
                raise EstimatorError(
                    f"grouped scenarios need p0 divisible by {N_SIGNAL_GROUPS}")
            if round(p0) // N_SIGNAL_GROUPS < self.r_true:
                raise EstimatorError(
                    f"per-group signal width must be >= {self.r_true}")

    @property
    def p0(self) -> int:
        """Number of truly nonzero coefficient rows."""
        return int(round(self.p * self.tau))

    @property
    def tag(self) -> str:
        kind = "grouped" if self.grouped else "ungrouped"
        return f"{kind}_p{self.p}_n{self.n}_tau{self.tau:g}"


@dataclass(frozen=True)
class GroundTruth:
    """True factors, coefficient matrix, and support of one replication."""

    C: np.ndarray
    D: np.ndarray
    B: np.ndarray
    nonzero_rows: frozenset


def scenario_grid() -> list:
    """All 36 benchmark scenarios: ungrouped then grouped, by p, n, tau."""
    grid = []
    for grouped in (False, True):
        for p in (200, 400):
            for n in (100, 500, 1000):
                for tau in (0.1, 0.2, 0.25):
                    grid.append(Scenario(grouped=grouped, p=p, n=n,
                                         n_test=n, tau=tau))
    return grid


def find_scenario(tag: str) -> Scenario:
    for sc in scenario_grid():
        if sc.tag == tag:
            return sc
    raise EstimatorError(f"unknown scenario tag {tag!r}")


def gen_signal_block(n: int, p0_block: int, rng, noise: bool = True) -> np.ndarray:
    """Near-rank-3 block: sum of i * u_i v_i^T for i = 1..3 plus unit noise.

    ``rng`` is a seed or a numpy Generator.  ``noise=False`` drops the dense
    Gaussian term, leaving an exactly rank-3 matrix (test hook).
    """
    rng = np.random.default_rng(rng)
    block = np.zeros((n, p0_block))
    for i, w in enumerate(SIGNAL_WEIGHTS, start=1):
        u = rng.standard_normal(n)
        v = rng.standard_normal(p0_block)
        block += w * np.outer(u, v)
    if noise:
        block += rng.standard_normal((n, p0_block))
    return block


def _principal_loadings(block: np.ndarray, k: int) -> np.ndarray:
    """Top-k principal component loading vectors of a column-centered block."""
    centered = block - block.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return vt[:k].T.copy()


def _orthonormal_response_factor(q: int, r: int, rng) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.standard_normal((q, r)))
    return Q


def _seed_root(scenario: Scenario, seed: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        [int(seed), int(scenario.grouped), scenario.p, scenario.n,
         scenario.n_test, int(round(scenario.tau * 10000))])


def _signal_directions(p0_block: int, rng) -> list:
    """The three outer-product loading vectors of one signal block."""
    return [rng.standard_normal(p0_block) for _ in SIGNAL_WEIGHTS]


def _draw_signal_block(directions, n: int, rng) -> np.ndarray:
    """A fresh n-row draw of a signal block with fixed loading directions."""
    block = np.zeros((n, directions[0].size))
    for w, v in zip(SIGNAL_WEIGHTS, directions):
        block += w * np.outer(rng.standard_normal(n), v)
    return block + rng.standard_normal(block.shape)


def _gen_ungrouped_x(scenario: Scenario, directions, n: int, rng) -> np.ndarray:
    signal = _draw_signal_block(directions, n, rng)
    noise = rng.standard_normal((n, scenario.p - scenario.p0))
    return np.hstack([signal, noise])


def gen_ungrouped(scenario: Scenario, seed: int):
    """Training pair, test pair, ground truth, and a single-group partition.

    The truth loadings come from the realized training signal block; the test
    rows are an independent draw from the same distribution (shared loading
    directions, fresh row factors and noise).
    """
    if scenario.grouped:
        raise EstimatorError("scenario is grouped; use gen_grouped")
    train_ss, test_ss, shared_ss = _seed_root(scenario, seed).spawn(3)
    rng_tr = np.random.default_rng(train_ss)
    rng_te = np.random.default_rng(test_ss)
    rng_sh = np.random.default_rng(shared_ss)

    p, q, r, p0 = scenario.p, scenario.q, scenario.r_true, scenario.p0
    directions = _signal_directions(p0, rng_sh)
    X_tr = _gen_ungrouped_x(scenario, directions, scenario.n, rng_tr)
    C = np.zeros((p, r))
    C[:p0] = _principal_loadings(X_tr[:, :p0], r)
    D = _orthonormal_response_factor(q, r, rng_sh)
    B = C @ D.T
    Y_tr = X_tr @ B + rng_tr.standard_normal((scenario.n, q))
    X_te = _gen_ungrouped_x(scenario, directions, scenario.n_test, rng_te)
    Y_te = X_te @ B + rng_te.standard_normal((scenario.n_test, q))

    truth = GroundTruth(C, D, B, frozenset(range(p0)))
    return (DataPair(Y_tr, X_tr), DataPair(Y_te, X_te), truth,
            GroupPartition.single(p))


def _gen_grouped_x(scenario: Scenario, group_directions, n: int, rng) -> np.ndarray:
    p_k = scenario.p // N_GROUPS
    p_k0 = scenario.p0 // N_SIGNAL_GROUPS
    blocks = []
    for k in range(N_GROUPS):
        if k < N_SIGNAL_GROUPS:
            signal = _draw_signal_block(group_directions[k], n, rng)
            noise = rng.standard_normal((n, p_k - p_k0))
            blocks.append(np.hstack([signal, noise]))
        else:
            blocks.append(rng.standard_normal((n, p_k)))
    return np.hstack(blocks)


def gen_grouped(scenario: Scenario, seed: int):
    """Grouped variant: 10 equal groups, the first 5 carrying the signal.

    Within each signal group the first p_k0 columns form a near-rank-3
    block and the matching coefficient rows follow its top-3 principal
    loadings; all other rows are exactly zero.
    """
    if not scenario.grouped:
        raise EstimatorError("scenario is ungrouped; use gen_ungrouped")
    train_ss, test_ss, shared_ss = _seed_root(scenario, seed).spawn(3)
    rng_tr = np.random.default_rng(train_ss)
    rng_te = np.random.default_rng(test_ss)
    rng_sh = np.random.default_rng(shared_ss)

    p, q, r = scenario.p, scenario.q, scenario.r_true
    p_k = p // N_GROUPS
    p_k0 = scenario.p0 // N_SIGNAL_GROUPS
    group_directions = [_signal_directions(p_k0, rng_sh)
                        for _ in range(N_SIGNAL_GROUPS)]
    X_tr = _gen_grouped_x(scenario, group_directions, scenario.n, rng_tr)
    C = np.zeros((p, r))
    nonzero = []
    for k in range(N_SIGNAL_GROUPS):
        start = k * p_k
        block = X_tr[:, start:start + p_k0]
        C[start:start + p_k0] = _principal_loadings(block, r)
        nonzero.extend(range(start, start + p_k0))
    D = _orthonormal_response_factor(q, r, rng_sh)
    B = C @ D.T
    Y_tr = X_tr @ B + rng_tr.standard_normal((scenario.n, q))
    X_te = _gen_grouped_x(scenario, group_directions, scenario.n_test, rng_te)
    Y_te = X_te @ B + rng_te.standard_normal((scenario.n_test, q))

    truth = GroundTruth(C, D, B, frozenset(nonzero))
    assignment = np.repeat(np.arange(N_GROUPS), p_k)
    return (DataPair(Y_tr, X_tr), DataPair(Y_te, X_te), truth,
            GroupPartition(assignment, N_GROUPS))


def generate(scenario: Scenario, seed: int):
    """Dispatch to the grouped or ungrouped generator."""
    if scenario.grouped:
        return gen_grouped(scenario, seed)
    return gen_ungrouped(scenario, seed)
