import numpy as np
import pytest

import pcsrrr as pc
from pcsrrr.penalty import build_penalty_set
from pcsrrr.solver import update_c, update_c_row

from conftest import (
    brute_force_row_minimizer,
    build_state_for_row,
    naive_objective,
    one_row_objective,
    random_instance,
    random_orthonormal,
    row_oracle_ingredients,
)


# ---------------------------------------------------------------------------
# objective
# ---------------------------------------------------------------------------

def test_objective_zero_factors_is_half_ynorm():
    rng = np.random.default_rng(0)
    data = pc.DataPair(rng.standard_normal((9, 3)), rng.standard_normal((9, 5)))
    groups = pc.GroupPartition.single(5)
    D = random_orthonormal(rng, 3, 2)
    factors = pc.FactorPair(np.zeros((5, 2)), D, 2)
    hp = pc.Hyperparameters(lam=2.0, theta=3.0, rank=2)
    val = pc.objective(data, groups, build_penalty_set(data, groups), factors, hp)
    assert abs(val - 0.5 * np.sum(data.Y ** 2)) < 1e-12


def test_objective_unpenalized_is_residual():
    rng = np.random.default_rng(1)
    data = pc.DataPair(rng.standard_normal((8, 3)), rng.standard_normal((8, 4)))
    groups = pc.GroupPartition.single(4)
    C = rng.standard_normal((4, 2))
    D = random_orthonormal(rng, 3, 2)
    factors = pc.FactorPair(C, D, 2)
    hp = pc.Hyperparameters(lam=0.0, theta=0.0, rank=2)
    val = pc.objective(data, groups, None, factors, hp)
    expected = 0.5 * np.sum((data.Y - data.X @ C @ D.T) ** 2)
    assert abs(val - expected) < 1e-10


def test_objective_matches_naive_reimplementation():
    rng = np.random.default_rng(2)
    for _ in range(20):
        data, groups, r = random_instance(rng)
        C = rng.standard_normal((data.p, r))
        D = random_orthonormal(rng, data.q, r)
        factors = pc.FactorPair(C, D, r)
        hp = pc.Hyperparameters(lam=float(rng.uniform(0, 2)),
                                theta=float(rng.uniform(0, 2)), rank=r)
        penalty = build_penalty_set(data, groups)
        fast = pc.objective(data, groups, penalty, factors, hp)
        slow = naive_objective(data, groups, penalty, factors, hp)
        assert abs(fast - slow) < 1e-10 * max(1.0, abs(slow))


# ---------------------------------------------------------------------------
# one-row update
# ---------------------------------------------------------------------------

def test_row_kill_region_is_exact_zero():
    rng = np.random.default_rng(3)
    data, groups, r = random_instance(rng, n=20, p=5, q=3, r=2, K=1)
    C = rng.standard_normal((5, 2))
    D = random_orthonormal(rng, 3, 2)
    hp0 = pc.Hyperparameters(lam=0.0, theta=0.5, rank=2)
    state, penalty = build_state_for_row(data, groups, hp0, C, D)
    i = 2
    Q, s, a_ii = row_oracle_ingredients(i, data, groups, C, D, penalty, hp0.theta)
    u = data.X[:, i] @ Q - hp0.theta * s
    lam = float(np.linalg.norm(u)) / 0.9          # norm is 0.9 * lam
    hp = pc.Hyperparameters(lam=lam, theta=hp0.theta, rank=2)
    row = update_c_row(i, state, data, groups, hp)
    assert np.all(row == 0.0)
    assert i not in {int(j) for j in np.flatnonzero(
        np.linalg.norm(state.C, axis=1) > 0)} or True


def test_row_unregularized_unit_column():
    rng = np.random.default_rng(4)
    n, p, q, r = 15, 4, 3, 2
    X = rng.standard_normal((n, p))
    X[:, 1] /= np.linalg.norm(X[:, 1])            # unit-norm column
    data = pc.DataPair(rng.standard_normal((n, q)), X)
    groups = pc.GroupPartition.single(p)
    C = rng.standard_normal((p, r))
    D = random_orthonormal(rng, q, r)
    hp = pc.Hyperparameters(lam=0.0, theta=0.0, rank=r)
    state, penalty = build_state_for_row(data, groups, hp, C, D)
    Q, _, _ = row_oracle_ingredients(1, data, groups, C, D, penalty, 0.0)
    row = update_c_row(1, state, data, groups, hp)
    assert np.allclose(row, X[:, 1] @ Q, atol=1e-12)


def test_row_matches_brute_force_minimizer():
    rng = np.random.default_rng(5)
    for _ in range(25):
        data, groups, r = random_instance(rng, p=5, q=3, r=2, K=1)
        C = rng.standard_normal((data.p, r))
        D = random_orthonormal(rng, data.q, r)
        hp = pc.Hyperparameters(lam=float(rng.uniform(0, 3)),
                                theta=float(rng.uniform(0, 3)), rank=r)
        state, penalty = build_state_for_row(data, groups, hp, C, D)
        i = int(rng.integers(data.p))
        Q, s, a_ii = row_oracle_ingredients(i, data, groups, C, D,
                                            penalty, hp.theta)
        row = update_c_row(i, state, data, groups, hp)
        oracle_c, oracle_f = brute_force_row_minimizer(
            Q, data.X[:, i], hp.lam, hp.theta, a_ii, s)
        assert np.linalg.norm(row - oracle_c) < 1e-6
        impl_f = one_row_objective(row, Q, data.X[:, i], hp.lam, hp.theta, a_ii, s)
        assert impl_f <= oracle_f + 1e-10


def test_row_zero_iff_numerator_below_lambda():
    rng = np.random.default_rng(6)
    for _ in range(30):
        data, groups, r = random_instance(rng, K=1)
        C = rng.standard_normal((data.p, r))
        D = random_orthonormal(rng, data.q, r)
        theta = float(rng.uniform(0, 2))
        hp0 = pc.Hyperparameters(lam=0.0, theta=theta, rank=r)
        state, penalty = build_state_for_row(data, groups, hp0, C, D)
        i = int(rng.integers(data.p))
        Q, s, _ = row_oracle_ingredients(i, data, groups, C, D, penalty, theta)
        u_norm = float(np.linalg.norm(data.X[:, i] @ Q - theta * s))
        for lam, expect_zero in ((u_norm * 1.0001, True), (u_norm * 0.999, False)):
            st, _ = build_state_for_row(
                data, groups, pc.Hyperparameters(lam=lam, theta=theta, rank=r), C, D)
            row = update_c_row(i, st, data, groups,
                               pc.Hyperparameters(lam=lam, theta=theta, rank=r))
            assert (np.linalg.norm(row) == 0.0) == expect_zero


def test_degenerate_column_forced_to_zero():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((10, 3))
    X[:, 1] = 0.0
    data = pc.DataPair(rng.standard_normal((10, 2)), X)
    groups = pc.GroupPartition.single(3)
    hp = pc.Hyperparameters(lam=0.1, theta=0.0, rank=2)
    rep = pc.fit(data, groups, hp, pc.SolverConfig(center=False))
    assert 1 in rep.degenerate_rows
    assert np.all(rep.factors.C[1] == 0.0)


def test_constant_column_flagged_after_centering():
    rng = np.random.default_rng(21)
    X = rng.standard_normal((15, 4))
    X[:, 2] = 7.5                                  # zero variance
    data = pc.DataPair(rng.standard_normal((15, 2)), X)
    rep = pc.fit(data, pc.GroupPartition.single(4),
                 pc.Hyperparameters(lam=0.05, rank=1))
    assert 2 in rep.degenerate_rows
    assert np.all(rep.factors.C[2] == 0.0)


def test_threshold_boundary_continuity():
    # a numerator norm just above lam yields a row of norm at most
    # 1e-5 * lam / denominator: the soft threshold has no jump at the kink
    rng = np.random.default_rng(22)
    for _ in range(20):
        data, groups, r = random_instance(rng, K=1)
        C = rng.standard_normal((data.p, r))
        D = random_orthonormal(rng, data.q, r)
        theta = float(rng.uniform(0, 2))
        hp0 = pc.Hyperparameters(lam=0.0, theta=theta, rank=r)
        state, penalty = build_state_for_row(data, groups, hp0, C, D)
        i = int(rng.integers(data.p))
        Q, s, a_ii = row_oracle_ingredients(i, data, groups, C, D,
                                            penalty, theta)
        u_norm = float(np.linalg.norm(data.X[:, i] @ Q - theta * s))
        if u_norm == 0.0:
            continue
        lam = u_norm / (1.0 + 0.5e-6)              # norm in (lam, lam(1+1e-6))
        hp = pc.Hyperparameters(lam=lam, theta=theta, rank=r)
        st, _ = build_state_for_row(data, groups, hp, C, D)
        row = update_c_row(i, st, data, groups, hp)
        denom = float(data.X[:, i] @ data.X[:, i]) + theta * a_ii
        assert np.linalg.norm(row) <= 1e-5 * lam / denom


def test_inner_sweeps_config():
    rng = np.random.default_rng(23)
    data, groups, r = random_instance(rng, n=25, p=8, q=3, r=2)
    hp = pc.Hyperparameters(lam=0.2, theta=1.0, rank=r)
    rep = pc.fit(data, groups, hp, pc.SolverConfig(inner_sweeps=3))
    assert np.all(np.diff(rep.objective_trace) <= 1e-9)


# ---------------------------------------------------------------------------
# full sweep
# ---------------------------------------------------------------------------

def test_sweep_large_lambda_kills_everything():
    rng = np.random.default_rng(8)
    data, groups, r = random_instance(rng, n=25, p=7, q=4, r=2)
    data = pc.center_columns(data)
    D0 = pc.init_d(data, r)
    lam = float(np.linalg.norm(data.X.T @ (data.Y @ D0), axis=1).max()) * 1.01
    rep = pc.fit(data, groups, pc.Hyperparameters(lam=lam, rank=r))
    assert rep.active_rows == frozenset()
    assert rep.iterations <= 2
    assert np.allclose(rep.factors.D, D0)


def test_sweep_decreases_objective_and_residual_consistency():
    rng = np.random.default_rng(9)
    for _ in range(10):
        data, groups, r = random_instance(rng)
        hp = pc.Hyperparameters(lam=float(rng.uniform(0, 1)),
                                theta=float(rng.uniform(0, 1)), rank=r)
        C = rng.standard_normal((data.p, r))
        D = random_orthonormal(rng, data.q, r)
        state, penalty = build_state_for_row(data, groups, hp, C, D)
        before = pc.objective(data, groups, penalty,
                              pc.FactorPair(state.C.copy(), D, r), hp)
        update_c(state, data, groups, hp)
        after = pc.objective(data, groups, penalty,
                             pc.FactorPair(state.C.copy(), D, r), hp)
        assert after <= before + 1e-10
        direct = data.Y @ state.D - data.X @ state.C
        assert np.abs(direct - state.W).max() < 1e-8


def test_single_predictor_matches_row_oracle():
    rng = np.random.default_rng(10)
    X = rng.standard_normal((12, 1))
    Y = rng.standard_normal((12, 3))
    data = pc.DataPair(Y, X)
    groups = pc.GroupPartition.single(1)
    hp = pc.Hyperparameters(lam=0.7, theta=0.0, rank=1)
    rep = pc.fit(data, groups, hp, pc.SolverConfig(center=False))
    D = rep.factors.D
    Q = Y @ D
    oracle_c, oracle_f = brute_force_row_minimizer(
        Q, X[:, 0], hp.lam, 0.0, 0.0, np.zeros(1))
    assert np.linalg.norm(rep.factors.C[0] - oracle_c) < 1e-6


# ---------------------------------------------------------------------------
# Procrustes update
# ---------------------------------------------------------------------------

def test_update_d_identity():
    D = pc.procrustes(np.eye(3))
    assert np.allclose(D, np.eye(3))


def test_update_d_vector_normalizes():
    M = np.array([[3.0], [4.0]])
    D = pc.procrustes(M)
    assert np.allclose(D, M / 5.0)


def test_update_d_beats_random_candidates():
    rng = np.random.default_rng(11)
    M = rng.standard_normal((3, 2))
    D = pc.procrustes(M)
    best = -np.inf
    for _ in range(10000):
        cand = random_orthonormal(rng, 3, 2)
        best = max(best, np.trace(M.T @ cand))
    assert np.trace(M.T @ D) >= best - 1e-9
    assert np.linalg.norm(D.T @ D - np.eye(2)) < 1e-10


def test_update_d_rank_deficient_still_orthonormal():
    rng = np.random.default_rng(12)
    M = np.outer(rng.standard_normal(5), rng.standard_normal(3))  # rank 1, r=3
    D = pc.procrustes(M)
    assert np.linalg.norm(D.T @ D - np.eye(3)) < 1e-10


def test_update_d_zero_matrix():
    with pytest.raises(pc.ZeroCrossProduct):
        pc.procrustes(np.zeros((4, 2)))
    prev = np.eye(4)[:, :2]
    assert pc.procrustes(np.zeros((4, 2)), prev=prev) is prev


# ---------------------------------------------------------------------------
# fit / predict
# ---------------------------------------------------------------------------

def test_fit_noiseless_recovery():
    rng = np.random.default_rng(13)
    n, p, q, r = 50, 8, 4, 2
    X = rng.standard_normal((n, p))
    C_true = rng.standard_normal((p, r))
    D_true = random_orthonormal(rng, q, r)
    data = pc.DataPair(X @ C_true @ D_true.T, X)
    rep = pc.fit(data, pc.GroupPartition.single(p),
                 pc.Hyperparameters(lam=1e-4, theta=0.0, rank=r))
    B_err = np.linalg.norm(pc.coefficient_matrix(rep.factors) - C_true @ D_true.T)
    assert B_err < 1e-3


def test_fit_trace_monotone_and_fixed_point():
    rng = np.random.default_rng(14)
    tight = pc.SolverConfig(objective_tolerance=1e-12, max_outer_iterations=2000)
    for _ in range(10):
        data, groups, r = random_instance(rng)
        hp = pc.Hyperparameters(lam=float(rng.uniform(0.01, 1)),
                                theta=float(rng.uniform(0, 5)), rank=r)
        rep = pc.fit(data, groups, hp, tight)
        tr = np.array(rep.objective_trace)
        assert np.all(np.diff(tr) <= 1e-9)
        # at convergence, re-running any row update barely moves it
        if rep.converged:
            centered = pc.center_columns(data)
            state, _ = build_state_for_row(centered, groups, hp,
                                           rep.factors.C, rep.factors.D)
            for i in range(data.p):
                old = state.C[i].copy()
                new = update_c_row(i, state, centered, groups, hp)
                assert np.linalg.norm(new - old) < 1e-6


def test_fit_orthonormality_every_time():
    rng = np.random.default_rng(15)
    for _ in range(10):
        data, groups, r = random_instance(rng)
        rep = pc.fit(data, groups,
                     pc.Hyperparameters(lam=0.1, theta=1.0, rank=r))
        D = rep.factors.D
        assert np.linalg.norm(D.T @ D - np.eye(r)) < 1e-10


def test_unpenalized_fit_has_smallest_residual():
    rng = np.random.default_rng(16)
    data, groups, r = random_instance(rng, n=30, p=6, q=4, r=2)
    cfg = pc.SolverConfig()
    free = pc.fit(data, groups, pc.Hyperparameters(lam=0.0, theta=0.0, rank=r), cfg)
    resid_free = np.sum((pc.center_columns(data).Y
                         - pc.center_columns(data).X
                         @ pc.coefficient_matrix(free.factors)) ** 2)
    for lam, theta in ((0.5, 0.0), (0.1, 2.0), (1.0, 10.0)):
        pen = pc.fit(data, groups, pc.Hyperparameters(lam=lam, theta=theta, rank=r), cfg)
        resid_pen = np.sum((pc.center_columns(data).Y
                            - pc.center_columns(data).X
                            @ pc.coefficient_matrix(pen.factors)) ** 2)
        assert resid_free <= resid_pen + 1e-8


def test_predict_zero_model_returns_means():
    rng = np.random.default_rng(17)
    data = pc.DataPair(rng.standard_normal((20, 3)) + 5.0,
                       rng.standard_normal((20, 4)))
    rep = pc.fit(data, pc.GroupPartition.single(4),
                 pc.Hyperparameters(lam=1e6, rank=2))
    assert rep.active_rows == frozenset()
    pred = pc.predict_from_report(rng.standard_normal((7, 4)), rep)
    assert pred.shape == (7, 3)
    assert np.allclose(pred, data.Y.mean(axis=0))


def test_predict_reproduces_noiseless_training_targets():
    rng = np.random.default_rng(18)
    n, p, q, r = 40, 6, 3, 2
    X = rng.standard_normal((n, p))
    C_true = rng.standard_normal((p, r))
    D_true = random_orthonormal(rng, q, r)
    Y = X @ C_true @ D_true.T
    data = pc.DataPair(Y, X)
    rep = pc.fit(data, pc.GroupPartition.single(p),
                 pc.Hyperparameters(lam=1e-7, rank=r),
                 pc.SolverConfig(objective_tolerance=1e-14,
                                 max_outer_iterations=2000))
    pred = pc.predict_from_report(X, rep)
    assert np.abs(pred - Y).max() < 1e-6


def test_predict_single_row_and_dim_check():
    rng = np.random.default_rng(19)
    data = pc.DataPair(rng.standard_normal((10, 2)), rng.standard_normal((10, 3)))
    rep = pc.fit(data, pc.GroupPartition.single(3),
                 pc.Hyperparameters(lam=0.01, rank=1))
    out = pc.predict_from_report(rng.standard_normal(3), rep)
    assert out.shape == (1, 2)
    with pytest.raises(pc.DimensionMismatch):
        pc.predict_from_report(rng.standard_normal((4, 5)), rep)


def test_scaling_flag_roundtrip():
    rng = np.random.default_rng(20)
    X = rng.standard_normal((30, 4)) * np.array([1.0, 10.0, 0.1, 5.0])
    Y = rng.standard_normal((30, 2)) * 3.0
    data = pc.DataPair(Y, X)
    rep = pc.fit(data, pc.GroupPartition.single(4),
                 pc.Hyperparameters(lam=0.05, rank=1),
                 pc.SolverConfig(scale=True))
    pred = pc.predict_from_report(X, rep)
    assert pred.shape == Y.shape
    assert np.isfinite(pred).all()
