"""Shared helpers: random instances and independent oracle implementations."""

import numpy as np
import pytest

import pcsrrr as pc


def random_instance(rng, n=None, p=None, q=None, r=None, K=None):
    """A random problem: data, partition, and a mid-stream solver state."""
    n = n or int(rng.integers(8, 31))
    p = p or int(rng.integers(2, 9))
    q = q or int(rng.integers(2, 5))
    r = r or int(rng.integers(1, min(p, q) + 1))
    K = K or int(rng.integers(1, min(p, 3) + 1))
    X = rng.standard_normal((n, p))
    Y = rng.standard_normal((n, q))
    assignment = np.sort(rng.integers(0, K, size=p))
    for k in range(K):          # ensure no empty group
        assignment[k % p] = k
    assignment = np.sort(assignment)
    groups = pc.GroupPartition(assignment, K)
    return pc.DataPair(Y, X), groups, r


def naive_objective(data, groups, penalty, factors, hp):
    """Straightforward term-by-term objective, independent of the solver."""
    B = np.zeros((data.p, data.q))
    for a in range(data.p):
        for b in range(data.q):
            B[a, b] = sum(factors.C[a, t] * factors.D[b, t]
                          for t in range(factors.r))
    resid = data.Y - data.X @ B
    value = 0.5 * np.sum(resid ** 2)
    for i in range(data.p):
        value += hp.lam * np.sqrt(np.sum(factors.C[i] ** 2))
    if hp.theta > 0:
        for k in range(groups.K):
            Ck = factors.C[groups.indices[k]]
            A = penalty.matrices[k]
            value += 0.5 * hp.theta * np.trace(Ck.T @ A @ Ck)
    return value


def one_row_objective(c, Q, x, lam, theta, a_ii, s):
    """Objective of a single coefficient row with everything else frozen."""
    c = np.asarray(c, dtype=float)
    resid = Q - np.outer(x, c)
    return (0.5 * np.sum(resid ** 2) + lam * np.linalg.norm(c)
            + 0.5 * theta * (a_ii * np.sum(c ** 2) + 2.0 * float(s @ c)))


def brute_force_row_minimizer(Q, x, lam, theta, a_ii, s):
    """Derivative-free multistart minimization of the one-row objective.

    Independent of the closed-form update: Nelder-Mead from several starts,
    plus the origin (the objective has a kink there).
    """
    from scipy.optimize import minimize

    r = Q.shape[1]
    fun = lambda c: one_row_objective(c, Q, x, lam, theta, a_ii, s)
    starts = [np.zeros(r)]
    xtx = float(x @ x)
    if xtx > 1e-12:
        starts.append((x @ Q) / xtx)           # unpenalized least squares
    best_c, best_f = np.zeros(r), fun(np.zeros(r))
    for c0 in starts:
        res = minimize(fun, c0, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14,
                                "maxiter": 20000, "maxfev": 20000})
        if res.fun < best_f:
            best_c, best_f = res.x, res.fun
    return best_c, best_f


def build_state_for_row(data, groups, hp, C, D):
    """A SolverState positioned at (C, D), plus per-row oracle ingredients."""
    from pcsrrr.solver import SolverState
    from pcsrrr.penalty import build_penalty_set

    penalty = build_penalty_set(data, groups) if hp.theta > 0 else None
    pos = np.empty(data.p, dtype=int)
    for k in range(groups.K):
        pos[groups.indices[k]] = np.arange(groups.sizes[k])
    state = SolverState(
        C=C.copy(),
        D=D.copy(),
        W=data.Y @ D - data.X @ C,
        col_norms=np.einsum("ij,ij->j", data.X, data.X),
        penalty=penalty,
        group_of=groups.assignment,
        pos_in_group=pos,
    )
    return state, penalty


def row_oracle_ingredients(i, data, groups, C, D, penalty, theta):
    """Q_i and s_i computed literally from their definitions."""
    k = int(groups.assignment[i])
    idx = groups.indices[k]
    j = int(np.where(idx == i)[0][0])
    mask = np.ones(data.p, dtype=bool)
    mask[idx] = False
    Z = data.Y @ D - data.X[:, mask] @ C[mask]
    Q = Z.copy()
    for jj, col in enumerate(idx):
        if col != i:
            Q -= np.outer(data.X[:, col], C[col])
    if theta > 0:
        A = penalty.matrices[k]
        s = A[j] @ C[idx] - A[j, j] * C[i]
        a_ii = A[j, j]
    else:
        s = np.zeros(C.shape[1])
        a_ii = 0.0
    return Q, s, a_ii


def random_orthonormal(rng, q, r):
    M = rng.standard_normal((q, r))
    Q, _ = np.linalg.qr(M)
    return Q
