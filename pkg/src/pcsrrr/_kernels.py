"""Compiled coordinate-descent sweep kernels.

The Gauss-Seidel row loop dominates fit time; these numba kernels run the
same arithmetic as the pure-Python row update, visiting rows in the given
order and maintaining the residual incrementally.  Rows whose quadratic
coefficient is below the degeneracy floor are frozen at zero and flagged.
"""

import numba
import numpy as np

DEGENERATE_DENOM = 1e-14


@numba.njit(cache=True)
def group_sweep(X, C, W, col_norms, lam, theta, a_full, order, degenerate):
    """One full pass over the rows of C; W tracks Y @ D - X @ C."""
    n, p = X.shape
    r = C.shape[1]
    u = np.empty(r)
    for oi in range(order.size):
        i = order[oi]
        for t in range(r):
            acc = 0.0
            for m in range(n):
                acc += X[m, i] * W[m, t]
            u[t] = acc + col_norms[i] * C[i, t]
        denom = col_norms[i]
        if theta > 0.0:
            aii = a_full[i, i]
            denom += theta * aii
            for t in range(r):
                s = 0.0
                for j in range(p):
                    s += a_full[i, j] * C[j, t]
                s -= aii * C[i, t]
                u[t] -= theta * s
        if denom <= DEGENERATE_DENOM:
            degenerate[i] = True
            scale = 0.0
        else:
            u_norm = 0.0
            for t in range(r):
                u_norm += u[t] * u[t]
            u_norm = np.sqrt(u_norm)
            if u_norm <= lam:
                scale = 0.0
            else:
                scale = (1.0 - lam / u_norm) / denom
        changed = False
        for t in range(r):
            new = scale * u[t]
            if new != C[i, t]:
                changed = True
        if changed:
            for t in range(r):
                new = scale * u[t]
                delta = new - C[i, t]
                if delta != 0.0:
                    for m in range(n):
                        W[m, t] -= X[m, i] * delta
                C[i, t] = new


@numba.njit(cache=True)
def full_rank_sweep(X, B, W, col_norms, thr, ridge, degenerate):
    """One pass over the rows of a full-rank coefficient matrix.

    W tracks the residual Y - X @ B; thr and ridge are the soft threshold
    and the quadratic shift (lam * alpha and lam * (1 - alpha)).
    """
    n, p = X.shape
    q = B.shape[1]
    u = np.empty(q)
    for i in range(p):
        for t in range(q):
            acc = 0.0
            for m in range(n):
                acc += X[m, i] * W[m, t]
            u[t] = acc + col_norms[i] * B[i, t]
        denom = col_norms[i] + ridge
        if denom <= DEGENERATE_DENOM:
            degenerate[i] = True
            scale = 0.0
        else:
            u_norm = 0.0
            for t in range(q):
                u_norm += u[t] * u[t]
            u_norm = np.sqrt(u_norm)
            if u_norm <= thr:
                scale = 0.0
            else:
                scale = (1.0 - thr / u_norm) / denom
        changed = False
        for t in range(q):
            if scale * u[t] != B[i, t]:
                changed = True
        if changed:
            for t in range(q):
                new = scale * u[t]
                delta = new - B[i, t]
                if delta != 0.0:
                    for m in range(n):
                        W[m, t] -= X[m, i] * delta
                B[i, t] = new
