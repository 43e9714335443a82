"""Compiled coordinate-descent kernel for weighted lasso on a Gram matrix.

Solves  min_b  b'Gb - 2c'b + 2 * sum_j pen_j |b_j|,  which is the lasso
objective (1/n)||y - Xb||^2 + 2 lam sum_j w_j |b_j| up to the constant
||y||^2/n when G = X'X/n, c = X'y/n and pen = lam * w.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _objective(G, c, pen, beta):
    p = beta.shape[0]
    quad = 0.0
    for j in range(p):
        if beta[j] != 0.0:
            s = 0.0
            for k in range(p):
                s += G[j, k] * beta[k]
            quad += beta[j] * s
    lin = 0.0
    l1 = 0.0
    for j in range(p):
        lin += c[j] * beta[j]
        l1 += pen[j] * abs(beta[j])
    return quad - 2.0 * lin + 2.0 * l1


@njit(cache=True, nogil=True)
def _sweep(G, grad, pen, beta, full, active):
    # one cyclic pass; grad_j holds c_j - sum_k G_jk beta_k
    p = beta.shape[0]
    max_delta = 0.0
    for j in range(p):
        if not full and not active[j]:
            continue
        gjj = G[j, j]
        old = beta[j]
        if gjj <= 0.0:
            new = 0.0
        else:
            z = grad[j] + gjj * old
            if z > pen[j]:
                new = (z - pen[j]) / gjj
            elif z < -pen[j]:
                new = (z + pen[j]) / gjj
            else:
                new = 0.0
        d = new - old
        if d != 0.0:
            for k in range(p):
                grad[k] -= G[j, k] * d
            beta[j] = new
            if abs(d) > max_delta:
                max_delta = abs(d)
    return max_delta


@njit(cache=True, nogil=True)
def cd_gram(G, c, pen, beta, tol, max_sweeps, track, obj_trace):
    """Run cyclic coordinate descent in place on ``beta``.

    Full sweeps alternate with passes restricted to the current active set.
    Convergence is declared only after a full sweep whose largest coordinate
    change is below ``tol``.  Returns ``(sweeps, converged)``.
    """
    p = beta.shape[0]
    grad = c.copy()
    for j in range(p):
        if beta[j] != 0.0:
            for k in range(p):
                grad[k] -= G[j, k] * beta[j]
    active = np.zeros(p, dtype=np.bool_)
    sweeps = 0
    while sweeps < max_sweeps:
        delta = _sweep(G, grad, pen, beta, True, active)
        if track:
            obj_trace[sweeps] = _objective(G, c, pen, beta)
        sweeps += 1
        if delta < tol:
            return sweeps, True
        for j in range(p):
            active[j] = beta[j] != 0.0
        while sweeps < max_sweeps:
            delta = _sweep(G, grad, pen, beta, False, active)
            if track:
                obj_trace[sweeps] = _objective(G, c, pen, beta)
            sweeps += 1
            if delta < tol:
                break
    return sweeps, False
