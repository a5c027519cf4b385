"""Pure-numpy insertion kernels, vectorized over the multi-start batch.

State layout per start: z = [gamma_plus (M+1) | gamma_minus (M+1)].
The smoothed certificate is

    D_eps(z) = S(z) / (alpha + beta * pen_eps(z)),
    S(z)     = -sum_j [(1-theta_j) u_j(gp_j) + theta_j u_j(gm_j)],
    u_j(x)   = sum_i w[i,j] Phi_i(x),

with pen_eps the variation sum where |.| is replaced by sqrt(.^2 + eps).
"""

from __future__ import annotations

import numpy as np


def _wphi(X, w, pos, inv_two_s2, peak, with_deriv=False):
    """Weighted kernel sums u_j(X[q, j]) for a batch of point rows.

    X: (Q, M+1). Returns U (Q, M+1), and dU when with_deriv (derivative in x).
    """
    d = X[:, None, :] - pos[None, :, None]
    e = peak[None, :, None] * np.exp(-(d * d) * inv_two_s2[None, :, None])
    u = np.einsum("qlj,lj->qj", e, w)
    if not with_deriv:
        return u
    du = np.einsum("qlj,lj->qj", -2.0 * inv_two_s2[None, :, None] * d * e, w)
    return u, du


def cert_smoothed_batch(Z, w, pos, inv_two_s2, peak, theta, alpha, beta, eps):
    """Smoothed certificate for each row of Z, shape (Q,)."""
    m1 = theta.shape[0]
    gp, gm = Z[:, :m1], Z[:, m1:]
    s = np.zeros(Z.shape[0])
    if np.any(theta != 1.0):
        s -= np.einsum("qj,j->q", _wphi(gp, w, pos, inv_two_s2, peak), 1.0 - theta)
    if np.any(theta != 0.0):
        s -= np.einsum("qj,j->q", _wphi(gm, w, pos, inv_two_s2, peak), theta)
    a = gp[:, :-1] - gm[:, 1:]
    b = gp[:, :-1] - gm[:, :-1]
    pen = np.sum(np.sqrt(a * a + eps), axis=1) + np.sum(np.sqrt(b * b + eps), axis=1)
    return s / (alpha + beta * pen)


def cert_grad_batch(Z, w, pos, inv_two_s2, peak, theta, alpha, beta, eps):
    """Smoothed certificate values and gradients, shapes (Q,) and (Q, 2(M+1))."""
    m1 = theta.shape[0]
    gp, gm = Z[:, :m1], Z[:, m1:]
    up, dup = _wphi(gp, w, pos, inv_two_s2, peak, with_deriv=True)
    um, dum = _wphi(gm, w, pos, inv_two_s2, peak, with_deriv=True)
    s = -np.einsum("qj,j->q", up, 1.0 - theta) - np.einsum("qj,j->q", um, theta)
    ds = np.concatenate([-(1.0 - theta)[None, :] * dup, -theta[None, :] * dum], axis=1)

    a = gp[:, :-1] - gm[:, 1:]
    b = gp[:, :-1] - gm[:, :-1]
    ra = np.sqrt(a * a + eps)
    rb = np.sqrt(b * b + eps)
    pen = np.sum(ra, axis=1) + np.sum(rb, axis=1)
    da, db = a / ra, b / rb
    dpen = np.zeros_like(Z)
    dpen[:, : m1 - 1] = da + db
    dpen[:, m1 + 1 :] -= da
    dpen[:, m1 : 2 * m1 - 1] -= db

    a0e = 1.0 / (alpha + beta * pen)
    vals = s * a0e
    grads = a0e[:, None] * (ds - (beta * vals)[:, None] * dpen)
    return vals, grads


def ascend_batch(
    inits,
    w,
    pos,
    inv_two_s2,
    peak,
    theta,
    alpha,
    beta,
    eps,
    lo,
    hi,
    max_iters,
    init_step,
    armijo_c,
    min_step,
    ftol,
):
    """Projected Armijo ascent of the smoothed certificate from each row of inits.

    Per-row semantics match the numba backend: backtracking from the current
    step, doubling after acceptance (capped at init_step), termination on a
    projected-stationary proposal, step underflow, the iteration cap, or two
    consecutive relative gains below ftol.
    """
    Z = np.clip(np.array(inits, dtype=np.float64), lo, hi)
    q = Z.shape[0]
    args = (w, pos, inv_two_s2, peak, theta, alpha, beta, eps)
    v, g = cert_grad_batch(Z, *args)
    step = np.full(q, float(init_step))
    stall = np.zeros(q, dtype=np.int64)
    alive = np.ones(q, dtype=bool)
    for _ in range(max_iters):
        if not alive.any():
            break
        trying = np.flatnonzero(alive)
        accepted = np.zeros(q, dtype=bool)
        z_acc = np.empty((q, Z.shape[1]))
        v_acc = np.empty(q)
        while trying.size:
            zt = np.clip(Z[trying] + step[trying, None] * g[trying], lo, hi)
            dg = np.einsum("qn,qn->q", g[trying], zt - Z[trying])
            stationary = dg <= 0.0
            if stationary.any():
                alive[trying[stationary]] = False
            live = ~stationary
            idx = trying[live]
            if idx.size:
                vt = cert_smoothed_batch(zt[live], *args)
                ok = vt >= v[idx] + armijo_c * dg[live]
                acc_idx = idx[ok]
                accepted[acc_idx] = True
                z_acc[acc_idx] = zt[live][ok]
                v_acc[acc_idx] = vt[ok]
                rej = idx[~ok]
                step[rej] *= 0.5
                under = rej[step[rej] < min_step]
                alive[under] = False
                trying = rej[step[rej] >= min_step]
            else:
                trying = np.empty(0, dtype=np.int64)
        upd = np.flatnonzero(accepted)
        if upd.size == 0:
            continue
        gain = v_acc[upd] - v[upd]
        Z[upd] = z_acc[upd]
        v_new, g_new = cert_grad_batch(Z[upd], *args)
        v[upd] = v_new
        g[upd] = g_new
        stalled = gain <= ftol * (np.abs(v[upd]) + 1e-300)
        stall[upd] = np.where(stalled, stall[upd] + 1, 0)
        alive[upd[stall[upd] >= 2]] = False
        step[upd] = np.minimum(step[upd] * 2.0, init_step)
    return Z, v
