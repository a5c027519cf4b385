"""Numba-compiled insertion kernels (per-start loops, no fastmath).

Same contract as numpy_backend; see the layout notes there. The kernel sums
run over a transposed copy of the residual matrix so the sensor loop is
contiguous.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _cert_val(z, w_t, pos, inv_two_s2, peak, theta, alpha, beta, eps):
    m1 = theta.shape[0]
    n_sens = pos.shape[0]
    s = 0.0
    for j in range(m1):
        tj = theta[j]
        if tj != 1.0:
            x = z[j]
            acc = 0.0
            for i in range(n_sens):
                d = x - pos[i]
                acc += w_t[j, i] * (peak[i] * np.exp(-d * d * inv_two_s2[i]))
            s -= (1.0 - tj) * acc
        if tj != 0.0:
            x = z[m1 + j]
            acc = 0.0
            for i in range(n_sens):
                d = x - pos[i]
                acc += w_t[j, i] * (peak[i] * np.exp(-d * d * inv_two_s2[i]))
            s -= tj * acc
    pen = 0.0
    for j in range(m1 - 1):
        a = z[j] - z[m1 + j + 1]
        b = z[j] - z[m1 + j]
        pen += np.sqrt(a * a + eps) + np.sqrt(b * b + eps)
    return s / (alpha + beta * pen)


@njit(cache=True)
def _cert_val_grad(z, w_t, pos, inv_two_s2, peak, theta, alpha, beta, eps, g):
    m1 = theta.shape[0]
    n_sens = pos.shape[0]
    n = 2 * m1
    s = 0.0
    for j in range(m1):
        tj = theta[j]
        g[j] = 0.0
        g[m1 + j] = 0.0
        if tj != 1.0:
            x = z[j]
            acc = 0.0
            dacc = 0.0
            for i in range(n_sens):
                d = x - pos[i]
                e = peak[i] * np.exp(-d * d * inv_two_s2[i])
                acc += w_t[j, i] * e
                dacc += w_t[j, i] * (-2.0 * inv_two_s2[i] * d) * e
            s -= (1.0 - tj) * acc
            g[j] = -(1.0 - tj) * dacc
        if tj != 0.0:
            x = z[m1 + j]
            acc = 0.0
            dacc = 0.0
            for i in range(n_sens):
                d = x - pos[i]
                e = peak[i] * np.exp(-d * d * inv_two_s2[i])
                acc += w_t[j, i] * e
                dacc += w_t[j, i] * (-2.0 * inv_two_s2[i] * d) * e
            s -= tj * acc
            g[m1 + j] = -tj * dacc
    gpen = np.zeros(n)
    pen = 0.0
    for j in range(m1 - 1):
        a = z[j] - z[m1 + j + 1]
        b = z[j] - z[m1 + j]
        ra = np.sqrt(a * a + eps)
        rb = np.sqrt(b * b + eps)
        pen += ra + rb
        da = a / ra
        db = b / rb
        gpen[j] += da + db
        gpen[m1 + j + 1] -= da
        gpen[m1 + j] -= db
    a0e = 1.0 / (alpha + beta * pen)
    val = s * a0e
    bd = beta * val
    for i in range(n):
        g[i] = a0e * (g[i] - bd * gpen[i])
    return val


@njit(cache=True)
def _ascend_one(
    z,
    w_t,
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
    n = z.shape[0]
    for i in range(n):
        z[i] = min(max(z[i], lo), hi)
    g = np.zeros(n)
    z_try = np.empty(n)
    v = _cert_val_grad(z, w_t, pos, inv_two_s2, peak, theta, alpha, beta, eps, g)
    step = init_step
    stall = 0
    for _ in range(max_iters):
        accepted = False
        v_acc = v
        while step >= min_step:
            dg = 0.0
            for i in range(n):
                zt = min(max(z[i] + step * g[i], lo), hi)
                z_try[i] = zt
                dg += g[i] * (zt - z[i])
            if dg <= 0.0:
                return v  # projected stationary point
            v_try = _cert_val(z_try, w_t, pos, inv_two_s2, peak, theta, alpha, beta, eps)
            if v_try >= v + armijo_c * dg:
                accepted = True
                v_acc = v_try
                break
            step *= 0.5
        if not accepted:
            return v  # step size underflow
        gain = v_acc - v
        for i in range(n):
            z[i] = z_try[i]
        v = _cert_val_grad(z, w_t, pos, inv_two_s2, peak, theta, alpha, beta, eps, g)
        if gain <= ftol * (abs(v) + 1e-300):
            stall += 1
            if stall >= 2:
                return v
        else:
            stall = 0
        step = min(step * 2.0, init_step)
    return v


@njit(cache=True)
def _ascend_batch(
    z_all, w_t, pos, inv_two_s2, peak, theta, alpha, beta, eps, lo, hi,
    max_iters, init_step, armijo_c, min_step, ftol,
):
    q = z_all.shape[0]
    vals = np.empty(q)
    for k in range(q):
        vals[k] = _ascend_one(
            z_all[k], w_t, pos, inv_two_s2, peak, theta, alpha, beta, eps,
            lo, hi, max_iters, init_step, armijo_c, min_step, ftol,
        )
    return vals


def _prep(w, pos, inv_two_s2, peak, theta):
    return (
        np.ascontiguousarray(np.asarray(w, dtype=np.float64).T),
        np.ascontiguousarray(pos, dtype=np.float64),
        np.ascontiguousarray(inv_two_s2, dtype=np.float64),
        np.ascontiguousarray(peak, dtype=np.float64),
        np.ascontiguousarray(theta, dtype=np.float64),
    )


def cert_smoothed_batch(Z, w, pos, inv_two_s2, peak, theta, alpha, beta, eps):
    w_t, pos, i2s2, peak, theta = _prep(w, pos, inv_two_s2, peak, theta)
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    return np.array(
        [_cert_val(Z[k], w_t, pos, i2s2, peak, theta, alpha, beta, eps) for k in range(Z.shape[0])]
    )


def cert_grad_batch(Z, w, pos, inv_two_s2, peak, theta, alpha, beta, eps):
    w_t, pos, i2s2, peak, theta = _prep(w, pos, inv_two_s2, peak, theta)
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    vals = np.empty(Z.shape[0])
    grads = np.empty_like(Z)
    for k in range(Z.shape[0]):
        vals[k] = _cert_val_grad(
            Z[k], w_t, pos, i2s2, peak, theta, alpha, beta, eps, grads[k]
        )
    return vals, grads


def ascend_batch(
    inits, w, pos, inv_two_s2, peak, theta, alpha, beta, eps, lo, hi,
    max_iters, init_step, armijo_c, min_step, ftol,
):
    w_t, pos, i2s2, peak, theta = _prep(w, pos, inv_two_s2, peak, theta)
    z_all = np.array(inits, dtype=np.float64, order="C")
    vals = _ascend_batch(
        z_all, w_t, pos, i2s2, peak, theta,
        float(alpha), float(beta), float(eps), float(lo), float(hi),
        int(max_iters), float(init_step), float(armijo_c), float(min_step), float(ftol),
    )
    return z_all, vals
