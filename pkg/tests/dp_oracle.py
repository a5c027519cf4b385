"""Test-only global oracle for the insertion problem.

Maximizes the exact certificate S(curve) / (alpha + beta * pen(curve)) over
grid-valued trace vectors by Dinkelbach fractional programming: each inner
problem is separable along the chain

    gm_0 - gp_0 - gm_1 - gp_1 - ... - gm_M

(the inert gp_M is dropped) with node data terms and |.| edge costs, solved
exactly by dynamic programming with an O(G) distance-transform per node.
Grid restriction makes the result a certified lower bound on the continuous
maximum, tight to O(dx^2) for smooth data terms.
"""

import numpy as np

from bvtrack.forward import kernel_matrix


def _lower_envelope_pass(v, cost_per_cell):
    """In place: v[i] = max_j v[j] - cost_per_cell * |i - j| via two sweeps."""
    for i in range(1, v.size):
        cand = v[i - 1] - cost_per_cell
        if cand > v[i]:
            v[i] = cand
    for i in range(v.size - 2, -1, -1):
        cand = v[i + 1] - cost_per_cell
        if cand > v[i]:
            v[i] = cand
    return v


def _chain_argmax(potentials, lam_beta, xs):
    """Maximize sum(potentials[t][x_t]) - lam_beta * sum |x_{t+1} - x_t|."""
    dx = xs[1] - xs[0]
    n = len(potentials)
    g = xs.size
    back = np.zeros((n, g), dtype=np.int64)
    v = potentials[0].copy()
    for t in range(1, n):
        # distance transform with explicit argmax bookkeeping
        best = v.copy()
        arg = np.arange(g)
        for i in range(1, g):
            cand = best[i - 1] - lam_beta * dx
            if cand > best[i]:
                best[i] = cand
                arg[i] = arg[i - 1]
        for i in range(g - 2, -1, -1):
            cand = best[i + 1] - lam_beta * dx
            if cand > best[i]:
                best[i] = cand
                arg[i] = arg[i + 1]
        back[t] = arg
        v = potentials[t] + best
    path = np.zeros(n, dtype=np.int64)
    path[-1] = int(np.argmax(v))
    for t in range(n - 1, 0, -1):
        path[t - 1] = back[t][path[t]]
    return float(v[path[-1]]), path


def insertion_oracle(w, sensors, theta, alpha, beta, lo, hi, grid_size=2048, iters=60):
    """Global certificate maximum over grid-valued trace pairs.

    Returns (value, gamma_plus, gamma_minus) of the best curve found by
    Dinkelbach iterations with exact chain DP inner solves.
    """
    xs = np.linspace(lo, hi, grid_size)
    km = kernel_matrix(sensors, xs)  # (L, G)
    th = theta.theta
    m1 = th.size
    # node order: gm_0, gp_0, gm_1, gp_1, ..., gm_M  (gp_M inert, excluded)
    potentials = []
    node_kind = []  # (j, is_plus)
    for j in range(m1):
        potentials.append(-th[j] * (w[:, j] @ km))
        node_kind.append((j, False))
        if j < m1 - 1:
            potentials.append(-(1.0 - th[j]) * (w[:, j] @ km))
            node_kind.append((j, True))

    def split_path(path):
        gp = np.empty(m1)
        gm = np.empty(m1)
        for val, (j, is_plus) in zip(xs[path], node_kind):
            if is_plus:
                gp[j] = val
            else:
                gm[j] = val
        gp[m1 - 1] = gm[m1 - 1]  # inert coordinate, reported canonically
        return gp, gm

    def exact_parts(gp, gm):
        s = 0.0
        for j in range(m1):
            col = kernel_matrix(sensors, np.array([gm[j], gp[j]]))
            s -= th[j] * float(w[:, j] @ col[:, 0])
            s -= (1.0 - th[j]) * float(w[:, j] @ col[:, 1])
        pen = float(
            np.sum(np.abs(gp[:-1] - gm[1:])) + np.sum(np.abs(gp[:-1] - gm[:-1]))
        )
        return s, pen

    lam = 0.0
    best = (-np.inf, None, None)
    for _ in range(iters):
        shifted = [p - lam * 0.0 for p in potentials]  # node terms unchanged
        val, path = _chain_argmax(shifted, lam * beta, xs)
        gp, gm = split_path(path)
        s, pen = exact_parts(gp, gm)
        cert = s / (alpha + beta * pen)
        if cert > best[0]:
            best = (cert, gp, gm)
        g_of_lam = val - lam * alpha
        if abs(g_of_lam) < 1e-13:
            break
        new_lam = s / (alpha + beta * pen)
        if abs(new_lam - lam) < 1e-14:
            break
        lam = new_lam
    return best
