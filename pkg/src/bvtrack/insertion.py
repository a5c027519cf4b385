"""Insertion step: multi-start projected ascent of the dual certificate.

The certificate is maximized over both trace vectors jointly (2(M+1) free
variables) with the absolute values in the variation sum smoothed as
sqrt(z^2 + eps). Candidate selection among the starts always uses the exact
(non-smoothed) certificate so the stopping test is not biased by eps.

After ascent each candidate is canonicalized: gamma_minus[0] is snapped onto
gamma_plus[0] (a cadlag curve has no left limit at t=0) and the inert
gamma_plus[M] onto gamma_minus[M]. The snap is kept only when it does not
decrease the smoothed certificate, which preserves the ascent contract.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from . import accel
from .accel import numpy_backend as _reference
from .core import (
    CadlagSamples,
    Domain1D,
    NumericalError,
    SensorArray,
    SolverConfig,
    ThetaWeights,
    TimeGrid,
    ValidationError,
)
from .forward import kernel_matrix
from .objective import _as_matrix, a0, certificate_value
from .rng import SplitMix64, derive_seed

logger = logging.getLogger(__name__)


def smoothed_abs(z: float, eps: float) -> float:
    """sqrt(z^2 + eps), the smooth surrogate of |z|."""
    if eps <= 0:
        raise ValidationError("smoothing parameter must be positive")
    return math.sqrt(z * z + eps)


def smoothed_variation(curve: CadlagSamples, eps: float) -> float:
    """discrete_variation with |.| replaced by the smooth surrogate."""
    gp, gm = curve.gamma_plus, curve.gamma_minus
    a = gp[:-1] - gm[1:]
    b = gp[:-1] - gm[:-1]
    return float(np.sum(np.sqrt(a * a + eps)) + np.sum(np.sqrt(b * b + eps)))


def _kernel_params(sensors: SensorArray):
    sig = np.sqrt(sensors.sigma2)
    return sensors.positions, 1.0 / (2.0 * sensors.sigma2), sensors.c / sig


def _z_from_curve(curve: CadlagSamples) -> np.ndarray:
    return np.concatenate([curve.gamma_plus, curve.gamma_minus])


def _curve_from_z(z: np.ndarray) -> CadlagSamples:
    m1 = z.size // 2
    return CadlagSamples(gamma_plus=z[:m1], gamma_minus=z[m1:])


def _check_w(w, grid: TimeGrid, sensors: SensorArray) -> np.ndarray:
    wm = _as_matrix(w)
    if wm.shape != (sensors.n_sensors, grid.points.size):
        raise ValidationError("residual gradient dimensions do not match")
    if not np.all(np.isfinite(wm)):
        raise NumericalError("non-finite residual gradient in the insertion step")
    return wm


def certificate_smoothed(
    w, sensors, grid, theta, alpha, beta, eps, curve: CadlagSamples
) -> float:
    """Certificate with the smoothed variation in the normalization."""
    wm = _check_w(w, grid, sensors)
    pos, i2s2, peak = _kernel_params(sensors)
    vals = _reference.cert_smoothed_batch(
        _z_from_curve(curve)[None, :], wm, pos, i2s2, peak, theta.theta, alpha, beta, eps
    )
    return float(vals[0])


def certificate_gradient(
    w, sensors, grid, theta, alpha, beta, eps, curve: CadlagSamples
) -> np.ndarray:
    """Exact gradient of certificate_smoothed in (gamma_plus, gamma_minus).

    Layout: first M+1 entries for gamma_plus, last M+1 for gamma_minus.
    """
    wm = _check_w(w, grid, sensors)
    pos, i2s2, peak = _kernel_params(sensors)
    _, grads = _reference.cert_grad_batch(
        _z_from_curve(curve)[None, :], wm, pos, i2s2, peak, theta.theta, alpha, beta, eps
    )
    return grads[0]


def _resolve_ascent(config: SolverConfig, dom: Domain1D):
    a = config.ascent
    init_step = a.init_step if a.init_step is not None else 0.3 * dom.diam
    return a.max_iters, init_step, a.armijo_c, a.min_step, a.ftol


def _dp_certificate_seed(wm, sensors, theta, alpha, beta, dom, grid_size):
    """Deterministic start candidate from fractional programming on a grid.

    Dinkelbach iterations reduce the certificate ratio to chain problems
    node-potential(x_t) - lam*beta*|x_{t+1} - x_t| solved exactly by dynamic
    programming (prefix-max distance transforms). The grid-valued maximizer
    seeds the continuous ascent; off-grid refinement stays with the ascent.
    """
    xs = np.linspace(dom.lo, dom.hi, grid_size)
    km = kernel_matrix(sensors, xs)
    th = theta.theta
    m1 = th.size
    pots = []
    for j in range(m1):
        pots.append(-th[j] * (wm[:, j] @ km))
        if j < m1 - 1:
            pots.append(-(1.0 - th[j]) * (wm[:, j] @ km))
    pots = np.asarray(pots)
    n = pots.shape[0]
    dx = xs[1] - xs[0]
    idx = np.arange(grid_size, dtype=np.float64)

    def chain_max(lam_beta):
        vs = np.empty((n, grid_size))
        vs[0] = pots[0]
        c = lam_beta * dx
        for t in range(1, n):
            fwd = np.maximum.accumulate(vs[t - 1] + c * idx) - c * idx
            bwd = (np.maximum.accumulate((vs[t - 1] - c * idx)[::-1]) + c * idx[::-1])[::-1]
            vs[t] = pots[t] + np.maximum(fwd, bwd)
        path = np.empty(n, dtype=np.int64)
        path[-1] = int(np.argmax(vs[-1]))
        for t in range(n - 1, 0, -1):
            scores = vs[t - 1] - lam_beta * np.abs(xs[path[t]] - xs)
            path[t - 1] = int(np.argmax(scores))
        return float(vs[-1][path[-1]]), path

    def split(path):
        gp = np.empty(m1)
        gm = np.empty(m1)
        node = 0
        for j in range(m1):
            gm[j] = xs[path[node]]
            node += 1
            if j < m1 - 1:
                gp[j] = xs[path[node]]
                node += 1
        gp[m1 - 1] = gm[m1 - 1]
        return CadlagSamples(gamma_plus=gp, gamma_minus=gm)

    lam = 0.0
    best_val, best_curve = -np.inf, None
    for _ in range(25):
        val, path = chain_max(lam * beta)
        curve = split(path)
        s = -float(np.sum(wm * (th * kernel_matrix(sensors, curve.gamma_minus)
                                + (1.0 - th) * kernel_matrix(sensors, curve.gamma_plus))))
        cert = s * a0(alpha, beta, curve)
        if cert > best_val:
            best_val, best_curve = cert, curve
        if abs(val - lam * alpha) < 1e-13 or abs(cert - lam) < 1e-14:
            break
        lam = cert
    return best_curve


def _finalize_batch(Z, vals, wm, pos, i2s2, peak, theta, alpha, beta, eps):
    """Snap the anchor/tail coordinates where that does not lose certificate."""
    m1 = theta.size
    z_snap = Z.copy()
    z_snap[:, m1] = Z[:, 0]  # gamma_minus[0] := gamma_plus[0]
    z_snap[:, m1 - 1] = Z[:, 2 * m1 - 1]  # gamma_plus[M] := gamma_minus[M]
    v_snap = accel.cert_smoothed_batch(z_snap, wm, pos, i2s2, peak, theta, alpha, beta, eps)
    take = v_snap >= vals
    z_out = np.where(take[:, None], z_snap, Z)
    return z_out, np.where(take, v_snap, vals)


def _ascend_pipeline(inits, wm, pos, i2s2, peak, theta, config, dom):
    """Smoothed ascent, optional sharp-penalty polish, anchor snap.

    The polish pass is kept per start only when it does not drop the
    eps_smooth certificate below its value at the initialization, so the
    ascent contract (final smoothed certificate >= initial) survives the
    continuation.
    """
    eps = config.eps_smooth
    alpha, beta = config.alpha, config.beta
    max_iters, init_step, armijo_c, min_step, ftol = _resolve_ascent(config, dom)
    common = (wm, pos, i2s2, peak, theta)
    z0 = np.clip(np.asarray(inits, dtype=np.float64), dom.lo, dom.hi)
    v0 = accel.cert_smoothed_batch(z0, *common, alpha, beta, eps)
    Z, vals = accel.ascend_batch(
        z0, *common, alpha, beta, eps, dom.lo, dom.hi,
        max_iters, init_step, armijo_c, min_step, ftol,
    )
    a = config.ascent
    if a.polish_iters > 0 and a.eps_polish < eps:
        zp, _ = accel.ascend_batch(
            Z.copy(), *common, alpha, beta, a.eps_polish, dom.lo, dom.hi,
            a.polish_iters, init_step, armijo_c, min_step, ftol,
        )
        vp = accel.cert_smoothed_batch(zp, *common, alpha, beta, eps)
        take = vp >= v0
        Z = np.where(take[:, None], zp, Z)
        vals = np.where(take, vp, vals)
    Z, vals = _finalize_batch(Z, vals, *common, alpha, beta, eps)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("non-finite certificate after ascent")
    return Z, vals


def gradient_ascent(
    init: CadlagSamples,
    w,
    sensors: SensorArray,
    grid: TimeGrid,
    theta: ThetaWeights,
    dom: Domain1D,
    config: SolverConfig,
) -> tuple[CadlagSamples, float]:
    """Single ascent run; returns the curve and its smoothed certificate."""
    if not init.within(dom):
        raise ValidationError("ascent initialization leaves the domain")
    wm = _check_w(w, grid, sensors)
    pos, i2s2, peak = _kernel_params(sensors)
    Z, vals = _ascend_pipeline(
        _z_from_curve(init)[None, :], wm, pos, i2s2, peak, theta.theta, config, dom
    )
    return _curve_from_z(Z[0]), float(vals[0])


def multi_start_insertion(
    w,
    sensors: SensorArray,
    grid: TimeGrid,
    theta: ThetaWeights,
    dom: Domain1D,
    config: SolverConfig,
    seed: int | None = None,
    extra_inits: tuple[CadlagSamples, ...] = (),
    log_histogram: bool = False,
) -> tuple[CadlagSamples, float]:
    """Best curve over q_starts seeded random initializations.

    Each random start begins at a constant trace pair gamma_plus =
    gamma_minus = c with c drawn uniformly in the domain: a constant curve
    carries no variation, so the certificate normalization starts at its
    maximum 1/alpha and the ascent bends the curve only where the data pays
    for it. The outer loop additionally passes its active atoms through
    extra_inits, which warm-starts the search near previously found shapes.
    Per-start seeds derive from the master seed by start index, so the result
    does not depend on any execution order; ties in the exact certificate go
    to the lowest start index (random starts come first).
    """
    wm = _check_w(w, grid, sensors)
    pos, i2s2, peak = _kernel_params(sensors)
    master = config.seed if seed is None else seed
    m1 = grid.points.size
    q = config.q_starts
    inits = np.empty((q + len(extra_inits), 2 * m1))
    for k in range(q):
        stream = SplitMix64(derive_seed(master, k))
        inits[k] = stream.uniform(1, dom.lo, dom.hi)[0]
    for k, curve in enumerate(extra_inits):
        inits[q + k] = _z_from_curve(curve)
    if config.ascent.dp_grid > 0:
        seed_curve = _dp_certificate_seed(
            wm, sensors, theta, config.alpha, config.beta, dom, config.ascent.dp_grid
        )
        inits = np.vstack([inits, _z_from_curve(seed_curve)[None, :]])
    z_init = np.clip(inits.copy(), dom.lo, dom.hi)
    Z, vals = _ascend_pipeline(inits, wm, pos, i2s2, peak, theta.theta, config, dom)

    def _exact(z):
        return certificate_value(
            wm, sensors, grid, theta, config.alpha, config.beta, _curve_from_z(z)
        )

    exact = np.array([_exact(z) for z in Z])
    # the ascent is monotone in the smoothed certificate, not the exact one:
    # never return less than an initialization was already worth
    init_exact = np.array([_exact(z) for z in z_init])
    worse = exact < init_exact
    if np.any(worse):
        Z[worse] = z_init[worse]
        exact[worse] = init_exact[worse]
    a = config.ascent
    if a.polish_iters > 0:
        # deep-polish the champion only: returned-curve precision is what keeps
        # later insertions from bracketing the same maximizer at finite offsets
        best = int(np.argmax(exact))
        max_iters, init_step, armijo_c, min_step, _ = _resolve_ascent(config, dom)
        zc, _ = accel.ascend_batch(
            Z[best][None, :].copy(), wm, pos, i2s2, peak, theta.theta,
            config.alpha, config.beta, a.eps_polish, dom.lo, dom.hi,
            4 * a.polish_iters, init_step, armijo_c, min_step, 0.0,
        )
        zc, _ = _finalize_batch(
            zc, np.full(1, -np.inf), wm, pos, i2s2, peak, theta.theta,
            config.alpha, config.beta, config.eps_smooth,
        )
        if _exact(zc[0]) > exact[best]:
            Z[best] = zc[0]
            exact[best] = _exact(zc[0])
    if log_histogram and logger.isEnabledFor(logging.DEBUG):
        counts, edges = np.histogram(exact, bins=min(10, exact.size))
        logger.debug(
            "insertion certificate histogram: %s",
            "; ".join(f"[{a:.3g},{b:.3g}):{c}" for a, b, c in zip(edges, edges[1:], counts)),
        )
    best = int(np.argmax(exact))
    return _curve_from_z(Z[best]), float(exact[best])
