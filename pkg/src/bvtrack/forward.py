"""Discrete forward operator for atomic and interval-uniform measures.

The operator maps sampled traces to sensor readings,

    (K0 gamma)_{i,j} = theta_j * Phi_i(gamma^{j,-}) + (1 - theta_j) * Phi_i(gamma^{j,+}),

with Gaussian sensor kernels Phi_i. Kernels are evaluated without spatial
truncation: on the experiment domain ([0,5], sigma^2 = 0.02) the tail beyond
the domain is < 1e-100, far below everything else in the pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CadlagSamples,
    Domain1D,
    Measurement,
    PiecewiseCurve,
    SensorArray,
    SparseDiracMeasure,
    ThetaWeights,
    TimeGrid,
    ValidationError,
)

_SQRT2 = math.sqrt(2.0)
_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)


def kernel_matrix(sensors: SensorArray, x: np.ndarray) -> np.ndarray:
    """Phi_i(x_k) for all sensors i and query points x_k, shape (L, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    d = x[None, :] - sensors.positions[:, None]
    sig2 = sensors.sigma2[:, None]
    return (sensors.c[:, None] / np.sqrt(sig2)) * np.exp(-(d * d) / (2.0 * sig2))


def kernel_eval(sensors: SensorArray, i: int, x: float) -> float:
    """Evaluate the kernel of sensor i at a point."""
    if not 0 <= i < sensors.n_sensors:
        raise ValidationError(f"sensor index {i} out of range")
    sig = math.sqrt(sensors.sigma2[i])
    d = x - sensors.positions[i]
    return sensors.c[i] / sig * math.exp(-(d * d) / (2.0 * sensors.sigma2[i]))


def kernel_deriv_matrix(sensors: SensorArray, x: np.ndarray) -> np.ndarray:
    """Phi_i'(x_k) = -(x_k - x_i)/sigma_i^2 * Phi_i(x_k)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    d = x[None, :] - sensors.positions[:, None]
    return -(d / sensors.sigma2[:, None]) * kernel_matrix(sensors, x)


def kernel_interval_integral(sensors: SensorArray, i: int, a: float, b: float) -> float:
    """Exact integral of Phi_i over [a, b] via the Gaussian antiderivative."""
    if not 0 <= i < sensors.n_sensors:
        raise ValidationError(f"sensor index {i} out of range")
    if a > b:
        raise ValidationError(f"interval endpoints out of order: {a} > {b}")
    sig = math.sqrt(sensors.sigma2[i])
    c = sensors.positions[i]
    scale = sensors.c[i] * _SQRT_HALF_PI
    return scale * (math.erf((b - c) / (_SQRT2 * sig)) - math.erf((a - c) / (_SQRT2 * sig)))


def _interval_integral_all(sensors: SensorArray, a: float, b: float) -> np.ndarray:
    sig = np.sqrt(sensors.sigma2)
    lo = (a - sensors.positions) / (_SQRT2 * sig)
    hi = (b - sensors.positions) / (_SQRT2 * sig)
    erf = np.vectorize(math.erf, otypes=[np.float64])
    return sensors.c * _SQRT_HALF_PI * (erf(hi) - erf(lo))


def _check_dims(sensors: SensorArray, grid: TimeGrid, theta: ThetaWeights) -> None:
    if theta.theta.size != grid.points.size:
        raise ValidationError("theta length does not match the time grid")


def forward_atom(
    sensors: SensorArray, grid: TimeGrid, theta: ThetaWeights, curve: CadlagSamples
) -> Measurement:
    """Apply K0 to a unit Dirac along sampled traces."""
    _check_dims(sensors, grid, theta)
    if curve.gamma_plus.size != grid.points.size:
        raise ValidationError("trace length does not match the time grid")
    th = theta.theta[None, :]
    vals = th * kernel_matrix(sensors, curve.gamma_minus) + (1.0 - th) * kernel_matrix(
        sensors, curve.gamma_plus
    )
    return Measurement(vals)


def forward_measure(
    sensors: SensorArray, grid: TimeGrid, theta: ThetaWeights, mu: SparseDiracMeasure
) -> Measurement:
    """Apply K0 to an atomic measure; linear in the masses."""
    _check_dims(sensors, grid, theta)
    out = np.zeros((sensors.n_sensors, grid.points.size))
    for atom in mu.atoms:
        out += atom.mass * forward_atom(sensors, grid, theta, atom.curve).values
    return Measurement(out)


@dataclass(frozen=True)
class IntervalMeasureSpec:
    """Interval-uniform slices: mu_t = Lebesgue restricted to [zeta_lo(t), zeta_hi(t)]."""

    zeta_lo: PiecewiseCurve
    zeta_hi: PiecewiseCurve


def forward_interval_measure(
    sensors: SensorArray,
    grid: TimeGrid,
    theta: ThetaWeights,
    spec: IntervalMeasureSpec,
    dom: Domain1D | None = None,
) -> Measurement:
    """Apply K0 to an interval-uniform measure via exact kernel integrals.

    Entry (i, j) combines the integral over the left-limit interval (weight
    theta_j) and over the right-continuous interval (weight 1 - theta_j).
    """
    _check_dims(sensors, grid, theta)
    m1 = grid.points.size
    out = np.zeros((sensors.n_sensors, m1))
    for j, t in enumerate(grid.points):
        a_p, b_p = spec.zeta_lo.value(t), spec.zeta_hi.value(t)
        a_m, b_m = spec.zeta_lo.left_limit(t), spec.zeta_hi.left_limit(t)
        for a, b in ((a_p, b_p), (a_m, b_m)):
            if a > b:
                raise ValidationError(f"interval boundaries cross at t={t}: [{a}, {b}]")
            if dom is not None and not (dom.contains(a) and dom.contains(b)):
                raise ValidationError(f"interval boundary leaves the domain at t={t}")
        th = theta.theta[j]
        col = np.zeros(sensors.n_sensors)
        if th != 0.0:
            col += th * _interval_integral_all(sensors, a_m, b_m)
        if th != 1.0:
            col += (1.0 - th) * _interval_integral_all(sensors, a_p, b_p)
        out[:, j] = col
    return Measurement(out)
