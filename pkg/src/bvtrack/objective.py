"""Discrete fidelity, regularizer, objective and dual certificate.

Fidelity is the scaled squared Frobenius distance F_f(y) = ||y - f||_F^2 / (2(M+1)).
Atoms store effective masses m_i = lambda_i * a0(gamma_i), so the discrete
regularizer of an iterate equals the plain sum of the coefficients lambda_i of
the coefficient-optimization step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CadlagSamples,
    Measurement,
    SensorArray,
    SparseDiracMeasure,
    ThetaWeights,
    TimeGrid,
    ValidationError,
)
from .forward import forward_atom, forward_measure


@dataclass(frozen=True)
class ResidualGradient:
    """Fidelity gradient DF(K0 mu) at the current iterate (the dual variable up to sign)."""

    w: np.ndarray


def _as_matrix(w) -> np.ndarray:
    return w.w if isinstance(w, ResidualGradient) else np.asarray(w, dtype=np.float64)


def fidelity(y: Measurement, f: Measurement) -> float:
    if y.values.shape != f.values.shape:
        raise ValidationError("measurement dimensions do not match")
    d = y.values - f.values
    return float(np.sum(d * d)) / (2.0 * y.values.shape[1])


def fidelity_gradient(y: Measurement, f: Measurement) -> ResidualGradient:
    if y.values.shape != f.values.shape:
        raise ValidationError("measurement dimensions do not match")
    return ResidualGradient((y.values - f.values) / y.values.shape[1])


def discrete_variation(curve: CadlagSamples) -> float:
    """Discretized essential variation of the sampled traces.

    Sum over j = 0..M-1 of |gamma^{j,+} - gamma^{j+1,-}| + |gamma^{j,+} - gamma^{j,-}|.
    The j = M jump term is intentionally absent: gamma_plus[M] is never seen
    by the forward operator (theta_M = 1) and carries no penalty.
    """
    gp, gm = curve.gamma_plus, curve.gamma_minus
    return float(np.sum(np.abs(gp[:-1] - gm[1:])) + np.sum(np.abs(gp[:-1] - gm[:-1])))


def a0(alpha: float, beta: float, curve: CadlagSamples) -> float:
    """Extremal-point normalization (alpha + beta * variation)^-1 in (0, 1/alpha]."""
    if alpha <= 0 or beta < 0:
        raise ValidationError("need alpha > 0 and beta >= 0")
    return 1.0 / (alpha + beta * discrete_variation(curve))


def certificate_value(
    w,
    sensors: SensorArray,
    grid: TimeGrid,
    theta: ThetaWeights,
    alpha: float,
    beta: float,
    curve: CadlagSamples,
) -> float:
    """Dual certificate of a candidate curve: -a0 * <w, K0 delta_curve>_F.

    Insertion maximizes this quantity; at a solution its global maximum is <= 1
    and every active atom sits on the level-1 set.
    """
    wm = _as_matrix(w)
    k = forward_atom(sensors, grid, theta, curve).values
    if wm.shape != k.shape:
        raise ValidationError("residual gradient dimensions do not match")
    return -a0(alpha, beta, curve) * float(np.sum(wm * k))


def regularizer_value(mu: SparseDiracMeasure, alpha: float, beta: float) -> float:
    """Sum of m_i * (alpha + beta * variation_i); equals sum(lambda_i) under the
    effective-mass convention."""
    return float(
        sum(a.mass * (alpha + beta * discrete_variation(a.curve)) for a in mu.atoms)
    )


def objective_value(
    mu: SparseDiracMeasure,
    f: Measurement,
    sensors: SensorArray,
    grid: TimeGrid,
    theta: ThetaWeights,
    alpha: float,
    beta: float,
) -> float:
    """Full discrete objective J(mu) = F_f(K0 mu) + R(mu)."""
    y = forward_measure(sensors, grid, theta, mu)
    return fidelity(y, f) + regularizer_value(mu, alpha, beta)
