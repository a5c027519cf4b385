"""Coefficient optimization: nonnegative L1-penalized least squares.

Solves min_{lambda >= 0} ||G lambda - vec(f)||^2 / (2(M+1)) + sum(lambda)
over the active atoms by projected gradient with a fixed 1/L step. The
spectral norm of G^T G / (M+1) comes from 50 power iterations (the Gram
matrix is entrywise nonnegative, so the all-ones start cannot be orthogonal
to the Perron eigenvector); a 5% inflation guards the step against any
residual underestimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CadlagSamples,
    CoeffConfig,
    Measurement,
    SensorArray,
    ThetaWeights,
    TimeGrid,
    ValidationError,
)
from .forward import forward_atom
from .objective import a0


@dataclass(frozen=True)
class AtomResponseMatrix:
    """Columns a0(gamma_i) * vec(K0 delta_{gamma_i}), shape (L*(M+1), N)."""

    columns: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=np.float64)
        if cols.ndim != 2 or cols.shape[1] < 1:
            raise ValidationError("atom response matrix must have at least one column")
        if not np.all(np.isfinite(cols)):
            raise ValidationError("atom response matrix must be finite")
        object.__setattr__(self, "columns", cols)

    @property
    def n_atoms(self) -> int:
        return self.columns.shape[1]


def assemble_atom_responses(
    curves: list[CadlagSamples],
    sensors: SensorArray,
    grid: TimeGrid,
    theta: ThetaWeights,
    alpha: float,
    beta: float,
) -> AtomResponseMatrix:
    if not curves:
        raise ValidationError("need at least one curve to assemble responses")
    cols = np.column_stack(
        [
            a0(alpha, beta, c) * forward_atom(sensors, grid, theta, c).values.ravel()
            for c in curves
        ]
    )
    return AtomResponseMatrix(cols)


@dataclass(frozen=True)
class CoeffResult:
    lam: np.ndarray
    iterations: int
    kkt: float
    converged: bool


def _gradient(gram: np.ndarray, gtf: np.ndarray, lam: np.ndarray, m1: int) -> np.ndarray:
    return (gram @ lam - gtf) / m1 + 1.0


def kkt_residual(g: AtomResponseMatrix, f: Measurement, m: int, lam: np.ndarray) -> float:
    """Max KKT violation: |grad_i| on the support, max(-grad_i, 0) off it."""
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam < 0):
        raise ValidationError("coefficients must be nonnegative")
    grad = _gradient(g.columns.T @ g.columns, g.columns.T @ f.values.ravel(), lam, m + 1)
    pos = lam > 0
    viol = np.where(pos, np.abs(grad), np.maximum(-grad, 0.0))
    return float(np.max(viol))


def _spectral_step(gram: np.ndarray, m1: int) -> float:
    n = gram.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(50):
        w = gram @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 1.0  # zero matrix; any step works
        v = w / nrm
    lmax = float(v @ (gram @ v)) / m1
    if lmax <= 0.0:
        return 1.0
    return 1.0 / (1.05 * lmax)


def solve_nonneg_l1(
    g: AtomResponseMatrix,
    f: Measurement,
    m: int,
    params: CoeffConfig,
    warm: np.ndarray | None = None,
) -> CoeffResult:
    """Projected-gradient solve of the coefficient step, warm-startable.

    Monotone in the objective from the warm start; stops at the KKT tolerance
    or the iteration budget (in which case the best iterate is returned and
    flagged as unconverged).
    """
    fv = f.values.ravel()
    if g.columns.shape[0] != fv.size:
        raise ValidationError("response matrix and data dimensions do not match")
    if not np.all(np.isfinite(fv)):
        raise ValidationError("data must be finite")
    n = g.n_atoms
    m1 = m + 1
    gram = g.columns.T @ g.columns
    gtf = g.columns.T @ fv
    if warm is None:
        lam = np.zeros(n)
    else:
        lam = np.maximum(np.asarray(warm, dtype=np.float64).copy(), 0.0)
        if lam.size != n:
            raise ValidationError("warm start length does not match the atom count")
    step = _spectral_step(gram, m1)
    it = 0
    for it in range(1, params.max_iters + 1):
        grad = _gradient(gram, gtf, lam, m1)
        viol = np.where(lam > 0, np.abs(grad), np.maximum(-grad, 0.0))
        kkt = float(np.max(viol))
        if kkt <= params.kkt_tol:
            return CoeffResult(lam=lam, iterations=it - 1, kkt=kkt, converged=True)
        lam = np.maximum(lam - step * grad, 0.0)
    grad = _gradient(gram, gtf, lam, m1)
    kkt = float(np.max(np.where(lam > 0, np.abs(grad), np.maximum(-grad, 0.0))))
    return CoeffResult(lam=lam, iterations=it, kkt=kkt, converged=kkt <= params.kkt_tol)
