"""Outer fully-corrective conditional gradient loop.

Per iteration: compute the fidelity gradient at the current iterate, run the
multi-start insertion, check the certificate stopping rule (skipped at k=0,
where no coefficient step has constrained the certificate yet), re-optimize
all coefficients from a warm start, prune zeros, and convert coefficients to
effective masses m_i = lambda_i * a0(gamma_i).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .coefficients import assemble_atom_responses, solve_nonneg_l1
from .core import (
    Atom,
    CadlagSamples,
    Domain1D,
    Measurement,
    SensorArray,
    SolverConfig,
    SparseDiracMeasure,
    ThetaWeights,
    TimeGrid,
    ValidationError,
)
from .forward import forward_measure
from .insertion import multi_start_insertion
from .objective import a0, fidelity, fidelity_gradient, regularizer_value
from .rng import derive_seed

logger = logging.getLogger(__name__)

STOP_CERTIFICATE = "certificate"
STOP_MAX_ITERS = "max_iters"


@dataclass(frozen=True)
class IterationRecord:
    k: int
    fidelity: float
    regularizer: float
    objective: float
    certificate_max: float
    n_atoms: int


@dataclass(frozen=True)
class ReconstructionResult:
    measure: SparseDiracMeasure
    lambdas: np.ndarray
    history: tuple[IterationRecord, ...]
    stop_reason: str
    seed: int
    config: SolverConfig

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.history])


def prune(
    atoms: list[CadlagSamples], lambdas: np.ndarray, prune_tol: float
) -> tuple[list[CadlagSamples], np.ndarray]:
    """Drop atoms whose coefficients are numerically zero, preserving order."""
    lambdas = np.asarray(lambdas, dtype=np.float64)
    if np.any(lambdas < 0):
        raise ValidationError("coefficients must be nonnegative")
    keep = lambdas > prune_tol
    return [c for c, k in zip(atoms, keep) if k], lambdas[keep]


def residual_log(history, j_final: float | None = None) -> np.ndarray:
    """Residual proxies r0(mu^k) = J(mu^k) - J(mu^last) from an iteration history."""
    objs = np.array(
        [r.objective if isinstance(r, IterationRecord) else float(r) for r in history]
    )
    if objs.size == 0:
        raise ValidationError("history must be nonempty")
    ref = float(objs[-1]) if j_final is None else float(j_final)
    return objs - ref


def fcgcg_solve(
    f: Measurement,
    sensors: SensorArray,
    grid: TimeGrid,
    theta: ThetaWeights,
    dom: Domain1D,
    config: SolverConfig,
) -> ReconstructionResult:
    """Run the conditional gradient loop on data f until the certificate rule fires."""
    if f.values.shape != (sensors.n_sensors, grid.points.size):
        raise ValidationError("data dimensions do not match sensors and grid")
    curves: list[CadlagSamples] = []
    lambdas = np.zeros(0)
    history: list[IterationRecord] = []
    stop_reason = STOP_MAX_ITERS
    for k in range(config.max_outer + 1):
        mu = _measure(curves, lambdas, config)
        y = forward_measure(sensors, grid, theta, mu)
        w = fidelity_gradient(y, f)
        curve_new, cert_max = multi_start_insertion(
            w, sensors, grid, theta, dom, config,
            seed=derive_seed(config.seed, k), extra_inits=tuple(curves),
        )
        fid = fidelity(y, f)
        reg = regularizer_value(mu, config.alpha, config.beta)
        history.append(
            IterationRecord(
                k=k,
                fidelity=fid,
                regularizer=reg,
                objective=fid + reg,
                certificate_max=cert_max,
                n_atoms=len(curves),
            )
        )
        logger.info(
            "k=%d objective=%.10g fidelity=%.4g certificate_max=%.8g atoms=%d",
            k, fid + reg, fid, cert_max, len(curves),
        )
        if k >= 1 and cert_max <= 1.0 + config.eps_stop:
            stop_reason = STOP_CERTIFICATE
            break
        if k == config.max_outer:
            stop_reason = STOP_MAX_ITERS
            break
        if any(
            np.array_equal(curve_new.gamma_plus, c.gamma_plus)
            and np.array_equal(curve_new.gamma_minus, c.gamma_minus)
            for c in curves
        ):
            # an exact duplicate adds nothing to the span and would only let
            # the coefficient step split mass arbitrarily between twin columns
            candidates = list(curves)
        else:
            candidates = curves + [curve_new]
        g = assemble_atom_responses(
            candidates, sensors, grid, theta, config.alpha, config.beta
        )
        warm = np.concatenate([lambdas, [0.0]])
        res = solve_nonneg_l1(g, f, grid.m, config.coeff, warm=warm)
        if not res.converged:
            logger.warning(
                "coefficient step hit the iteration budget (kkt=%.3g)", res.kkt
            )
        logger.debug("coefficient step: %d iterations, kkt=%.3g", res.iterations, res.kkt)
        curves, lambdas = prune(candidates, res.lam, config.prune_tol)
    return ReconstructionResult(
        measure=_measure(curves, lambdas, config),
        lambdas=lambdas,
        history=tuple(history),
        stop_reason=stop_reason,
        seed=config.seed,
        config=config,
    )


def _measure(
    curves: list[CadlagSamples], lambdas: np.ndarray, config: SolverConfig
) -> SparseDiracMeasure:
    atoms = tuple(
        Atom(mass=lam * a0(config.alpha, config.beta, c), curve=c)
        for c, lam in zip(curves, lambdas)
    )
    return SparseDiracMeasure(atoms)
