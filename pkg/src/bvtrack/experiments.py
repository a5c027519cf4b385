"""Ground truths, noise injection and experiment orchestration.

The named experiments reproduce the reference setups: domain [0, 5], M = 30
equidistant time steps, 100 equidistant Gaussian sensors with variance 0.02
and scale 1/sqrt(2*pi), and the per-experiment regularization weights.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    Atom,
    CadlagSamples,
    Domain1D,
    Measurement,
    PiecewiseCurve,
    SensorArray,
    SolverConfig,
    SparseDiracMeasure,
    ThetaWeights,
    TimeGrid,
    ValidationError,
    make_uniform_grid,
    sample_cadlag,
)
from .forward import IntervalMeasureSpec, forward_interval_measure, forward_measure
from .plots import plot_reconstruction, plot_residuals
from .rng import SplitMix64, derive_seed
from .serialize import (
    cadlag_to_json,
    cadlag_from_json,
    domain_to_json,
    domain_from_json,
    dump_json,
    grid_to_json,
    grid_from_json,
    measure_from_json,
    measure_to_json,
    measurement_from_json,
    measurement_to_json,
    result_to_json,
    sensors_from_json,
    sensors_to_json,
    theta_from_json,
    theta_to_json,
    write_iteration_csv,
    write_residual_csv,
)
from .solver import ReconstructionResult, fcgcg_solve, residual_log

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240
_NOISE_TAG = 2**32

EXPERIMENT_DEFAULTS = {
    "three_curves": {"alpha": 5.0, "beta": 2.0, "noise_std": 0.0},
    "three_curves_noisy": {"alpha": 5.0, "beta": 3.0, "noise_std": 0.2},
    "crossing": {"alpha": 13.0, "beta": 5.0, "noise_std": 0.0},
    "diffuse_mu": {"alpha": 3.0, "beta": 2.0, "noise_std": 0.0},
    "diffuse_nu": {"alpha": 5.0, "beta": 2.0, "noise_std": 0.0},
}


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    alpha: float
    beta: float
    noise_std: float = 0.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.name not in EXPERIMENT_DEFAULTS:
            raise ValidationError(f"unknown experiment {self.name!r}")
        if self.noise_std < 0:
            raise ValidationError("noise standard deviation must be nonnegative")


def experiment_spec(
    name: str,
    alpha: float | None = None,
    beta: float | None = None,
    noise_std: float | None = None,
    seed: int = DEFAULT_SEED,
) -> ExperimentSpec:
    """Named experiment with its reference parameters, individually overridable."""
    if name not in EXPERIMENT_DEFAULTS:
        raise ValidationError(f"unknown experiment {name!r}")
    d = EXPERIMENT_DEFAULTS[name]
    return ExperimentSpec(
        name=name,
        alpha=d["alpha"] if alpha is None else float(alpha),
        beta=d["beta"] if beta is None else float(beta),
        noise_std=d["noise_std"] if noise_std is None else float(noise_std),
        seed=seed,
    )


def default_setup(m: int = 30, n_sensors: int = 100):
    """Reference discretization: (domain, grid, theta, sensors)."""
    dom = Domain1D(0.0, 5.0)
    grid = make_uniform_grid(m)
    theta = ThetaWeights.default(m)
    sensors = SensorArray(
        positions=np.linspace(dom.lo, dom.hi, n_sensors),
        sigma2=0.02,
        c=1.0 / math.sqrt(2.0 * math.pi),
    )
    return dom, grid, theta, sensors


def truth_curves(name: str):
    """Closed-form ground-truth curves (or interval boundaries) of an experiment."""
    if name in ("three_curves", "three_curves_noisy"):
        return (
            PiecewiseCurve((lambda t: t + 3.5,)),
            PiecewiseCurve((lambda t: math.sqrt(t) + 2.5,)),
            PiecewiseCurve((lambda t: 1.0 + t * t, lambda t: 2.0 + t * t), breaks=(0.5,)),
        )
    if name == "crossing":
        return (
            PiecewiseCurve((lambda t: 1.0 + 3.0 * t,)),
            PiecewiseCurve((lambda t: 4.0 - 3.0 * t,)),
        )
    if name == "diffuse_mu":
        return (
            PiecewiseCurve((lambda t: 1.0 + t,)),
            PiecewiseCurve((lambda t: 4.0 - t,)),
        )
    if name == "diffuse_nu":
        return (
            PiecewiseCurve((lambda t: 1.0 + t, lambda t: 2.0 + t), breaks=(0.5,)),
            PiecewiseCurve((lambda t: 2.0 + t, lambda t: 3.0 + t), breaks=(0.5,)),
        )
    raise ValidationError(f"unknown experiment {name!r}")


def ground_truth(spec: ExperimentSpec, grid: TimeGrid):
    """Sampled Dirac truth (unit masses) or the interval spec for diffuse truths."""
    curves = truth_curves(spec.name)
    if spec.name in ("diffuse_mu", "diffuse_nu"):
        return IntervalMeasureSpec(zeta_lo=curves[0], zeta_hi=curves[1])
    atoms = tuple(Atom(mass=1.0, curve=sample_cadlag(c, grid)) for c in curves)
    return SparseDiracMeasure(atoms)


def add_noise(f: Measurement, std: float, seed: int) -> Measurement:
    """Add i.i.d. centered Gaussian entries; std = 0 returns f unchanged."""
    if std < 0:
        raise ValidationError("noise standard deviation must be nonnegative")
    if std == 0.0:
        return f
    noise = SplitMix64(seed).normal(f.values.size, std=std).reshape(f.values.shape)
    return Measurement(f.values + noise)


@dataclass(frozen=True)
class SimulationData:
    """Everything the solver and the validators need about one data set."""

    spec: ExperimentSpec
    dom: Domain1D
    grid: TimeGrid
    theta: ThetaWeights
    sensors: SensorArray
    measurement: Measurement
    truth_measure: SparseDiracMeasure | None
    truth_zeta: tuple[CadlagSamples, CadlagSamples] | None


def simulate(spec: ExperimentSpec, m: int = 30, n_sensors: int = 100) -> SimulationData:
    """Generate the (possibly noisy) reference data for a named experiment."""
    dom, grid, theta, sensors = default_setup(m=m, n_sensors=n_sensors)
    truth = ground_truth(spec, grid)
    if isinstance(truth, IntervalMeasureSpec):
        clean = forward_interval_measure(sensors, grid, theta, truth, dom=dom)
        truth_measure = None
        truth_zeta = (sample_cadlag(truth.zeta_lo, grid), sample_cadlag(truth.zeta_hi, grid))
    else:
        clean = forward_measure(sensors, grid, theta, truth)
        truth_measure = truth
        truth_zeta = None
    f = add_noise(clean, spec.noise_std, derive_seed(spec.seed, _NOISE_TAG))
    return SimulationData(
        spec=spec,
        dom=dom,
        grid=grid,
        theta=theta,
        sensors=sensors,
        measurement=f,
        truth_measure=truth_measure,
        truth_zeta=truth_zeta,
    )


def simulation_to_json(data: SimulationData) -> dict:
    if data.truth_measure is not None:
        truth = {"kind": "dirac", **measure_to_json(data.truth_measure)}
    else:
        lo, hi = data.truth_zeta
        truth = {"kind": "interval", "zeta_lo": cadlag_to_json(lo), "zeta_hi": cadlag_to_json(hi)}
    return {
        "spec": {
            "name": data.spec.name,
            "alpha": data.spec.alpha,
            "beta": data.spec.beta,
            "noise_std": data.spec.noise_std,
            "seed": data.spec.seed,
        },
        "domain": domain_to_json(data.dom),
        "grid": grid_to_json(data.grid),
        "theta": theta_to_json(data.theta),
        "sensors": sensors_to_json(data.sensors),
        "measurement": measurement_to_json(data.measurement),
        "ground_truth": truth,
    }


def simulation_from_json(d: dict) -> SimulationData:
    s = d["spec"]
    spec = ExperimentSpec(
        name=s["name"],
        alpha=float(s["alpha"]),
        beta=float(s["beta"]),
        noise_std=float(s["noise_std"]),
        seed=int(s["seed"]),
    )
    truth = d["ground_truth"]
    if truth["kind"] == "dirac":
        truth_measure = measure_from_json(truth)
        truth_zeta = None
    elif truth["kind"] == "interval":
        truth_measure = None
        truth_zeta = (cadlag_from_json(truth["zeta_lo"]), cadlag_from_json(truth["zeta_hi"]))
    else:
        raise ValidationError(f"unknown ground truth kind {truth['kind']!r}")
    return SimulationData(
        spec=spec,
        dom=domain_from_json(d["domain"]),
        grid=grid_from_json(d["grid"]),
        theta=theta_from_json(d["theta"]),
        sensors=sensors_from_json(d["sensors"]),
        measurement=measurement_from_json(d["measurement"]),
        truth_measure=truth_measure,
        truth_zeta=truth_zeta,
    )


def solver_config_for(spec: ExperimentSpec, **overrides) -> SolverConfig:
    return SolverConfig(
        alpha=spec.alpha, beta=spec.beta, seed=spec.seed, **overrides
    )


def run_experiment(
    spec: ExperimentSpec,
    outdir,
    config: SolverConfig | None = None,
) -> tuple[ReconstructionResult, SimulationData, dict]:
    """Simulate, solve and emit result JSON, iteration/residual CSV and SVG plots.

    When config is given it is used verbatim (its alpha/beta/seed included);
    otherwise it is built from the experiment spec with library defaults.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    data = simulate(spec)
    if config is None:
        config = solver_config_for(spec)
    result = fcgcg_solve(
        data.measurement, data.sensors, data.grid, data.theta, data.dom, config
    )
    residuals = residual_log(result.history)
    paths = {
        "data": outdir / f"{spec.name}_data.json",
        "recon": outdir / f"{spec.name}_recon.json",
        "iters": outdir / f"{spec.name}_iters.csv",
        "residuals": outdir / f"{spec.name}_residuals.csv",
        "recon_plot": outdir / f"{spec.name}_recon.svg",
        "residual_plot": outdir / f"{spec.name}_residuals.svg",
    }
    dump_json(simulation_to_json(data), paths["data"])
    dump_json(result_to_json(result), paths["recon"])
    write_iteration_csv(result.history, paths["iters"])
    write_residual_csv(residuals, paths["residuals"])
    plot_reconstruction(
        result.measure,
        data.grid,
        data.dom,
        paths["recon_plot"],
        truth_measure=data.truth_measure,
        truth_zeta=data.truth_zeta,
        title=f"{spec.name} (alpha={spec.alpha:g}, beta={spec.beta:g})",
    )
    plot_residuals(residuals, paths["residual_plot"])
    logger.info(
        "experiment %s: %d atoms, stop=%s, objective=%.8g",
        spec.name, len(result.measure), result.stop_reason, result.history[-1].objective,
    )
    return result, data, paths
