"""JSON and CSV serialization for the domain types.

JSON uses the field names of the type definitions. Floats are emitted with
Python's shortest round-trip repr, so decimal round trips are bit-exact and
re-running a seeded experiment reproduces files byte for byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import (
    AscentConfig,
    Atom,
    CadlagSamples,
    CoeffConfig,
    Domain1D,
    Measurement,
    SensorArray,
    SolverConfig,
    SparseDiracMeasure,
    ThetaWeights,
    TimeGrid,
    ValidationError,
)
from .solver import IterationRecord, ReconstructionResult


def _floats(a) -> list:
    return [float(x) for x in np.asarray(a).ravel()]


def domain_to_json(dom: Domain1D) -> dict:
    return {"lo": dom.lo, "hi": dom.hi}


def domain_from_json(d: dict) -> Domain1D:
    return Domain1D(lo=float(d["lo"]), hi=float(d["hi"]))


def grid_to_json(grid: TimeGrid) -> dict:
    return {"points": _floats(grid.points), "M": grid.m}


def grid_from_json(d: dict) -> TimeGrid:
    grid = TimeGrid(np.array(d["points"], dtype=np.float64))
    if "M" in d and int(d["M"]) != grid.m:
        raise ValidationError("grid M field disagrees with the point count")
    return grid


def theta_to_json(theta: ThetaWeights) -> dict:
    return {"theta": _floats(theta.theta)}


def theta_from_json(d: dict) -> ThetaWeights:
    return ThetaWeights(np.array(d["theta"], dtype=np.float64))


def sensors_to_json(s: SensorArray) -> dict:
    return {
        "positions": _floats(s.positions),
        "sigma2": _floats(s.sigma2),
        "c": _floats(s.c),
    }


def sensors_from_json(d: dict) -> SensorArray:
    return SensorArray(
        positions=np.array(d["positions"], dtype=np.float64),
        sigma2=np.array(d["sigma2"], dtype=np.float64),
        c=np.array(d["c"], dtype=np.float64),
    )


def cadlag_to_json(c: CadlagSamples) -> dict:
    return {"gamma_plus": _floats(c.gamma_plus), "gamma_minus": _floats(c.gamma_minus)}


def cadlag_from_json(d: dict) -> CadlagSamples:
    return CadlagSamples(
        gamma_plus=np.array(d["gamma_plus"], dtype=np.float64),
        gamma_minus=np.array(d["gamma_minus"], dtype=np.float64),
    )


def measure_to_json(mu: SparseDiracMeasure) -> dict:
    return {
        "atoms": [{"mass": a.mass, **cadlag_to_json(a.curve)} for a in mu.atoms]
    }


def measure_from_json(d: dict) -> SparseDiracMeasure:
    return SparseDiracMeasure(
        tuple(Atom(mass=float(a["mass"]), curve=cadlag_from_json(a)) for a in d["atoms"])
    )


def measurement_to_json(m: Measurement) -> dict:
    return {"values": [_floats(row) for row in m.values]}


def measurement_from_json(d: dict) -> Measurement:
    return Measurement(np.array(d["values"], dtype=np.float64))


def config_to_json(c: SolverConfig) -> dict:
    return {
        "alpha": c.alpha,
        "beta": c.beta,
        "eps_stop": c.eps_stop,
        "eps_smooth": c.eps_smooth,
        "q_starts": c.q_starts,
        "ascent": {
            "max_iters": c.ascent.max_iters,
            "init_step": c.ascent.init_step,
            "armijo_c": c.ascent.armijo_c,
            "min_step": c.ascent.min_step,
            "ftol": c.ascent.ftol,
            "eps_polish": c.ascent.eps_polish,
            "polish_iters": c.ascent.polish_iters,
            "dp_grid": c.ascent.dp_grid,
        },
        "coeff": {"max_iters": c.coeff.max_iters, "kkt_tol": c.coeff.kkt_tol},
        "prune_tol": c.prune_tol,
        "max_outer": c.max_outer,
        "seed": c.seed,
    }


def config_from_json(d: dict) -> SolverConfig:
    base = SolverConfig(alpha=float(d["alpha"]), beta=float(d["beta"]))
    asc = {**config_to_json(base)["ascent"], **d.get("ascent", {})}
    cf = {**config_to_json(base)["coeff"], **d.get("coeff", {})}
    return SolverConfig(
        alpha=float(d["alpha"]),
        beta=float(d["beta"]),
        eps_stop=float(d.get("eps_stop", base.eps_stop)),
        eps_smooth=float(d.get("eps_smooth", base.eps_smooth)),
        q_starts=int(d.get("q_starts", base.q_starts)),
        ascent=AscentConfig(
            max_iters=int(asc["max_iters"]),
            init_step=None if asc["init_step"] is None else float(asc["init_step"]),
            armijo_c=float(asc["armijo_c"]),
            min_step=float(asc["min_step"]),
            ftol=float(asc["ftol"]),
            eps_polish=float(asc["eps_polish"]),
            polish_iters=int(asc["polish_iters"]),
            dp_grid=int(asc["dp_grid"]),
        ),
        coeff=CoeffConfig(max_iters=int(cf["max_iters"]), kkt_tol=float(cf["kkt_tol"])),
        prune_tol=float(d.get("prune_tol", base.prune_tol)),
        max_outer=int(d.get("max_outer", base.max_outer)),
        seed=int(d.get("seed", base.seed)),
    )


def record_to_json(r: IterationRecord) -> dict:
    return {
        "k": r.k,
        "fidelity": r.fidelity,
        "regularizer": r.regularizer,
        "objective": r.objective,
        "certificate_max": r.certificate_max,
        "n_atoms": r.n_atoms,
    }


def record_from_json(d: dict) -> IterationRecord:
    return IterationRecord(
        k=int(d["k"]),
        fidelity=float(d["fidelity"]),
        regularizer=float(d["regularizer"]),
        objective=float(d["objective"]),
        certificate_max=float(d["certificate_max"]),
        n_atoms=int(d["n_atoms"]),
    )


def result_to_json(r: ReconstructionResult) -> dict:
    return {
        "atoms": measure_to_json(r.measure)["atoms"],
        "lambdas": _floats(r.lambdas),
        "history": [record_to_json(h) for h in r.history],
        "stop_reason": r.stop_reason,
        "seed": r.seed,
        "config": config_to_json(r.config),
    }


def result_from_json(d: dict) -> ReconstructionResult:
    return ReconstructionResult(
        measure=measure_from_json(d),
        lambdas=np.array(d["lambdas"], dtype=np.float64),
        history=tuple(record_from_json(h) for h in d["history"]),
        stop_reason=str(d["stop_reason"]),
        seed=int(d["seed"]),
        config=config_from_json(d["config"]),
    )


def dump_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def write_iteration_csv(history, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "fidelity", "regularizer", "objective", "certificate_max", "n_atoms"])
        for r in history:
            writer.writerow(
                [r.k, f"{r.fidelity:.17g}", f"{r.regularizer:.17g}", f"{r.objective:.17g}",
                 f"{r.certificate_max:.17g}", r.n_atoms]
            )


def write_residual_csv(residuals, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "r0"])
        for k, r in enumerate(residuals):
            writer.writerow([k, f"{r:.17g}"])


def write_cadlag_csv(curve: CadlagSamples, grid: TimeGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "gamma_minus", "gamma_plus"])
        for t, gm, gp in zip(grid.points, curve.gamma_minus, curve.gamma_plus):
            writer.writerow([f"{t:.17g}", f"{gm:.17g}", f"{gp:.17g}"])


def write_measurement_csv(m: Measurement, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in m.values:
            writer.writerow([f"{x:.17g}" for x in row])


def read_measurement_csv(path) -> Measurement:
    with open(path, newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    return Measurement(np.array(rows, dtype=np.float64))
