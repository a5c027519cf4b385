"""Command line interface.

Subcommands: simulate, solve, certify, plot, w1. Exit codes: 0 on success,
2 on validation failures (bad inputs, failed certification), 3 on numerical
failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .core import NumericalError, SolverConfig, ValidationError, make_uniform_grid
from .experiments import (
    EXPERIMENT_DEFAULTS,
    default_setup,
    experiment_spec,
    simulate,
    simulation_from_json,
    simulation_to_json,
)
from .insertion import multi_start_insertion
from .objective import (
    certificate_value,
    fidelity,
    fidelity_gradient,
    objective_value,
    regularizer_value,
)
from .forward import forward_measure
from .plots import plot_reconstruction, plot_residuals
from .rng import derive_seed
from .serialize import (
    config_from_json,
    config_to_json,
    dump_json,
    load_json,
    result_from_json,
    result_to_json,
    write_iteration_csv,
)
from .solver import STOP_CERTIFICATE, fcgcg_solve, residual_log


def _cmd_simulate(args) -> int:
    spec = experiment_spec(
        args.spec, noise_std=args.noise_std, seed=args.seed if args.seed is not None else 20240
    )
    data = simulate(spec)
    dump_json(simulation_to_json(data), args.out)
    print(f"wrote {args.out}")
    return 0


def _merged_config(args, data_spec) -> SolverConfig:
    cfg = {}
    if args.config:
        cfg.update(load_json(args.config))
    for key, val in (
        ("alpha", args.alpha),
        ("beta", args.beta),
        ("q_starts", args.q),
        ("eps_stop", args.eps_stop),
        ("seed", args.seed),
    ):
        if val is not None:
            cfg[key] = val
    cfg.setdefault("alpha", data_spec["alpha"])
    cfg.setdefault("beta", data_spec["beta"])
    cfg.setdefault("seed", data_spec["seed"])
    return config_from_json(cfg)


def _cmd_solve(args) -> int:
    raw = load_json(args.data)
    data = simulation_from_json(raw)
    config = _merged_config(args, raw["spec"])
    result = fcgcg_solve(
        data.measurement, data.sensors, data.grid, data.theta, data.dom, config
    )
    dump_json(result_to_json(result), args.out)
    if args.log:
        write_iteration_csv(result.history, args.log)
    rec = result.history[-1]
    print(
        f"stop={result.stop_reason} iterations={rec.k} atoms={len(result.measure)} "
        f"objective={rec.objective:.10g} certificate_max={rec.certificate_max:.8g}"
    )
    return 0


def _cmd_certify(args) -> int:
    data = simulation_from_json(load_json(args.data))
    recon = result_from_json(load_json(args.recon))
    cfg = recon.config
    checks: list[tuple[str, bool, str]] = []

    rec = recon.history[-1]
    fid = fidelity(
        forward_measure(data.sensors, data.grid, data.theta, recon.measure), data.measurement
    )
    reg = regularizer_value(recon.measure, cfg.alpha, cfg.beta)
    obj = fid + reg
    tol = 1e-12 * max(1.0, abs(rec.objective))
    checks.append(
        ("objective reproduces final history row", abs(obj - rec.objective) <= tol,
         f"{obj:.17g} vs {rec.objective:.17g}")
    )

    objs = recon.objectives
    mono = bool(np.all(np.diff(objs) <= 1e-10))
    checks.append(("objective history nonincreasing", mono, f"{len(objs)} records"))

    w = fidelity_gradient(
        forward_measure(data.sensors, data.grid, data.theta, recon.measure), data.measurement
    )
    if recon.stop_reason == STOP_CERTIFICATE:
        cert_tol = max(cfg.eps_stop, 1e-6)
        devs = [
            abs(
                certificate_value(
                    w, data.sensors, data.grid, data.theta, cfg.alpha, cfg.beta, a.curve
                )
                - 1.0
            )
            for a in recon.measure.atoms
        ]
        ok = all(d <= cert_tol for d in devs)
        detail = f"max deviation {max(devs):.3g}" if devs else "no atoms"
        checks.append(("active atoms sit on the certificate level set", ok, detail))

    k_final = rec.k
    _, cert_max = multi_start_insertion(
        w, data.sensors, data.grid, data.theta, data.dom, cfg,
        seed=derive_seed(cfg.seed, k_final),
        extra_inits=tuple(a.curve for a in recon.measure.atoms),
    )
    checks.append(
        ("final insertion value reproduces the log", abs(cert_max - rec.certificate_max) <= 1e-12,
         f"{cert_max:.17g} vs {rec.certificate_max:.17g}")
    )

    checks.append(
        ("atom masses positive", all(a.mass > 0 for a in recon.measure.atoms),
         f"{len(recon.measure)} atoms")
    )

    ok_all = True
    for name, ok, detail in checks:
        print(f"[{'ok' if ok else 'FAIL'}] {name}: {detail}")
        ok_all &= ok
    if not ok_all:
        raise ValidationError("certification failed")
    return 0


def _cmd_plot(args) -> int:
    recon = result_from_json(load_json(args.recon))
    if args.truth:
        data = simulation_from_json(load_json(args.truth))
        grid, dom = data.grid, data.dom
        truth_measure, truth_zeta = data.truth_measure, data.truth_zeta
    else:
        m = recon.measure.atoms[0].curve.m if recon.measure.atoms else 30
        dom, grid, _, _ = default_setup(m=m)
        truth_measure = truth_zeta = None
    plot_reconstruction(
        recon.measure, grid, dom, args.out,
        truth_measure=truth_measure, truth_zeta=truth_zeta,
    )
    if args.residuals_out:
        plot_residuals(residual_log(recon.history), args.residuals_out)
    print(f"wrote {args.out}")
    return 0


def _load_point_measure(path):
    d = load_json(path)
    try:
        return [(float(a["position"]), float(a["mass"])) for a in d["atoms"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: expected atoms with position/mass fields") from exc


def _cmd_w1(args) -> int:
    from .validation import w1_1d

    dist = w1_1d(_load_point_measure(args.a), _load_point_measure(args.b))
    print(f"{dist!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bvtrack", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="generate reference data for a named experiment")
    ps.add_argument("--spec", required=True, choices=sorted(EXPERIMENT_DEFAULTS))
    ps.add_argument("--out", required=True)
    ps.add_argument("--noise-std", type=float, default=None, dest="noise_std")
    ps.add_argument("--seed", type=int, default=None)
    ps.set_defaults(func=_cmd_simulate)

    pv = sub.add_parser("solve", help="run the conditional gradient solver on a data file")
    pv.add_argument("--data", required=True)
    pv.add_argument("--alpha", type=float, default=None)
    pv.add_argument("--beta", type=float, default=None)
    pv.add_argument("--q", type=int, default=None)
    pv.add_argument("--eps-stop", type=float, default=None, dest="eps_stop")
    pv.add_argument("--seed", type=int, default=None)
    pv.add_argument("--config", default=None, help="JSON file mirroring SolverConfig")
    pv.add_argument("--out", required=True)
    pv.add_argument("--log", default=None, help="iteration log CSV")
    pv.set_defaults(func=_cmd_solve)

    pc = sub.add_parser("certify", help="validate a reconstruction against its data file")
    pc.add_argument("--data", required=True)
    pc.add_argument("--recon", required=True)
    pc.set_defaults(func=_cmd_certify)

    pp = sub.add_parser("plot", help="emit SVG plots for a reconstruction")
    pp.add_argument("--recon", required=True)
    pp.add_argument("--truth", default=None, help="data JSON used for the overlay")
    pp.add_argument("--out", required=True)
    pp.add_argument("--residuals-out", default=None, dest="residuals_out")
    pp.set_defaults(func=_cmd_plot)

    pw = sub.add_parser("w1", help="Wasserstein-1 distance between two point-measure files")
    pw.add_argument("--a", required=True)
    pw.add_argument("--b", required=True)
    pw.set_defaults(func=_cmd_w1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
