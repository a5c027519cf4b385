#!/usr/bin/env python3
"""Benchmark the insertion kernels: numba backend vs pure-numpy fallback.

Builds an Experiment-1-sized certificate landscape (L=100 sensors, M=30) and
times the batched multi-start ascent plus single value/gradient evaluations
on both backends, checking that they agree numerically.

Run:  python benchmarks/bench_insertion.py [--q 50] [--iters 200]
"""

import argparse
import time

import numpy as np

from bvtrack.accel import load_backend
from bvtrack.core import SparseDiracMeasure
from bvtrack.experiments import experiment_spec, simulate
from bvtrack.forward import forward_measure
from bvtrack.insertion import _kernel_params
from bvtrack.objective import fidelity_gradient
from bvtrack.rng import SplitMix64


def build_problem(q):
    data = simulate(experiment_spec("three_curves"))
    empty = SparseDiracMeasure(())
    y = forward_measure(data.sensors, data.grid, data.theta, empty)
    w = fidelity_gradient(y, data.measurement).w
    pos, i2s2, peak = _kernel_params(data.sensors)
    m1 = data.grid.points.size
    consts = SplitMix64(7).uniform(q, data.dom.lo, data.dom.hi)
    inits = np.tile(consts[:, None], (1, 2 * m1))
    return data, w, pos, i2s2, peak, inits


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--q", type=int, default=50, help="number of starts")
    ap.add_argument("--iters", type=int, default=200, help="ascent iterations")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    data, w, pos, i2s2, peak, inits = build_problem(args.q)
    th = data.theta.theta
    ascent_args = (w, pos, i2s2, peak, th, 5.0, 2.0, 1e-3, 0.0, 5.0,
                   args.iters, 1.5, 1e-4, 1e-14, 1e-12)
    eval_args = (w, pos, i2s2, peak, th, 5.0, 2.0, 1e-3)

    results = {}
    for name in ("numpy", "numba"):
        try:
            backend = load_backend(name)
        except ImportError:
            print(f"{name}: unavailable, skipped")
            continue
        backend.ascend_batch(inits[:2].copy(), *ascent_args)  # warm-up / jit
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            backend.ascend_batch(inits.copy(), *ascent_args)
            times.append(time.perf_counter() - t0)
        z_out, vals = backend.ascend_batch(inits.copy(), *ascent_args)
        t0 = time.perf_counter()
        for _ in range(50):
            backend.cert_grad_batch(z_out, *eval_args)
        grad_ms = (time.perf_counter() - t0) / 50 / args.q * 1e3
        results[name] = (min(times), vals, z_out, grad_ms)
        print(f"{name:6s}: ascent({args.q} starts x {args.iters} iters) "
              f"{min(times):8.3f} s   value+grad per curve {grad_ms:7.4f} ms")

    if len(results) == 2:
        v_np, v_nb = results["numpy"][1], results["numba"][1]
        dv = float(np.max(np.abs(v_np - v_nb)))
        speedup = results["numpy"][0] / results["numba"][0]
        print(f"agreement: max |value difference| = {dv:.3e}")
        print(f"speedup  : numba is {speedup:.1f}x faster on the ascent")


if __name__ == "__main__":
    main()
