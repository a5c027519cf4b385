"""Backend selection for the hot insertion kernels.

Two interchangeable implementations of the multi-start certificate ascent:

* ``numba_backend`` -- per-start compiled loops (default when numba imports),
* ``numpy_backend`` -- vectorized-over-starts pure numpy fallback.

Set ``BVTRACK_NUMBA=0`` in the environment to force the numpy path. The
selected module is bound at import time; ``benchmarks/bench_insertion.py``
loads both explicitly and compares them.
"""

from __future__ import annotations

import importlib
import os


def load_backend(name: str):
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    return importlib.import_module(f".{name}_backend", __name__)


def _select():
    flag = os.environ.get("BVTRACK_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "off", "no"):
        return load_backend("numpy"), "numpy"
    try:
        return load_backend("numba"), "numba"
    except ImportError:
        return load_backend("numpy"), "numpy"


_impl, BACKEND = _select()

ascend_batch = _impl.ascend_batch
cert_smoothed_batch = _impl.cert_smoothed_batch
cert_grad_batch = _impl.cert_grad_batch
