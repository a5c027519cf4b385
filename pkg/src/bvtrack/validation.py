"""Independent oracles: exact 1D Wasserstein-1, a transport LP, the
finite-blur forward operator, finite differences, and reconstruction error.

Everything here is deliberately decoupled from the production code paths it
checks: w1_1d integrates CDF differences while w1_lp_oracle solves the
transport linear program; forward_blurred integrates the nascent-delta
operator by quadrature instead of evaluating trace samples.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .core import (
    CadlagSamples,
    Domain1D,
    Measurement,
    NumericalError,
    PiecewiseCurve,
    SensorArray,
    SparseDiracMeasure,
    ThetaWeights,
    TimeGrid,
    ValidationError,
)
from .forward import IntervalMeasureSpec, kernel_matrix

MASS_TOL = 1e-12


def _as_weighted_points(m) -> tuple[np.ndarray, np.ndarray]:
    pts = [(float(p), float(w)) for p, w in m]
    pos = np.array([p for p, _ in pts])
    mass = np.array([w for _, w in pts])
    if np.any(mass < 0):
        raise ValidationError("masses must be nonnegative")
    return pos, mass


def w1_1d(a, b) -> float:
    """Exact Wasserstein-1 distance between weighted point lists on the line.

    Computed as the integral of |F_a - F_b| over the merged breakpoint set;
    totals must agree within 1e-12.
    """
    pa, ma = _as_weighted_points(a)
    pb, mb = _as_weighted_points(b)
    ta, tb = ma.sum(), mb.sum()
    if abs(ta - tb) > MASS_TOL:
        raise ValidationError(f"total masses differ: {ta} vs {tb}")
    if ta == 0.0 and tb == 0.0:
        return 0.0
    xs = np.sort(np.concatenate([pa, pb]))
    deltas = np.diff(xs)

    def cdf(pos, mass):
        order = np.argsort(pos, kind="stable")
        cum = np.concatenate([[0.0], np.cumsum(mass[order])])
        return cum[np.searchsorted(pos[order], xs[:-1], side="right")]

    return float(np.sum(np.abs(cdf(pa, ma) - cdf(pb, mb)) * deltas))


def w1_lp_oracle(a, b) -> float:
    """Transport cost by solving the LP over transport plans directly."""
    pa, ma = _as_weighted_points(a)
    pb, mb = _as_weighted_points(b)
    if pa.size > 8 or pb.size > 8:
        raise ValidationError("LP oracle is limited to 8 atoms per side")
    ta, tb = ma.sum(), mb.sum()
    if abs(ta - tb) > MASS_TOL:
        raise ValidationError(f"total masses differ: {ta} vs {tb}")
    if ta == 0.0 and tb == 0.0:
        return 0.0
    na, nb = pa.size, pb.size
    cost = np.abs(pa[:, None] - pb[None, :]).ravel()
    a_eq = np.zeros((na + nb, na * nb))
    for i in range(na):
        a_eq[i, i * nb : (i + 1) * nb] = 1.0
    for j in range(nb):
        a_eq[na + j, j::nb] = 1.0
    res = linprog(
        cost,
        A_eq=a_eq,
        b_eq=np.concatenate([ma, mb]),
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        raise NumericalError(f"transport LP failed: {res.message}")
    return float(res.fun)


def _tent_weights(lo: float, hi: float, peak_at: float, height: float, breaks, panels: int):
    """Midpoint nodes and weights for a tent on [lo, hi] with apex at peak_at.

    Segments split at the apex and at the curve breakpoints so the integrand
    is smooth on every panel (the midpoint rule is then exact on the tent
    itself, which keeps the constant-curve case exact).
    """
    cuts = sorted({lo, hi, peak_at} | {b for b in breaks if lo < b < hi})
    nodes, weights = [], []
    half = (hi - lo) / 2.0
    for s0, s1 in zip(cuts, cuts[1:]):
        h = (s1 - s0) / panels
        mids = s0 + (np.arange(panels) + 0.5) * h
        tent = height * (1.0 - np.abs(mids - peak_at) / half)
        nodes.append(mids)
        weights.append(np.maximum(tent, 0.0) * h)
    return np.concatenate(nodes), np.concatenate(weights)


def forward_blurred(
    sensors: SensorArray,
    grid: TimeGrid,
    theta: ThetaWeights,
    delta: float,
    curve: PiecewiseCurve,
    panels: int = 64,
) -> Measurement:
    """Finite-blur operator K~(delta) for a Dirac along a parametric curve.

    Uses triangular nascent delta functions with exact (theta_j, 1-theta_j)
    mass split about each t_j; converges to the trace-sample operator K0 as
    delta -> 0.
    """
    if delta <= 0:
        raise ValidationError("blur width must be positive")
    gaps = np.diff(grid.points)
    if 2.0 * delta > float(np.min(gaps)):
        raise ValidationError("blur supports overlap: need 2*delta <= min grid spacing")
    m1 = grid.points.size
    out = np.zeros((sensors.n_sensors, m1))
    height = 2.0 / delta
    for j, t in enumerate(grid.points):
        th = theta.theta[j]
        sides = []
        if th != 0.0:
            sides.append((t - delta, t, t - delta / 2.0, th))
        if th != 1.0:
            sides.append((t, t + delta, t + delta / 2.0, 1.0 - th))
        col = np.zeros(sensors.n_sensors)
        for lo, hi, apex, weight in sides:
            if lo < 0.0 or hi > 1.0:
                raise ValidationError("blur support leaves the unit interval")
            nodes, wts = _tent_weights(lo, hi, apex, height, curve.breaks, panels)
            xs = np.array([curve.value(s) for s in nodes])
            col += weight * (kernel_matrix(sensors, xs) @ wts)
        out[:, j] = col
    return Measurement(out)


def finite_diff_gradient(functional, point: np.ndarray, h: float) -> np.ndarray:
    """Central finite differences of a scalar functional, one coordinate at a time."""
    if h <= 0:
        raise ValidationError("finite difference step must be positive")
    x = np.asarray(point, dtype=np.float64)
    out = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        out[i] = (functional(xp) - functional(xm)) / (2.0 * h)
    return out


_INTERVAL_SLICE_ATOMS = 64


def _dirac_slice(measure: SparseDiracMeasure, j: int, last: int):
    pts = []
    for atom in measure.atoms:
        x = atom.curve.gamma_minus[j] if j == last else atom.curve.gamma_plus[j]
        pts.append((float(x), atom.mass))
    return pts


def _interval_slice(spec: IntervalMeasureSpec, t: float, left: bool):
    if left:
        a, b = spec.zeta_lo.left_limit(t), spec.zeta_hi.left_limit(t)
    else:
        a, b = spec.zeta_lo.value(t), spec.zeta_hi.value(t)
    length = b - a
    if length < 0:
        raise ValidationError(f"interval boundaries cross at t={t}")
    if length == 0.0:
        return []
    qs = a + (np.arange(_INTERVAL_SLICE_ATOMS) + 0.5) / _INTERVAL_SLICE_ATOMS * length
    w = length / _INTERVAL_SLICE_ATOMS
    return [(float(x), w) for x in qs]


def sampled_w1_error(
    recon: SparseDiracMeasure,
    truth,
    grid: TimeGrid,
    dom: Domain1D,
) -> float:
    """Mean per-slice transport distance between reconstruction and truth.

    Slices at t_j use the cadlag value (the left limit at t=1). Unequal slice
    masses are handled by rescaling both sides to the common minimum and
    charging the mass gap at diam(domain) per unit; interval truths are
    discretized to 64 equal-mass atoms per slice.
    """
    last = grid.m
    total = 0.0
    for j, t in enumerate(grid.points):
        ra = _dirac_slice(recon, j, last)
        if isinstance(truth, SparseDiracMeasure):
            rb = _dirac_slice(truth, j, last)
        elif isinstance(truth, IntervalMeasureSpec):
            rb = _interval_slice(truth, float(t), left=(j == last))
        else:
            raise ValidationError(f"unsupported truth type {type(truth).__name__}")
        ma = sum(w for _, w in ra)
        mb = sum(w for _, w in rb)
        common = min(ma, mb)
        dist = abs(ma - mb) * dom.diam
        if common > 0.0:
            sa = [(p, w * common / ma) for p, w in ra]
            sb = [(p, w * common / mb) for p, w in rb]
            dist += w1_1d(sa, sb)
        total += dist
    return total / grid.points.size
