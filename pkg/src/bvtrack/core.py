"""Shared domain types: time grids, trace vectors, atomic measures, sensors, config.

All types are immutable value objects. Arrays are converted to read-only
float64 buffers on construction, so instances can be shared freely between
workers.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class ValidationError(ValueError):
    """An input violates a documented precondition or invariant."""


class NumericalError(RuntimeError):
    """A computation produced non-finite values or failed to converge."""


def _readonly(a, dtype=np.float64) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Domain1D:
    """Spatial interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValidationError("domain endpoints must be finite")
        if not self.lo < self.hi:
            raise ValidationError(f"empty domain [{self.lo}, {self.hi}]")

    @property
    def diam(self) -> float:
        return self.hi - self.lo

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))


def clamp_to_domain(x: float, dom: Domain1D) -> float:
    """Project a scalar onto [dom.lo, dom.hi]."""
    return float(min(max(x, dom.lo), dom.hi))


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing time points t_0 = 0 < ... < t_M = 1."""

    points: np.ndarray

    def __post_init__(self):
        pts = _readonly(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise ValidationError("time grid needs at least the two endpoints")
        if pts[0] != 0.0 or pts[-1] != 1.0:
            raise ValidationError("time grid must start at 0 and end at 1")
        if not np.all(np.diff(pts) > 0):
            raise ValidationError("time grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        """Number of intervals M (the grid has M+1 points)."""
        return self.points.size - 1


def make_uniform_grid(m: int) -> TimeGrid:
    """Equidistant grid with t_j = j/M."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValidationError(f"interval count must be a positive integer, got {m!r}")
    return TimeGrid(np.arange(m + 1, dtype=np.float64) / m)


@dataclass(frozen=True)
class ThetaWeights:
    """Left/right split weights theta_j at the grid times.

    theta_0 = 0 and theta_M = 1 are forced by the temporal deblurring limit;
    the default takes theta_j = 0 for all j < M.
    """

    theta: np.ndarray

    def __post_init__(self):
        th = _readonly(self.theta)
        if th.ndim != 1 or th.size < 2:
            raise ValidationError("theta must be a vector over the grid points")
        if np.any(th < 0.0) or np.any(th > 1.0):
            raise ValidationError("theta entries must lie in [0, 1]")
        if th[0] != 0.0:
            raise ValidationError("theta[0] must be 0 (no mass before t=0)")
        if th[-1] != 1.0:
            raise ValidationError("theta[M] must be 1 (no mass after t=1)")
        object.__setattr__(self, "theta", th)

    @classmethod
    def default(cls, m: int) -> "ThetaWeights":
        th = np.zeros(m + 1)
        th[-1] = 1.0
        return cls(th)


@dataclass(frozen=True)
class CadlagSamples:
    """Sampled right/left traces (gamma^+, gamma^-) of a cadlag curve.

    gamma_plus[j] is the curve value at t_j, gamma_minus[j] the left limit.
    There is no left limit at t=0, so gamma_minus[0] is anchored to
    gamma_plus[0] for sampled curves; during insertion both vectors are free
    and the variation penalty drives them together.
    """

    gamma_plus: np.ndarray
    gamma_minus: np.ndarray

    def __post_init__(self):
        gp = _readonly(self.gamma_plus)
        gm = _readonly(self.gamma_minus)
        if gp.ndim != 1 or gm.ndim != 1 or gp.size != gm.size or gp.size < 2:
            raise ValidationError("trace vectors must be 1-d and of equal length >= 2")
        if not (np.all(np.isfinite(gp)) and np.all(np.isfinite(gm))):
            raise ValidationError("trace vectors must be finite")
        object.__setattr__(self, "gamma_plus", gp)
        object.__setattr__(self, "gamma_minus", gm)

    @property
    def m(self) -> int:
        return self.gamma_plus.size - 1

    def within(self, dom: Domain1D, tol: float = 0.0) -> bool:
        return dom.contains(self.gamma_plus, tol) and dom.contains(self.gamma_minus, tol)

    def jumps(self) -> np.ndarray:
        """|gamma_plus - gamma_minus| at every grid point."""
        return np.abs(self.gamma_plus - self.gamma_minus)


@dataclass(frozen=True)
class Atom:
    """One weighted Dirac-along-a-curve component m * delta_gamma."""

    mass: float
    curve: CadlagSamples

    def __post_init__(self):
        if not np.isfinite(self.mass) or self.mass < 0.0:
            raise ValidationError(f"atom mass must be finite and >= 0, got {self.mass}")


@dataclass(frozen=True)
class SparseDiracMeasure:
    """Finite collection of atoms mu = sum_i m_i delta_{gamma_i}."""

    atoms: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))

    @classmethod
    def empty(cls) -> "SparseDiracMeasure":
        return cls(())

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def total_mass(self) -> float:
        return float(sum(a.mass for a in self.atoms))


@dataclass(frozen=True)
class Measurement:
    """Data-space element: an L x (M+1) real matrix (row = sensor)."""

    values: np.ndarray

    def __post_init__(self):
        v = _readonly(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError("measurement must be an L x (M+1) matrix")
        object.__setattr__(self, "values", v)

    @property
    def n_sensors(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1] - 1


@dataclass(frozen=True)
class SensorArray:
    """Sensor positions with Gaussian kernel parameters.

    Kernel of sensor i: Phi_i(x) = (c_i / sigma_i) * exp(-(x - x_i)^2 / (2 sigma_i^2)).
    Scalars for sigma2 / c broadcast over all sensors.
    """

    positions: np.ndarray
    sigma2: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        pos = _readonly(np.atleast_1d(self.positions))
        if pos.ndim != 1 or pos.size < 1:
            raise ValidationError("need at least one sensor position")
        sig2 = _readonly(np.broadcast_to(np.asarray(self.sigma2, dtype=np.float64), pos.shape))
        cs = _readonly(np.broadcast_to(np.asarray(self.c, dtype=np.float64), pos.shape))
        if np.any(sig2 <= 0.0):
            raise ValidationError("sensor variances must be positive")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(cs))):
            raise ValidationError("sensor parameters must be finite")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "sigma2", sig2)
        object.__setattr__(self, "c", cs)

    @property
    def n_sensors(self) -> int:
        return self.positions.size

    def within(self, dom: Domain1D) -> bool:
        return dom.contains(self.positions)


@dataclass(frozen=True)
class AscentConfig:
    """Projected gradient ascent controls for the insertion step.

    The iteration budget and step cap are sized so that jump formation (a
    kink traveling coordinate by coordinate across a data desert) completes;
    shorter budgets leave the certificate maximum unreached and the outer
    loop then fragments mass over many weak atoms.
    """

    max_iters: int = 500
    init_step: float | None = None  # None: 0.3 * domain diameter
    armijo_c: float = 1e-4
    min_step: float = 1e-14
    ftol: float = 1e-12  # relative stagnation exit; 0 disables
    # continuation: after the smoothed ascent, re-ascend with a nearly exact
    # penalty so candidates land on stationary points of the true landscape
    eps_polish: float = 1e-8
    polish_iters: int = 300  # 0 disables the polish pass
    # grid size for the deterministic dynamic-programming start candidate
    # offered to the multi-start search; 0 disables it
    dp_grid: int = 1024


@dataclass(frozen=True)
class CoeffConfig:
    """Inner nonnegative-L1 solver controls."""

    max_iters: int = 100_000
    kkt_tol: float = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    alpha: float
    beta: float
    eps_stop: float = 1e-4
    eps_smooth: float = 1e-3
    q_starts: int = 150
    ascent: AscentConfig = field(default_factory=AscentConfig)
    coeff: CoeffConfig = field(default_factory=CoeffConfig)
    prune_tol: float = 1e-9
    max_outer: int = 50
    seed: int = 1

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.eps_smooth > 0):
            raise ValidationError("alpha, beta and eps_smooth must be positive")
        if self.eps_stop < 0 or self.prune_tol < 0:
            raise ValidationError("tolerances must be nonnegative")
        if self.q_starts < 1:
            raise ValidationError("q_starts must be >= 1")
        if self.max_outer < 1:
            raise ValidationError("max_outer must be >= 1")


@dataclass(frozen=True)
class PiecewiseCurve:
    """Right-continuous scalar curve on [0, 1], jumps only at the breakpoints.

    pieces[p] is a closed-form expression valid on [breaks[p-1], breaks[p])
    (last piece closed at t=1), so left limits at the breakpoints are exact
    evaluations of the previous piece, with no numeric limit estimation.
    """

    pieces: tuple[Callable[[float], float], ...]
    breaks: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        if len(self.pieces) != len(self.breaks) + 1:
            raise ValidationError("need exactly one more piece than breakpoints")
        if any(not 0.0 < b < 1.0 for b in self.breaks):
            raise ValidationError("breakpoints must lie strictly inside (0, 1)")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ValidationError("breakpoints must be strictly increasing")

    def value(self, t: float) -> float:
        """Right-continuous evaluation."""
        return float(self.pieces[bisect.bisect_right(self.breaks, t)](t))

    def left_limit(self, t: float) -> float:
        """Left limit; defined as the value itself at t=0."""
        if t <= 0.0:
            return self.value(t)
        return float(self.pieces[bisect.bisect_left(self.breaks, t)](t))

    def __call__(self, t: float) -> float:
        return self.value(t)


def constant_curve(c: float) -> PiecewiseCurve:
    return PiecewiseCurve(pieces=(lambda t, c=c: c,))


def sample_cadlag(curve_spec: PiecewiseCurve, grid: TimeGrid) -> CadlagSamples:
    """Sample the right/left traces of a piecewise curve on a time grid."""
    gp = np.array([curve_spec.value(t) for t in grid.points])
    gm = np.array([curve_spec.left_limit(t) for t in grid.points])
    gm[0] = gp[0]
    return CadlagSamples(gamma_plus=gp, gamma_minus=gm)
