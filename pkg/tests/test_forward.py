import math

import numpy as np
import pytest

from bvtrack.core import (
    Atom,
    PiecewiseCurve,
    SensorArray,
    SparseDiracMeasure,
    ThetaWeights,
    ValidationError,
    constant_curve,
    make_uniform_grid,
    sample_cadlag,
)
from bvtrack.forward import (
    IntervalMeasureSpec,
    forward_atom,
    forward_interval_measure,
    forward_measure,
    kernel_eval,
    kernel_interval_integral,
)

# closed form: peak = C/sigma with C = 1/sqrt(2 pi), sigma^2 = 0.02
PEAK = 1.0 / (math.sqrt(2.0 * math.pi) * math.sqrt(0.02))  # 2.820947917738781


class TestKernelEval:
    def test_peak_value(self, small_setup):
        _, _, _, sensors = small_setup
        v = kernel_eval(sensors, 3, float(sensors.positions[3]))
        assert abs(v - PEAK) < 1e-12
        assert abs(v - 2.820948) < 1e-6

    def test_one_sigma(self, small_setup):
        # closed form peak * exp(-1/2) = 1.7109914015610834
        _, _, _, sensors = small_setup
        x = float(sensors.positions[5]) + math.sqrt(0.02)
        v = kernel_eval(sensors, 5, x)
        assert abs(v - PEAK * math.exp(-0.5)) < 1e-12
        assert abs(v - 1.710991) < 1e-6

    def test_symmetry(self, small_setup):
        _, _, _, sensors = small_setup
        rng = np.random.default_rng(0)
        for d in rng.uniform(0, 1, 20):
            xi = float(sensors.positions[7])
            assert kernel_eval(sensors, 7, xi + d) == pytest.approx(
                kernel_eval(sensors, 7, xi - d), abs=0, rel=1e-12
            )

    def test_index_out_of_range(self, small_setup):
        _, _, _, sensors = small_setup
        with pytest.raises(ValidationError):
            kernel_eval(sensors, sensors.n_sensors, 1.0)


def _riemann(sensors, i, a, b, panels=100_000):
    xs = a + (np.arange(panels) + 0.5) * (b - a) / panels
    d = xs - sensors.positions[i]
    sig2 = sensors.sigma2[i]
    vals = sensors.c[i] / math.sqrt(sig2) * np.exp(-d * d / (2 * sig2))
    return float(vals.sum() * (b - a) / panels)


class TestKernelIntervalIntegral:
    def test_degenerate(self, small_setup):
        _, _, _, sensors = small_setup
        assert kernel_interval_integral(sensors, 2, 1.3, 1.3) == 0.0

    def test_total_mass(self, small_setup):
        # C = 1/sqrt(2 pi) makes the kernel integrate to exactly 1 over the line
        _, _, _, sensors = small_setup
        v = kernel_interval_integral(sensors, 10, -50.0, 50.0)
        assert abs(v - 1.0) < 1e-14

    def test_half_mass(self, small_setup):
        _, _, _, sensors = small_setup
        xi = float(sensors.positions[10])
        sig = math.sqrt(0.02)
        v = kernel_interval_integral(sensors, 10, xi, xi + 10 * sig)
        assert abs(v - 0.5) < 1e-12

    def test_against_riemann_oracle(self, small_setup):
        _, _, _, sensors = small_setup
        rng = np.random.default_rng(1)
        for _ in range(10):
            a, b = np.sort(rng.uniform(0.0, 5.0, 2))
            i = int(rng.integers(0, sensors.n_sensors))
            # tolerance covers the midpoint oracle's own discretization error
            assert kernel_interval_integral(sensors, i, a, b) == pytest.approx(
                _riemann(sensors, i, a, b), abs=1e-7
            )

    def test_rejects_reversed(self, small_setup):
        _, _, _, sensors = small_setup
        with pytest.raises(ValidationError):
            kernel_interval_integral(sensors, 0, 2.0, 1.0)


class TestForwardAtom:
    def test_constant_curve_row(self, small_setup):
        _, grid, theta, sensors = small_setup
        x1 = float(sensors.positions[4])
        m = forward_atom(sensors, grid, theta, sample_cadlag(constant_curve(x1), grid))
        assert np.allclose(m.values[4], PEAK, atol=1e-12)
        assert np.all(m.values[0] < m.values[4])

    def test_jump_column_uses_right_trace(self, paper_setup):
        _, grid, theta, sensors = paper_setup
        curve = sample_cadlag(
            PiecewiseCurve((lambda t: 1.0 + t * t, lambda t: 2.0 + t * t), breaks=(0.5,)),
            grid,
        )
        m = forward_atom(sensors, grid, theta, curve)
        # theta_15 = 0: column 15 must evaluate at gamma_plus[15] = 2.25
        expected = np.array([kernel_eval(sensors, i, 2.25) for i in range(sensors.n_sensors)])
        assert np.allclose(m.values[:, 15], expected, atol=0, rtol=1e-14)

    def test_last_column_uses_left_trace(self, small_setup):
        _, grid, theta, sensors = small_setup
        gp = np.full(grid.points.size, 2.0)
        gm = np.full(grid.points.size, 2.0)
        gp[-1] = 4.0  # inert under theta_M = 1
        from bvtrack.core import CadlagSamples

        m = forward_atom(sensors, grid, theta, CadlagSamples(gp, gm))
        expected = np.array([kernel_eval(sensors, i, 2.0) for i in range(sensors.n_sensors)])
        assert np.allclose(m.values[:, -1], expected, atol=0, rtol=1e-14)

    def test_entries_bounded_by_peak(self, small_setup):
        _, grid, theta, sensors = small_setup
        rng = np.random.default_rng(2)
        from bvtrack.core import CadlagSamples

        bound = float(np.max(sensors.c / np.sqrt(sensors.sigma2)))
        for _ in range(10):
            c = CadlagSamples(rng.uniform(0, 5, grid.points.size), rng.uniform(0, 5, grid.points.size))
            v = forward_atom(sensors, grid, theta, c).values
            assert np.all(v >= 0) and np.all(v <= bound + 1e-15)


class TestForwardMeasure:
    def test_empty(self, small_setup):
        _, grid, theta, sensors = small_setup
        m = forward_measure(sensors, grid, theta, SparseDiracMeasure(()))
        assert np.all(m.values == 0.0)

    def test_single_atom_unit_mass(self, small_setup):
        _, grid, theta, sensors = small_setup
        c = sample_cadlag(constant_curve(2.5), grid)
        mu = SparseDiracMeasure((Atom(1.0, c),))
        assert np.array_equal(
            forward_measure(sensors, grid, theta, mu).values,
            forward_atom(sensors, grid, theta, c).values,
        )

    def test_linearity(self, small_setup):
        _, grid, theta, sensors = small_setup
        rng = np.random.default_rng(3)
        from bvtrack.core import CadlagSamples

        n = grid.points.size
        atoms = tuple(
            Atom(float(rng.uniform(0.1, 2.0)), CadlagSamples(rng.uniform(0, 5, n), rng.uniform(0, 5, n)))
            for _ in range(3)
        )
        mu = SparseDiracMeasure(atoms)
        mu2 = SparseDiracMeasure(tuple(Atom(2 * a.mass, a.curve) for a in atoms))
        v1 = forward_measure(sensors, grid, theta, mu).values
        v2 = forward_measure(sensors, grid, theta, mu2).values
        assert np.allclose(v2, 2 * v1, atol=1e-12)

    def test_concatenation_linearity(self, small_setup):
        _, grid, theta, sensors = small_setup
        rng = np.random.default_rng(4)
        from bvtrack.core import CadlagSamples

        n = grid.points.size
        a = [Atom(0.7, CadlagSamples(rng.uniform(0, 5, n), rng.uniform(0, 5, n))) for _ in range(2)]
        b = [Atom(1.3, CadlagSamples(rng.uniform(0, 5, n), rng.uniform(0, 5, n))) for _ in range(2)]
        va = forward_measure(sensors, grid, theta, SparseDiracMeasure(tuple(a))).values
        vb = forward_measure(sensors, grid, theta, SparseDiracMeasure(tuple(b))).values
        vab = forward_measure(sensors, grid, theta, SparseDiracMeasure(tuple(a + b))).values
        assert np.allclose(vab, va + vb, atol=1e-12)


class TestForwardIntervalMeasure:
    def test_diffuse_mu_at_t1(self, paper_setup):
        # slice at t=1 is Lebesgue on [2, 3] with mass 1
        dom, grid, theta, sensors = paper_setup
        spec = IntervalMeasureSpec(
            zeta_lo=PiecewiseCurve((lambda t: 1.0 + t,)),
            zeta_hi=PiecewiseCurve((lambda t: 4.0 - t,)),
        )
        m = forward_interval_measure(sensors, grid, theta, spec, dom=dom)
        expected = np.array(
            [kernel_interval_integral(sensors, i, 2.0, 3.0) for i in range(sensors.n_sensors)]
        )
        assert np.allclose(m.values[:, -1], expected, atol=0, rtol=1e-14)
        # a sensor well inside [2, 3] collects nearly the full unit kernel mass
        mid = int(np.argmin(np.abs(sensors.positions - 2.5)))
        assert abs(m.values[mid, -1] - 1.0) < 1e-3

    def test_degenerate_interval(self, small_setup):
        dom, grid, theta, sensors = small_setup
        spec = IntervalMeasureSpec(
            zeta_lo=PiecewiseCurve((lambda t: 2.0,)), zeta_hi=PiecewiseCurve((lambda t: 2.0,))
        )
        m = forward_interval_measure(sensors, grid, theta, spec, dom=dom)
        assert np.all(m.values == 0.0)

    def test_against_riemann_oracle(self, small_setup):
        dom, grid, theta, sensors = small_setup
        spec = IntervalMeasureSpec(
            zeta_lo=PiecewiseCurve((lambda t: 1.0 + t, lambda t: 2.0 + t), breaks=(0.5,)),
            zeta_hi=PiecewiseCurve((lambda t: 2.0 + t, lambda t: 3.0 + t), breaks=(0.5,)),
        )
        m = forward_interval_measure(sensors, grid, theta, spec, dom=dom)
        panels = 100_000
        for j, t in enumerate(grid.points):
            left = j == grid.m
            a = spec.zeta_lo.left_limit(t) if left else spec.zeta_lo.value(t)
            b = spec.zeta_hi.left_limit(t) if left else spec.zeta_hi.value(t)
            xs = a + (np.arange(panels) + 0.5) * (b - a) / panels
            d = xs[None, :] - sensors.positions[:, None]
            vals = (sensors.c / np.sqrt(sensors.sigma2))[:, None] * np.exp(
                -d * d / (2 * sensors.sigma2[:, None])
            )
            oracle = vals.sum(axis=1) * (b - a) / panels
            assert np.allclose(m.values[:, j], oracle, atol=1e-6)

    def test_boundary_leaves_domain(self, small_setup):
        dom, grid, theta, sensors = small_setup
        spec = IntervalMeasureSpec(
            zeta_lo=PiecewiseCurve((lambda t: 1.0,)), zeta_hi=PiecewiseCurve((lambda t: 4.0 + 2 * t,))
        )
        with pytest.raises(ValidationError):
            forward_interval_measure(sensors, grid, theta, spec, dom=dom)

    def test_crossing_boundaries_rejected(self, small_setup):
        dom, grid, theta, sensors = small_setup
        spec = IntervalMeasureSpec(
            zeta_lo=PiecewiseCurve((lambda t: 3.0,)), zeta_hi=PiecewiseCurve((lambda t: 3.0 - t,))
        )
        with pytest.raises(ValidationError):
            forward_interval_measure(sensors, grid, theta, spec, dom=dom)
