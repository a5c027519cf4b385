import itertools

import numpy as np
import pytest

from bvtrack.coefficients import (
    AtomResponseMatrix,
    CoeffResult,
    assemble_atom_responses,
    kkt_residual,
    solve_nonneg_l1,
)
from bvtrack.core import (
    CadlagSamples,
    CoeffConfig,
    Measurement,
    ValidationError,
    constant_curve,
    make_uniform_grid,
    sample_cadlag,
)
from bvtrack.forward import forward_atom
from bvtrack.objective import a0

PARAMS = CoeffConfig()


def _objective(g, fv, lam, m1):
    r = g @ lam - fv
    return float(r @ r) / (2 * m1) + float(np.sum(lam))


def brute_force_best(g, fv, m1):
    """Enumerate all support patterns, solve each stationarity system, keep the
    feasible minimizer. Independent oracle for small N."""
    n = g.shape[1]
    best = _objective(g, fv, np.zeros(n), m1)
    for r in range(1, n + 1):
        for support in itertools.combinations(range(n), r):
            gs = g[:, support]
            # stationarity on the support: G_s^T G_s lam = G_s^T f - (M+1)
            a = gs.T @ gs
            b = gs.T @ fv - m1
            try:
                lam_s = np.linalg.solve(a, b)
            except np.linalg.LinAlgError:
                continue
            if np.any(lam_s < 0):
                continue
            lam = np.zeros(n)
            lam[list(support)] = lam_s
            best = min(best, _objective(g, fv, lam, m1))
    return best


class TestSolveNonnegL1:
    def test_zero_data_gives_zero(self):
        g = AtomResponseMatrix(np.array([[1.0, 0.3], [0.2, 0.9]]))
        f = Measurement(np.zeros((1, 2)))
        res = solve_nonneg_l1(g, f, 1, PARAMS)
        assert np.all(res.lam == 0.0)
        assert res.converged

    def test_closed_form_one_atom(self):
        # M=0, g=[2], f=[4]: stationarity 2(2 lam - 4) + 1 = 0 => lam = 7/4
        res = _solve_raw(np.array([[2.0]]), np.array([4.0]), m=0)
        assert res.lam[0] == pytest.approx(7.0 / 4.0, abs=1e-10)

    def test_matches_brute_force_small(self):
        rng = np.random.default_rng(0)
        m = 3  # M+1 = 4 rows per sensor block
        for _ in range(50):
            n = int(rng.integers(1, 4))
            g = rng.uniform(0, 1.5, (8, n))
            fv = rng.uniform(0, 2, 8)
            res = _solve_raw(g, fv, m=m)
            ours = _objective(g, fv, res.lam, m + 1)
            oracle = brute_force_best(g, fv, m + 1)
            assert ours <= oracle + 1e-8

    def test_warm_start_monotone(self):
        rng = np.random.default_rng(1)
        g = rng.uniform(0, 1, (12, 4))
        fv = rng.uniform(0, 3, 12)
        res = _solve_raw(g, fv, m=2)
        warm = np.concatenate([res.lam[:3], [0.5]])
        res2 = _solve_raw(g, fv, m=2, warm=warm)
        assert _objective(g, fv, res2.lam, 3) <= _objective(g, fv, warm, 3) + 1e-12

    def test_warm_start_agnostic_objective(self):
        rng = np.random.default_rng(2)
        g = rng.uniform(0, 1, (10, 3)) + np.eye(10, 3)  # independent columns
        fv = rng.uniform(0, 3, 10)
        r1 = _solve_raw(g, fv, m=4, warm=np.zeros(3))
        r2 = _solve_raw(g, fv, m=4, warm=np.full(3, 2.0))
        assert _objective(g, fv, r1.lam, 5) == pytest.approx(
            _objective(g, fv, r2.lam, 5), abs=1e-10
        )

    def test_column_scaling_consistency(self):
        # doubling a column and halving its coefficient leaves the fit G lam
        # invariant; the solver on the rescaled problem must do at least as
        # well as that mapped point
        rng = np.random.default_rng(3)
        g = rng.uniform(0.1, 1, (9, 2))
        fv = rng.uniform(0, 2, 9)
        g2 = g.copy()
        g2[:, 0] *= 2.0
        r1 = _solve_raw(g, fv, m=2)
        mapped = r1.lam.copy()
        mapped[0] /= 2.0
        assert np.allclose(g2 @ mapped, g @ r1.lam, atol=1e-14)
        r2 = _solve_raw(g2, fv, m=2)
        assert _objective(g2, fv, r2.lam, 3) <= _objective(g2, fv, mapped, 3) + 1e-9


def _solve_raw(g, fv, m, warm=None):
    """Call the solver on raw arrays by wrapping them in the public types."""
    rows = g.shape[0]
    cols_needed = m + 1
    l = rows // cols_needed
    assert l * cols_needed == rows, "test shapes must factor as L x (M+1)"
    return solve_nonneg_l1(
        AtomResponseMatrix(g), Measurement(fv.reshape(l, cols_needed)), m, PARAMS, warm=warm
    )


class TestKKTResidual:
    def test_optimal_is_small(self):
        g = AtomResponseMatrix(np.array([[2.0]]))
        res = _solve_raw(np.array([[2.0]]), np.array([4.0]), m=0)
        k = kkt_residual(g, Measurement(np.array([[4.0]])), 0, res.lam)
        assert k <= 1e-10

    def test_zero_lambda_zero_data(self):
        g = AtomResponseMatrix(np.array([[1.0], [1.0]]))
        f = Measurement(np.zeros((1, 2)))
        assert kkt_residual(g, f, 1, np.zeros(1)) == 0.0

    def test_perturbation_detected(self):
        g = np.array([[2.0]])
        res = _solve_raw(g, np.array([4.0]), m=0)
        lam = res.lam + 0.1
        k = kkt_residual(AtomResponseMatrix(g), Measurement(np.array([[4.0]])), 0, lam)
        assert k > 1e-3

    def test_rejects_negative(self):
        g = AtomResponseMatrix(np.array([[1.0]]))
        with pytest.raises(ValidationError):
            kkt_residual(g, Measurement(np.array([[1.0, 1.0]])), 1, np.array([-0.1]))


class TestAssemble:
    def test_column_structure(self, small_setup):
        _, grid, theta, sensors = small_setup
        c = sample_cadlag(constant_curve(float(sensors.positions[4])), grid)
        g = assemble_atom_responses([c], sensors, grid, theta, 5.0, 2.0)
        expected = a0(5.0, 2.0, c) * forward_atom(sensors, grid, theta, c).values.ravel()
        assert np.allclose(g.columns[:, 0], expected, atol=0, rtol=1e-15)
        # constant curve: a0 = 1/alpha
        assert a0(5.0, 2.0, c) == pytest.approx(0.2)

    def test_duplicates_identical(self, small_setup):
        _, grid, theta, sensors = small_setup
        c = sample_cadlag(constant_curve(2.0), grid)
        g = assemble_atom_responses([c, c], sensors, grid, theta, 5.0, 2.0)
        assert np.array_equal(g.columns[:, 0], g.columns[:, 1])

    def test_column_norm_bound(self, small_setup):
        _, grid, theta, sensors = small_setup
        rng = np.random.default_rng(4)
        n = grid.points.size
        curves = [CadlagSamples(rng.uniform(0, 5, n), rng.uniform(0, 5, n)) for _ in range(4)]
        g = assemble_atom_responses(curves, sensors, grid, theta, 5.0, 2.0)
        bound = (1 / 5.0) * np.sqrt(g.columns.shape[0]) * float(
            np.max(sensors.c / np.sqrt(sensors.sigma2))
        )
        assert np.all(np.linalg.norm(g.columns, axis=0) <= bound + 1e-12)

    def test_empty_rejected(self, small_setup):
        _, grid, theta, sensors = small_setup
        with pytest.raises(ValidationError):
            assemble_atom_responses([], sensors, grid, theta, 5.0, 2.0)
