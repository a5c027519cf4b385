import json

import numpy as np
import pytest

from bvtrack.core import (
    Atom,
    CadlagSamples,
    Domain1D,
    Measurement,
    SensorArray,
    SolverConfig,
    SparseDiracMeasure,
    ThetaWeights,
    constant_curve,
    make_uniform_grid,
    sample_cadlag,
)
from bvtrack.serialize import (
    cadlag_from_json,
    cadlag_to_json,
    config_from_json,
    config_to_json,
    domain_from_json,
    domain_to_json,
    grid_from_json,
    grid_to_json,
    measure_from_json,
    measure_to_json,
    measurement_from_json,
    measurement_to_json,
    read_measurement_csv,
    sensors_from_json,
    sensors_to_json,
    theta_from_json,
    theta_to_json,
    write_cadlag_csv,
    write_measurement_csv,
)


def through_json(d):
    return json.loads(json.dumps(d))


class TestJsonRoundTrips:
    def test_domain(self):
        dom = Domain1D(0.0, 5.0)
        assert domain_from_json(through_json(domain_to_json(dom))) == dom

    def test_grid(self):
        g = make_uniform_grid(7)
        back = grid_from_json(through_json(grid_to_json(g)))
        assert np.array_equal(back.points, g.points)

    def test_theta(self):
        th = ThetaWeights.default(5)
        back = theta_from_json(through_json(theta_to_json(th)))
        assert np.array_equal(back.theta, th.theta)

    def test_sensors(self):
        s = SensorArray(positions=np.linspace(0, 5, 9), sigma2=0.02, c=0.4)
        back = sensors_from_json(through_json(sensors_to_json(s)))
        assert np.array_equal(back.positions, s.positions)
        assert np.array_equal(back.sigma2, s.sigma2)

    def test_cadlag_bit_exact(self):
        rng = np.random.default_rng(0)
        c = CadlagSamples(rng.uniform(0, 5, 9), rng.uniform(0, 5, 9))
        back = cadlag_from_json(through_json(cadlag_to_json(c)))
        assert np.array_equal(back.gamma_plus, c.gamma_plus)
        assert np.array_equal(back.gamma_minus, c.gamma_minus)

    def test_measure(self):
        grid = make_uniform_grid(4)
        mu = SparseDiracMeasure(
            (
                Atom(0.25, sample_cadlag(constant_curve(1.0), grid)),
                Atom(1.5, sample_cadlag(constant_curve(3.0), grid)),
            )
        )
        back = measure_from_json(through_json(measure_to_json(mu)))
        assert back.total_mass == mu.total_mass
        assert np.array_equal(back.atoms[1].curve.gamma_plus, mu.atoms[1].curve.gamma_plus)

    def test_measurement_bit_exact(self):
        rng = np.random.default_rng(1)
        m = Measurement(rng.normal(0, 1, (4, 6)))
        back = measurement_from_json(through_json(measurement_to_json(m)))
        assert np.array_equal(back.values, m.values)

    def test_config(self):
        cfg = SolverConfig(alpha=5.0, beta=2.0, seed=99, q_starts=17)
        back = config_from_json(through_json(config_to_json(cfg)))
        assert back == cfg


class TestCsv:
    def test_measurement_roundtrip_17_digits(self, tmp_path):
        rng = np.random.default_rng(2)
        m = Measurement(rng.normal(0, 1, (5, 7)))
        path = tmp_path / "m.csv"
        write_measurement_csv(m, path)
        back = read_measurement_csv(path)
        assert np.array_equal(back.values, m.values)

    def test_cadlag_rows(self, tmp_path):
        grid = make_uniform_grid(3)
        c = sample_cadlag(constant_curve(2.0), grid)
        path = tmp_path / "c.csv"
        write_cadlag_csv(c, grid, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,gamma_minus,gamma_plus"
        assert len(lines) == 1 + grid.points.size
