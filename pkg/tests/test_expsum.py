import math

import numpy as np
import pytest

from tubeap import (
    ExpSum,
    TubePoint,
    almost_period_defect,
    evaluate,
    evaluate_grid,
    find_almost_period,
    fourier_coefficient,
    log_abs,
    restrict_to_ray,
)
from tubeap.errors import (
    BadGrid,
    CollidingFrequencies,
    DimensionMismatch,
    NotFound,
    OverflowGuard,
)
from conftest import random_expsum


class TestEvaluate:
    def test_two_terms_at_zero(self, f_two_term_1d):
        assert evaluate(f_two_term_1d, TubePoint([0.0], [0.0])) == 2.0 + 0j

    def test_two_terms_at_i(self, f_two_term_1d):
        got = evaluate(f_two_term_1d, TubePoint([0.0], [1.0]))
        assert abs(got - (1.0 + math.exp(-1.0))) < 1e-15

    def test_growth_closed_form(self, f_case2):
        # e^{i<z,(-1,-1)>} + 1 at z = i(t,t) equals e^{2t} + 1
        for t in (1.0, 5.0, 20.0):
            got = evaluate(f_case2, TubePoint([0.0, 0.0], [t, t]))
            assert abs(got - (math.exp(2 * t) + 1.0)) < 1e-9 * math.exp(2 * t)

    def test_overflow_guard(self, f_case2):
        with pytest.raises(OverflowGuard):
            evaluate(f_case2, TubePoint([0.0, 0.0], [400.0, 400.0]))

    def test_dimension_mismatch(self, f_case2):
        with pytest.raises(DimensionMismatch):
            evaluate(f_case2, TubePoint([0.0], [0.0]))

    def test_additivity(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            p = int(rng.integers(1, 3))
            f = random_expsum(rng, p=p)
            g = random_expsum(rng, p=p)
            z = TubePoint(rng.standard_normal(p), rng.standard_normal(p) * 0.4)
            lhs = evaluate(f + g, z)
            rhs = evaluate(f, z) + evaluate(g, z)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))

    def test_grid_matches_pointwise(self):
        rng = np.random.default_rng(12)
        f = random_expsum(rng, p=2)
        X = rng.standard_normal((40, 2))
        y = rng.standard_normal(2) * 0.3
        grid = evaluate_grid(f, X, y)
        for k in range(40):
            assert abs(grid[k] - evaluate(f, TubePoint(X[k], y))) < 1e-12


class TestLogAbs:
    def test_exact_zero_marker(self):
        f = ExpSum([[0.0], [1.0]], [1.0, -1.0])  # 1 - e^{iz} vanishes at 0
        assert log_abs(f, TubePoint([0.0], [0.0])) == -math.inf

    def test_near_zero_at_float_pi(self, f_two_term_1d):
        # float pi is not an exact zero; the value is merely very negative
        v = log_abs(f_two_term_1d, TubePoint([math.pi], [0.0]))
        assert v < -30.0

    def test_single_term_closed_form(self):
        f = ExpSum([[2.0]], [1.0])
        for x in (-3.0, 0.0, 1.7):
            for y in (-1.0, 0.5, 2.0):
                assert abs(log_abs(f, TubePoint([x], [y])) + 2 * y) < 1e-12

    def test_two_term_value(self, f_two_term_1d):
        got = log_abs(f_two_term_1d, TubePoint([0.0], [1.0]))
        assert abs(got - math.log(1 + math.exp(-1))) < 1e-12


class TestFourierCoefficient:
    def test_recovers_coefficient(self):
        f = ExpSum([[2.0], [math.sqrt(2.0)]], [3.0, 5.0])
        est = fourier_coefficient(f, [2.0], [0.0], S=1e4, grid_per_dim=65536)
        assert abs(est.value - 3.0) <= est.stderr
        assert est.stderr < 2e-3

    def test_off_spectrum_vanishes(self):
        f = ExpSum([[2.0], [math.sqrt(2.0)]], [3.0, 5.0])
        est = fourier_coefficient(f, [1.0], [0.0], S=1e4, grid_per_dim=65536)
        assert abs(est.value) <= est.stderr

    def test_y_invariance_of_b(self):
        # a(y) e^{<y, lam>} is independent of y, up to both stderr bounds
        f = ExpSum([[2.0], [0.5]], [3.0, 1.0 + 1.0j])
        c1 = fourier_coefficient(f, [2.0], [0.5], S=2e3, grid_per_dim=16384)
        c2 = fourier_coefficient(f, [2.0], [1.0], S=2e3, grid_per_dim=16384)
        b1 = c1.value * math.exp(0.5 * 2)
        b2 = c2.value * math.exp(1.0 * 2)
        allowed = c1.stderr * math.exp(0.5 * 2) + c2.stderr * math.exp(1.0 * 2)
        assert abs(b1 - b2) <= allowed

    def test_round_trip_random(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            f = random_expsum(rng, p=1, min_sep=0.5)
            y = rng.uniform(-0.5, 0.5, 1)
            k = int(rng.integers(0, f.n_terms))
            lam = f.frequencies[k]
            est = fourier_coefficient(f, lam, y, S=4e4, grid_per_dim=2**17)
            target = f.coefficients[k] * math.exp(-float(y @ lam))
            assert abs(est.value - target) <= est.stderr
            assert est.stderr < 1e-3

    def test_2d_recovery(self):
        f = ExpSum([[1.0, 0.0], [0.0, 2.0]], [2.0, 1.0j])
        est = fourier_coefficient(f, [1.0, 0.0], [0.0, 0.0], S=400.0, grid_per_dim=128)
        assert abs(est.value - 2.0) <= est.stderr

    def test_bad_grid(self, f_two_term_1d):
        with pytest.raises(BadGrid):
            fourier_coefficient(f_two_term_1d, [0.0], [0.0], S=10.0, grid_per_dim=1)


class TestRestrictToRay:
    def test_projection(self):
        f = ExpSum([[-1, 0], [0, -1]], [1.0, 1.0])
        phi = restrict_to_ray(f, [1.0, 2.0])
        assert sorted(phi.frequencies.ravel().tolist()) == [-2.0, -1.0]
        assert np.allclose(phi.coefficients, 1.0)

    def test_single_term(self):
        f = ExpSum([[0.5, 1.5]], [2.0j])
        x0 = np.array([0.3, -0.2])
        phi = restrict_to_ray(f, [2.0, 1.0], x0)
        assert phi.frequencies[0, 0] == pytest.approx(2.5)
        expected = 2.0j * np.exp(1j * (0.5 * 0.3 + 1.5 * (-0.2)))
        assert abs(phi.coefficients[0] - expected) < 1e-15

    def test_evaluation_preserved(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            f = random_expsum(rng, p=2)
            y0 = rng.uniform(0.2, 1.5, 2)
            x0 = rng.standard_normal(2)
            try:
                phi = restrict_to_ray(f, y0, x0)
            except CollidingFrequencies:
                continue
            w = complex(rng.standard_normal(), rng.uniform(0.1, 1.0))
            lhs = evaluate(phi, TubePoint([w.real], [w.imag]))
            rhs = evaluate(f, TubePoint(x0 + w.real * y0, w.imag * y0))
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))

    def test_limit_frequency_maps_to_infimum(self, f_case3):
        # declared accumulation frequency projects to the infimum of the
        # restricted spectrum along an interior direction
        y0 = np.array([0.6, 0.8])
        phi = restrict_to_ray(f_case3, y0)
        lim = phi.limit_frequencies[0, 0]
        assert lim == pytest.approx(float(np.array([-1.0, -1.0]) @ y0))
        assert np.all(phi.frequencies[:, 0] > lim)

    def test_colliding(self):
        f = ExpSum([[-1, 0], [0, -1]], [1.0, 1.0])
        with pytest.raises(CollidingFrequencies) as err:
            restrict_to_ray(f, [1.0, 1.0])
        assert err.value.pair is not None


class TestAlmostPeriods:
    def test_integer_frequencies_2pi(self):
        f = ExpSum([[1.0], [2.0], [3.0]], [1.0, 0.5, 0.25])
        assert almost_period_defect(f, [2 * math.pi]) < 1e-12
        tau = find_almost_period(f, 0.01, search_box=10.0, grid=64)
        assert almost_period_defect(f, tau) < 0.01

    def test_irrational_pair(self):
        f = ExpSum([[1.0], [math.sqrt(2.0)]], [1.0, 1.0])
        tau = find_almost_period(f, 0.1, search_box=200.0, grid=2048)
        assert 0.1 <= float(np.linalg.norm(tau))
        assert almost_period_defect(f, tau) < 0.1
        # brute-force oracle: a dense scan of [0, 1e4] confirms candidates
        ts = np.linspace(0.1, 1e4, 500_000)
        d = np.abs(np.exp(1j * ts) - 1) + np.abs(np.exp(1j * math.sqrt(2) * ts) - 1)
        assert d.min() < 0.1

    def test_certificate_dominates_samples(self):
        rng = np.random.default_rng(41)
        f = ExpSum([[0.7], [1.3]], [1.0, 0.5])
        tau = find_almost_period(f, 0.2, search_box=300.0, grid=2048)
        cert = almost_period_defect(f, tau)
        xs = rng.uniform(-200, 200, size=(600, 1))
        diff = np.abs(
            evaluate_grid(f, xs + tau, np.zeros(1)) - evaluate_grid(f, xs, np.zeros(1))
        )
        assert cert >= float(diff.max()) - 1e-12
        assert cert < 0.2

    def test_not_found(self):
        f = ExpSum([[1.0], [math.sqrt(2.0)]], [1.0, 1.0])
        with pytest.raises(NotFound):
            find_almost_period(f, 1e-6, search_box=5.0, grid=16)


class TestValidation:
    def test_duplicate_frequency_rejected(self):
        with pytest.raises(ValueError):
            ExpSum([[1.0], [1.0]], [1.0, 2.0])

    def test_zero_coefficient_rejected(self):
        with pytest.raises(ValueError):
            ExpSum([[1.0], [2.0]], [1.0, 0.0])

    def test_config_round_trip(self, f_case3):
        cfg = f_case3.to_config()
        g = ExpSum.from_config(cfg)
        assert np.array_equal(g.frequencies, f_case3.frequencies)
        assert np.array_equal(g.coefficients, f_case3.coefficients)
        assert np.array_equal(g.limit_frequencies, f_case3.limit_frequencies)
