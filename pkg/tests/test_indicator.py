import math

import numpy as np
import pytest

from tubeap import (
    ExpSum,
    normalize,
    p_indicator_empirical,
    p_indicator_exact,
    pl_bound_check,
    support_function,
)
from conftest import random_expsum


class TestExact:
    def test_two_term(self, f_two_term_1d):
        assert p_indicator_exact(f_two_term_1d, [1.0]) == 0.0

    def test_2d(self, f_case2):
        assert p_indicator_exact(f_case2, np.array([1.0, 1.0])) == 2.0

    def test_single_term(self):
        f = ExpSum([[0.7, -0.3]], [2.0j])
        y = np.array([1.3, 0.4])
        assert p_indicator_exact(f, y) == pytest.approx(-float(y @ [0.7, -0.3]))

    def test_limit_frequencies_count(self):
        f = ExpSum([[1.0]], [1.0], limit_frequencies=[[-2.0]])
        assert p_indicator_exact(f, [1.0]) == 2.0

    def test_identity_with_support_function(self):
        # the indicator equals the spectrum's support function at -y, bitwise
        rng = np.random.default_rng(101)
        for _ in range(500):
            p = int(rng.integers(1, 4))
            f = random_expsum(rng, p=p)
            y = rng.standard_normal(p)
            if np.linalg.norm(y) == 0:
                continue
            assert p_indicator_exact(f, y) == support_function(f.spectrum(), -y)

    def test_positive_homogeneity_exact(self):
        rng = np.random.default_rng(103)
        f = random_expsum(rng, p=2)
        y = np.array([0.3, 0.9])
        for t in (2.0, 0.5, 8.0):
            assert p_indicator_exact(f, t * y) == t * p_indicator_exact(f, y)


class TestEmpirical:
    def test_two_term_flat(self, f_two_term_1d):
        est = p_indicator_empirical(f_two_term_1d, [1.0], r_max=50.0)
        assert abs(est.empirical - 0.0) < 0.1

    def test_2d_growth(self, f_case2):
        est = p_indicator_empirical(f_case2, np.array([1.0, 1.0]), r_max=50.0)
        assert abs(est.empirical - 2.0) < 0.05

    def test_single_term_closed_form(self):
        f = ExpSum([[1.2]], [3.0])
        est = p_indicator_empirical(f, [1.0], r_max=40.0)
        assert est.empirical == pytest.approx(-1.2 + math.log(3.0) / 40.0, abs=1e-12)

    def test_convergence_bound(self):
        # |empirical - exact| <= (log sum|b| + log 2)/r_max when the dominant
        # frequency along y is unique and moduli are >= 1
        rng = np.random.default_rng(107)
        done = 0
        while done < 40:
            p = int(rng.integers(1, 3))
            f = random_expsum(rng, p=p, coef_lo=1.0, coef_hi=3.0)
            y = rng.uniform(0.3, 1.5, p)
            vals = np.sort(-(f.frequencies @ y))
            if len(vals) > 1 and vals[-1] - vals[-2] < 0.45:
                continue
            est = p_indicator_empirical(f, y, r_max=50.0)
            bound = (math.log(float(np.sum(np.abs(f.coefficients)))) + math.log(2.0)) / 50.0
            assert abs(est.empirical - est.exact) <= bound
            done += 1


class TestNormalize:
    def test_single_term_flattens(self):
        f = ExpSum([[1.0]], [2.0])
        F = normalize(f, [1.0])
        assert F.frequencies[0, 0] == 0.0
        assert F.coefficients[0] == 1.0

    def test_two_term_unchanged_frequencies(self, f_two_term_1d):
        F = normalize(f_two_term_1d, [1.0], sup_bound=2.0)
        assert np.array_equal(F.frequencies, f_two_term_1d.frequencies)
        assert np.allclose(np.abs(F.coefficients), 0.5)

    def test_indicator_nonpositive_after(self):
        rng = np.random.default_rng(109)
        for _ in range(30):
            p = int(rng.integers(1, 3))
            f = random_expsum(rng, p=p)
            y0 = rng.standard_normal(p)
            y0 /= np.linalg.norm(y0)
            F = normalize(f, y0)
            assert p_indicator_exact(F, y0) <= 1e-9
            assert float(np.sum(np.abs(F.coefficients))) <= 1.0 + 1e-12

    def test_axis_direction_exact_zero(self):
        rng = np.random.default_rng(113)
        f = random_expsum(rng, p=2)
        y0 = np.array([1.0, 0.0])
        F = normalize(f, y0)
        assert p_indicator_exact(F, y0) <= 0.0

    def test_bad_sup_bound_rejected(self, f_two_term_1d):
        with pytest.raises(ValueError):
            normalize(f_two_term_1d, [1.0], sup_bound=0.1)


class TestPLBound:
    def test_half_sum(self, f_two_term_1d):
        F = normalize(f_two_term_1d, [1.0])  # (1 + e^{iz})/2
        assert pl_bound_check(F, [1.0], [0.5, 1.0, 2.0, 5.0], x_probes=128) == []

    def test_single_term_equality_family(self):
        F = ExpSum([[1.0]], [1.0])
        assert pl_bound_check(F, [1.0], [1.0, 10.0], x_probes=64) == []

    def test_random_normalized_three_term(self):
        rng = np.random.default_rng(127)
        for _ in range(10):
            f = random_expsum(rng, p=2, n_terms=3)
            y0 = rng.uniform(0.2, 1.0, 2)
            y0 /= np.linalg.norm(y0)
            F = normalize(f, y0)
            y = rng.uniform(0.2, 1.0, 2)
            assert pl_bound_check(F, y, [1.0, 3.0, 9.0], x_probes=100) == []
