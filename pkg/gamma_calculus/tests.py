import math

import numpy as np
from django.test import SimpleTestCase
from scipy import integrate

from spectral_model.domain import GeneratorSpectrum, NoiseModel
from spectral_model.services import dirichlet_spectrum
from splitflow.exceptions import ConstraintViolation
from .domain import StepFunction
from .services import (
    c1_bound_check,
    cross_gamma_term,
    discretized_gamma_norm_sq,
    error_gamma_norm_sq,
    exact_gamma_norm_sq,
    operator_gamma_norm_sq,
    rate_envelope_check,
    scalar_multiplier_identity,
    uniform_ms_error,
)

PLAIN = NoiseModel(sigma_E=0.0, beta=0.0)


def single(lam, w=0.0):
    return GeneratorSpectrum([lam], w=w)


def quad_oracle(func, t, n, T):
    h = T / n
    points = [j * h for j in range(1, n) if j * h < t]
    val, _ = integrate.quad(func, 0.0, t, points=points or None, limit=400, epsabs=0.0, epsrel=1e-13)
    return val


def stair(lam, r, h):
    return math.exp(lam * h * math.ceil(r / h))


class ExactGammaNormTests(SimpleTestCase):
    def test_single_mode(self):
        res = exact_gamma_norm_sq(single(-1.0), PLAIN, 1.0, 0.0)
        self.assertAlmostEqual(res.value_sq, (1 - math.exp(-2)) / 2, places=14)
        self.assertAlmostEqual(res.value_sq, 0.4323324, places=7)

    def test_zero_eigenvalue_limit(self):
        res = exact_gamma_norm_sq(single(0.0, w=1.0), PLAIN, 0.7, 0.0)
        self.assertAlmostEqual(res.value_sq, 0.7, places=15)

    def test_orthogonal_additivity(self):
        a = exact_gamma_norm_sq(single(-1.0), PLAIN, 1.0, 0.0).value_sq
        b = exact_gamma_norm_sq(single(-3.0), PLAIN, 1.0, 0.0).value_sq
        both = exact_gamma_norm_sq(GeneratorSpectrum([-1.0, -3.0]), PLAIN, 1.0, 0.0)
        self.assertAlmostEqual(both.value_sq, a + b, places=14)
        self.assertEqual(len(both.per_mode), 2)

    def test_heat_model_reports_tail(self):
        res = exact_gamma_norm_sq(dirichlet_spectrum(256), NoiseModel(sigma_E=-0.3), 1.0, 0.0)
        self.assertIsNotNone(res.tail_sq)
        self.assertLess(res.tail_sq, 1e-3 * res.value_sq)

    def test_inadmissible_exponent_rejected(self):
        with self.assertRaises(ConstraintViolation):
            exact_gamma_norm_sq(dirichlet_spectrum(64), NoiseModel(sigma_E=-0.3), 1.0, 0.55)

    def test_time_outside_horizon_rejected(self):
        with self.assertRaises(ConstraintViolation):
            exact_gamma_norm_sq(single(-1.0), PLAIN, 0.0, 0.0)


class DiscretizedGammaNormTests(SimpleTestCase):
    def test_single_cell(self):
        res = discretized_gamma_norm_sq(single(-1.0), PLAIN, 1, 1.0, 0.0)
        self.assertAlmostEqual(res.value_sq, math.exp(-2), places=14)

    def test_two_cells(self):
        res = discretized_gamma_norm_sq(single(-1.0), PLAIN, 2, 1.0, 0.0)
        self.assertAlmostEqual(res.value_sq, 0.5 * (math.exp(-1) + math.exp(-2)), places=14)
        self.assertAlmostEqual(res.value_sq, 0.2516074, places=7)

    def test_zero_eigenvalue_matches_exact(self):
        res = discretized_gamma_norm_sq(single(0.0, w=2.0), PLAIN, 5, 0.63, 0.0, T=1.0)
        self.assertAlmostEqual(res.value_sq, 0.63, places=14)

    def test_partial_final_cell_against_quadrature(self):
        lam, n, t, T = -2.3, 5, 0.73, 1.0
        res = discretized_gamma_norm_sq(single(lam), PLAIN, n, t, 0.0, T=T)
        oracle = quad_oracle(lambda r: stair(lam, r, T / n) ** 2, t, n, T)
        self.assertAlmostEqual(res.value_sq / oracle, 1.0, places=12)


class ErrorGammaNormTests(SimpleTestCase):
    def test_zero_mode_is_exact(self):
        res = error_gamma_norm_sq(GeneratorSpectrum([0.0, -1.0, -5.0], w=1.0), PLAIN, 3, 1.0, 0.0)
        self.assertLessEqual(abs(res.per_mode[0]), 1e-14)
        self.assertGreater(res.per_mode[1], 0)

    def test_single_cell_against_quadrature(self):
        res = error_gamma_norm_sq(single(-1.0), PLAIN, 1, 1.0, 0.0)
        oracle, _ = integrate.quad(lambda r: (math.exp(-1) - math.exp(-r)) ** 2, 0, 1, epsabs=0, epsrel=1e-13)
        self.assertAlmostEqual(res.value_sq / oracle, 1.0, places=12)
        self.assertAlmostEqual(res.value_sq, 0.1025793, places=7)

    def test_random_single_modes_against_quadrature(self):
        rng = np.random.default_rng(2024)
        for _ in range(40):
            lam = -rng.uniform(0.5, 100.0)
            n = int(rng.integers(1, 30))
            T = rng.uniform(0.5, 2.0)
            t = rng.uniform(0.05, 1.0) * T
            res = error_gamma_norm_sq(single(lam), PLAIN, n, t, 0.0, T=T)
            oracle = quad_oracle(lambda r: (stair(lam, r, T / n) - math.exp(lam * r)) ** 2, t, n, T)
            self.assertLess(abs(res.value_sq / oracle - 1.0), 1e-10, (lam, n, t, T))

    def test_small_exponent_branch_against_quadrature(self):
        lam, n = -0.3, 64
        res = error_gamma_norm_sq(single(lam), PLAIN, n, 1.0, 0.0)
        oracle = quad_oracle(lambda r: (stair(lam, r, 1 / n) - math.exp(lam * r)) ** 2, 1.0, n, 1.0)
        self.assertLess(abs(res.value_sq / oracle - 1.0), 1e-10)

    def test_polarization_consistency(self):
        spec = GeneratorSpectrum([-0.7, -4.0, -31.0])
        for n, t in ((1, 1.0), (4, 1.0), (5, 0.73), (16, 0.5)):
            e = exact_gamma_norm_sq(spec, PLAIN, t, 0.0, T=1.0).per_mode
            d = discretized_gamma_norm_sq(spec, PLAIN, n, t, 0.0, T=1.0).per_mode
            c = cross_gamma_term(spec, PLAIN, n, t, 0.0, T=1.0).per_mode
            err = error_gamma_norm_sq(spec, PLAIN, n, t, 0.0, T=1.0).per_mode
            np.testing.assert_allclose(err, e + d - 2 * c, rtol=1e-9, atol=1e-15)

    def test_cross_term_against_quadrature(self):
        lam, n, t = -3.1, 4, 0.9
        res = cross_gamma_term(single(lam), PLAIN, n, t, 0.0, T=1.0)
        oracle = quad_oracle(lambda r: stair(lam, r, 0.25) * math.exp(lam * r), t, n, 1.0)
        self.assertAlmostEqual(res.value_sq / oracle, 1.0, places=12)

    def test_triangle_sanity(self):
        spec = dirichlet_spectrum(128)
        noise = NoiseModel(sigma_E=-0.3)
        for n in (2, 8, 32):
            e = exact_gamma_norm_sq(spec, noise, 1.0, 0.0).per_mode
            d = discretized_gamma_norm_sq(spec, noise, n, 1.0, 0.0).per_mode
            err = error_gamma_norm_sq(spec, noise, n, 1.0, 0.0).per_mode
            self.assertTrue(np.all(err <= (np.sqrt(e) + np.sqrt(d)) ** 2 * (1 + 1e-12)))

    def test_time_rescaling(self):
        lam = -np.pi ** 2 * np.arange(1, 21) ** 2
        T = 2.0
        lhs = error_gamma_norm_sq(GeneratorSpectrum(lam), PLAIN, 8, T, 0.0, T=T).per_mode
        rhs = error_gamma_norm_sq(GeneratorSpectrum(lam * T), PLAIN, 8, 1.0, 0.0, T=1.0).per_mode
        np.testing.assert_allclose(lhs, T * rhs, rtol=1e-12)

    def test_error_tail_is_four_times_exact_tail(self):
        spec, noise = dirichlet_spectrum(64), NoiseModel(sigma_E=-0.3)
        exact = exact_gamma_norm_sq(spec, noise, 1.0, 0.0)
        err = error_gamma_norm_sq(spec, noise, 8, 1.0, 0.0)
        self.assertAlmostEqual(err.tail_sq, 4 * exact.tail_sq)


class C1BoundTests(SimpleTestCase):
    def test_documented_instance(self):
        check = c1_bound_check(-1.0, 1.0, (0.0, 1.0), 0.0, 0.0)
        tail, _ = integrate.quad(lambda s: math.sqrt(s) * math.exp(-s), 0, 1, epsabs=0, epsrel=1e-13)
        self.assertAlmostEqual(check.lhs, math.sqrt((1 - math.exp(-2)) / 2), places=12)
        self.assertAlmostEqual(check.lhs, 0.6575199, places=7)
        self.assertAlmostEqual(check.rhs, math.exp(-1) + tail, places=10)
        self.assertAlmostEqual(check.rhs, 0.7468, places=4)
        self.assertTrue(check.holds)

    def test_constant_integrand_is_equality(self):
        check = c1_bound_check(0.0, 2.0, (0.2, 0.9), -0.3, 0.1, w=1.5)
        self.assertAlmostEqual(check.lhs, check.rhs, places=12)
        self.assertAlmostEqual(check.lhs, math.sqrt(0.7) * 2.0 * 1.5 ** (-0.2), places=12)

    def test_random_sweep(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            k = int(rng.integers(1, 5))
            lam = -rng.uniform(1e-3, 100.0, size=k)
            iota = rng.uniform(0.1, 2.0, size=k)
            a = rng.uniform(0.0, 0.9)
            b = rng.uniform(a + 1e-3, 1.0)
            sigma_E = rng.uniform(-0.5, 0.0)
            alpha = rng.uniform(0.0, 0.5)
            check = c1_bound_check(lam, iota, (a, b), sigma_E, alpha)
            self.assertTrue(check.holds, (lam, iota, a, b, check))

    def test_reversed_interval_rejected(self):
        with self.assertRaises(ConstraintViolation):
            c1_bound_check(-1.0, 1.0, (0.5, 0.2), 0.0, 0.0)


class ScalarMultiplierTests(SimpleTestCase):
    def test_constant_function(self):
        check = scalar_multiplier_identity(StepFunction((0.0, 1.0), (1.0,)), 3.5)
        self.assertAlmostEqual(check.lhs_sq, 3.5, places=14)
        self.assertLess(check.relative_gap, 1e-12)

    def test_indicator_of_half(self):
        check = scalar_multiplier_identity(StepFunction((0.0, 0.5), (1.0,)), 2.0)
        self.assertAlmostEqual(check.lhs_sq, 1.0, places=14)
        self.assertLess(check.relative_gap, 1e-12)

    def test_exponential_multiplier(self):
        lam, T = -1.3, 1.0
        R = operator_gamma_norm_sq(dirichlet_spectrum(32), NoiseModel(sigma_E=-0.3))
        J = math.expm1(2 * lam * T) / (2 * lam)
        check = scalar_multiplier_identity(lambda s: np.exp(lam * s), R, T=T, g_norm_sq=J)
        self.assertLess(check.relative_gap, 1e-12)

    def test_random_step_functions(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            k = int(rng.integers(1, 8))
            breaks = tuple(np.concatenate([[0.0], np.sort(rng.uniform(0.01, 0.99, size=k - 1)), [1.0]]))
            values = tuple(rng.normal(size=k))
            check = scalar_multiplier_identity(StepFunction(breaks, values), rng.uniform(0.1, 10.0))
            self.assertLess(check.relative_gap, 1e-12)

    def test_random_exponentials(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            lam = -rng.uniform(0.01, 20.0)
            J = math.expm1(2 * lam) / (2 * lam)
            check = scalar_multiplier_identity(lambda s: np.exp(lam * s), 1.7, g_norm_sq=J)
            self.assertLess(check.relative_gap, 1e-12)


class UniformAndEnvelopeTests(SimpleTestCase):
    def setUp(self):
        self.spec = dirichlet_spectrum(256)
        self.noise = NoiseModel(sigma_E=-0.3)

    def test_uniform_error_vanishes(self):
        times = np.linspace(0.05, 1.0, 20)
        errors = [uniform_ms_error(self.spec, self.noise, n, 0.0, times) for n in (4, 16, 64, 256)]
        self.assertTrue(all(b < a for a, b in zip(errors, errors[1:])))
        self.assertLess(errors[-1], 0.25 * errors[0])

    def test_rate_envelope(self):
        check = rate_envelope_check(self.spec, self.noise, 0.0, 0.25, [4, 8, 16, 32, 64], [0.25, 0.5, 1.0])
        self.assertGreater(check.constant, 0)
        self.assertLessEqual(check.worst_ratio, 1.5)
