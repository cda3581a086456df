import numpy as np
from django.test import SimpleTestCase
from scipy import integrate

from splitflow.exceptions import ConstraintViolation
from .domain import GeneratorSpectrum, GridSpec, NoiseModel
from .services import (
    analytic_bound,
    check_noise_admissible,
    dirichlet_spectrum,
    discretized_semigroup_factor,
    fractional_weight,
    semigroup_factor,
)


class DirichletSpectrumTests(SimpleTestCase):
    def test_first_eigenvalue(self):
        spec = dirichlet_spectrum(1)
        self.assertAlmostEqual(spec.eigenvalues[0], -9.8696044, places=7)
        self.assertEqual(spec.w, 0.0)

    def test_k_squared_scaling(self):
        spec = dirichlet_spectrum(3)
        np.testing.assert_allclose(spec.eigenvalues, -np.pi ** 2 * np.array([1.0, 4.0, 9.0]))
        self.assertTrue(np.all(np.diff(spec.eigenvalues) < 0))

    def test_eigenfunction_normalization(self):
        for k in (1, 2, 7):
            val, _ = integrate.quad(lambda x: 2 * np.sin(k * np.pi * x) ** 2, 0, 1)
            self.assertAlmostEqual(val, 1.0, places=12)

    def test_zero_modes_rejected(self):
        with self.assertRaises(ConstraintViolation):
            dirichlet_spectrum(0)

    def test_eigenvalue_must_stay_below_shift(self):
        with self.assertRaises(ConstraintViolation) as ctx:
            GeneratorSpectrum([-1.0, 0.0], w=0.0)
        self.assertEqual(ctx.exception.constraint, "λ_k<w")


class SemigroupFactorTests(SimpleTestCase):
    def test_identity_at_zero(self):
        self.assertEqual(semigroup_factor(-3.0, 0.0), 1.0)

    def test_decay(self):
        self.assertAlmostEqual(semigroup_factor(-1.0, 1.0), 0.3678794, places=7)

    def test_semigroup_law(self):
        rng = np.random.default_rng(3)
        for lam, s, t in rng.uniform([-50, 0, 0], [0, 1, 1], size=(20, 3)):
            self.assertAlmostEqual(
                semigroup_factor(lam, s) * semigroup_factor(lam, t), semigroup_factor(lam, s + t), places=14
            )

    def test_negative_time_rejected(self):
        with self.assertRaises(ConstraintViolation):
            semigroup_factor(-1.0, -0.1)


class DiscretizedSemigroupFactorTests(SimpleTestCase):
    def test_ceiling_arithmetic(self):
        self.assertAlmostEqual(discretized_semigroup_factor(-1.0, 0.3, 2, 1.0), 0.6065307, places=7)

    def test_matches_semigroup_at_grid_points(self):
        for j in range(11):
            t = j * 0.1
            self.assertAlmostEqual(
                discretized_semigroup_factor(-2.0, t, 10, 1.0), semigroup_factor(-2.0, t), places=14
            )

    def test_zero_eigenvalue(self):
        for t in (0.0, 0.13, 0.5, 1.0):
            self.assertEqual(discretized_semigroup_factor(0.0, t, 7, 1.0), 1.0)

    def test_definitional_identity_on_random_times(self):
        rng = np.random.default_rng(11)
        T, n = 2.5, 8
        for t in rng.uniform(0, T, size=50):
            expected = semigroup_factor(-1.7, (T / n) * np.ceil(n * t / T))
            self.assertAlmostEqual(discretized_semigroup_factor(-1.7, t, n, T), expected, places=14)

    def test_nonincreasing_within_cell(self):
        ts = np.linspace(0.26, 0.5, 25)
        exact = semigroup_factor(-3.0, ts)
        disc = discretized_semigroup_factor(-3.0, ts, 4, 1.0)
        self.assertTrue(np.all(np.diff(exact) <= 0))
        self.assertTrue(np.all(np.diff(disc) <= 0))

    def test_time_beyond_horizon_rejected(self):
        with self.assertRaises(ConstraintViolation):
            discretized_semigroup_factor(-1.0, 1.5, 2, 1.0)


class FractionalWeightTests(SimpleTestCase):
    def test_zero_exponent(self):
        self.assertEqual(fractional_weight(-5.0, 0.0, 0.0), 1.0)

    def test_square_root(self):
        self.assertAlmostEqual(fractional_weight(-np.pi ** 2, 0.0, 0.5), np.pi, places=14)

    def test_power_law(self):
        a = fractional_weight(-7.0, 1.0, 0.3) * fractional_weight(-7.0, 1.0, -0.8)
        self.assertAlmostEqual(a, fractional_weight(-7.0, 1.0, -0.5), places=14)

    def test_nonpositive_gap_rejected(self):
        with self.assertRaises(ConstraintViolation):
            fractional_weight(1.0, 1.0, 0.5)


class NoiseAdmissibilityTests(SimpleTestCase):
    def setUp(self):
        self.spec = dirichlet_spectrum(1000)

    def test_heat_default_converges(self):
        report = check_noise_admissible(self.spec, NoiseModel(sigma_E=-0.3, beta=0.0))
        self.assertTrue(report.finite)
        self.assertAlmostEqual(report.exponent, 1.2)
        self.assertGreater(report.partial_sum, 0)
        self.assertLess(report.tail_estimate, 1.0)

    def test_harmonic_case_diverges(self):
        report = check_noise_admissible(self.spec, NoiseModel(sigma_E=-0.25, beta=0.0))
        self.assertFalse(report.finite)

    def test_smoother_noise_compensates(self):
        report = check_noise_admissible(self.spec, NoiseModel(sigma_E=-0.5, beta=0.2))
        self.assertTrue(report.finite)

    def test_tail_bound_dominates_true_tail(self):
        big = dirichlet_spectrum(200_000)
        noise = NoiseModel(sigma_E=-0.3)
        full = check_noise_admissible(big, noise).partial_sum
        report = check_noise_admissible(big, noise, K=1000)
        self.assertGreaterEqual(report.tail_estimate, full - report.partial_sum)

    def test_custom_weights_report_unknown_tail(self):
        noise = NoiseModel(sigma_E=-0.3, iota="custom", iota_values=tuple([1.0] * 1000))
        with self.assertLogs("spectral_model.services", level="WARNING"):
            report = check_noise_admissible(self.spec, noise)
        self.assertIsNone(report.tail_estimate)

    def test_truncation_beyond_spectrum_rejected(self):
        with self.assertRaises(ConstraintViolation):
            check_noise_admissible(self.spec, NoiseModel(), K=2000)


class GridSpecTests(SimpleTestCase):
    def test_coarse_points_are_fine_points(self):
        grid = GridSpec(T=2.0, n=4, m=16)
        np.testing.assert_allclose(grid.fine_times[:: grid.R], grid.coarse_times)
        self.assertEqual(grid.R, 4)

    def test_divisibility_named(self):
        with self.assertRaises(ConstraintViolation) as ctx:
            GridSpec(T=1.0, n=3, m=16)
        self.assertEqual(ctx.exception.constraint, "n|m")


class AnalyticBoundTests(SimpleTestCase):
    def test_holds_on_a_grid(self):
        spec = dirichlet_spectrum(500)
        for theta in (0.0, 0.25, 0.5, 1.0, 2.0):
            for t in (1e-4, 1e-2, 0.3, 1.0):
                bound = analytic_bound(spec, theta, t, 1.0)
                self.assertTrue(bound.holds, (theta, t, bound))

    def test_shifted_spectrum(self):
        spec = GeneratorSpectrum([-1.0, -10.0, -100.0], w=2.0)
        bound = analytic_bound(spec, 0.5, 0.5, 1.0)
        self.assertAlmostEqual(bound.rhs, np.sqrt(2.0) + np.sqrt(0.5 / np.e))
        self.assertTrue(bound.holds)
