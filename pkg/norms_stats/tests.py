import itertools
import math

import numpy as np
from django.test import SimpleTestCase

from spectral_model.services import dirichlet_spectrum
from .services import (
    c_gamma_norm,
    euclidean_norm,
    holder_seminorm,
    moment_ratios,
    p_moment,
    sobolev,
    sobolev_norm,
    space_holder_norm,
    spatial_field,
)


def brute_force_seminorm(values, times, gamma, norm):
    best = 0.0
    for i, j in itertools.combinations(range(len(times)), 2):
        best = max(best, norm(values[j] - values[i]) / (times[j] - times[i]) ** gamma)
    return best


class SobolevNormTests(SimpleTestCase):
    def setUp(self):
        self.spec = dirichlet_spectrum(4)

    def test_first_mode(self):
        self.assertAlmostEqual(sobolev_norm([1.0, 0, 0, 0], self.spec, 0.5), math.pi, places=13)

    def test_zero_exponent_is_euclidean(self):
        u = np.array([3.0, -4.0, 0.5, 1.0])
        self.assertAlmostEqual(sobolev_norm(u, self.spec, 0.0), euclidean_norm(u), places=14)
        self.assertAlmostEqual(euclidean_norm(u), math.sqrt(np.sum(u ** 2)), places=14)

    def test_homogeneity(self):
        u = np.array([0.3, -1.2, 2.0, 0.1])
        self.assertAlmostEqual(sobolev_norm(-2.5 * u, self.spec, -0.3), 2.5 * sobolev_norm(u, self.spec, -0.3))

    def test_batched_rows(self):
        u = np.eye(4)
        np.testing.assert_allclose(sobolev_norm(u, self.spec, 0.5), np.pi * np.arange(1, 5))


class HolderSeminormTests(SimpleTestCase):
    def test_linear_path(self):
        self.assertAlmostEqual(holder_seminorm([0.0, 0.5, 1.0], [0.0, 0.5, 1.0], 0.5), 1.0)

    def test_constant_path(self):
        self.assertEqual(holder_seminorm(np.ones((5, 3)), np.linspace(0, 1, 5), 0.3), 0.0)

    def test_zero_exponent_is_diameter(self):
        vals = np.array([0.2, -1.0, 0.7, 0.1])
        self.assertAlmostEqual(holder_seminorm(vals, np.linspace(0, 1, 4), 0.0), 1.7)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        times = np.sort(rng.uniform(0, 1, 12))
        values = rng.normal(size=(12, 3))
        spec = dirichlet_spectrum(3)
        norm = sobolev(spec, -0.3)
        expected = brute_force_seminorm(values, times, 0.4, norm)
        self.assertAlmostEqual(holder_seminorm(values, times, 0.4, norm, "all-pairs"), expected, places=12)

    def test_dyadic_is_lower_bound(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            values = np.cumsum(rng.normal(size=(65, 2)), axis=0)
            times = np.linspace(0, 1, 65)
            dyadic = holder_seminorm(values, times, 0.3, policy="dyadic-gaps")
            full = holder_seminorm(values, times, 0.3, policy="all-pairs")
            self.assertLessEqual(dyadic, full + 1e-12)

    def test_single_point_rejected(self):
        with self.assertRaises(ValueError):
            holder_seminorm([1.0], [0.0], 0.5)


class CGammaNormTests(SimpleTestCase):
    def test_constant_path(self):
        c = np.array([3.0, 4.0])
        self.assertAlmostEqual(c_gamma_norm(np.tile(c, (6, 1)), np.linspace(0, 1, 6), 0.2), 5.0)

    def test_zero_exponent_sup_plus_diameter(self):
        vals = np.array([0.5, -2.0, 1.0])
        self.assertAlmostEqual(c_gamma_norm(vals, [0, 0.5, 1], 0.0), 2.0 + 3.0)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(4)
        values = rng.normal(size=(10, 4))
        times = np.linspace(0, 2, 10)
        sup = max(euclidean_norm(v) for v in values)
        expected = sup + brute_force_seminorm(values, times, 0.25, euclidean_norm)
        self.assertAlmostEqual(c_gamma_norm(values, times, 0.25, euclidean_norm), expected, places=12)


class SpatialFieldTests(SimpleTestCase):
    def test_first_mode_midpoint(self):
        field = spatial_field([1.0], 8)
        self.assertAlmostEqual(field[4], math.sqrt(2), places=14)

    def test_dirichlet_boundary(self):
        field = spatial_field(np.random.default_rng(0).normal(size=(20, 3)), 64)
        np.testing.assert_array_equal(field[0], 0.0)
        np.testing.assert_array_equal(field[-1], 0.0)

    def test_discrete_parseval(self):
        u = 1.0 / np.arange(1, 21) ** 3
        field = spatial_field(u, 512)
        self.assertAlmostEqual(np.sum(field ** 2) / 512, np.sum(u ** 2), places=12)

    def test_dst_matches_direct_sum(self):
        u = np.random.default_rng(2).normal(size=(15, 2))
        P = 32
        x = np.arange(P + 1) / P
        direct = np.sqrt(2) * np.sin(np.pi * np.outer(x, np.arange(1, 16))) @ u
        np.testing.assert_allclose(spatial_field(u, P), direct, atol=1e-12)

    def test_many_modes_fall_back_to_direct(self):
        u = np.random.default_rng(3).normal(size=40)
        P = 16
        x = np.arange(P + 1) / P
        direct = np.sqrt(2) * np.sin(np.pi * np.outer(x, np.arange(1, 41))) @ u
        direct[0] = direct[-1] = 0.0
        np.testing.assert_allclose(spatial_field(u, P), direct, atol=1e-11)


class SpaceHolderNormTests(SimpleTestCase):
    def test_linear_ramp(self):
        self.assertAlmostEqual(space_holder_norm([0.0, 0.5, 1.0], 0.5), 2.0)

    def test_zero_field(self):
        self.assertEqual(space_holder_norm(np.zeros(9), 0.3), 0.0)

    def test_homogeneity(self):
        vals = np.sin(np.linspace(0, 3, 17))
        self.assertAlmostEqual(space_holder_norm(-3 * vals, 0.4), 3 * space_holder_norm(vals, 0.4))

    def test_zero_exponent_is_sup(self):
        vals = np.array([0.0, -2.0, 1.0, 0.0])
        self.assertEqual(space_holder_norm(vals, 0.0), 2.0)

    def test_batched(self):
        vals = np.column_stack([np.linspace(0, 1, 3), 2 * np.linspace(0, 1, 3)])
        np.testing.assert_allclose(space_holder_norm(vals, 0.5), [2.0, 4.0])


class PMomentTests(SimpleTestCase):
    def test_constant_samples(self):
        est = p_moment([2.5] * 10, 3)
        self.assertAlmostEqual(est.value, 2.5)
        self.assertAlmostEqual(est.std_error, 0.0)

    def test_zero_samples(self):
        est = p_moment([0.0, 0.0, 0.0], 2)
        self.assertEqual((est.value, est.std_error), (0.0, 0.0))

    def test_half_normal_second_moment(self):
        s = np.abs(np.random.default_rng(10).standard_normal(100_000))
        est = p_moment(s, 2)
        self.assertLess(abs(est.value - 1.0), 4 * est.std_error)

    def test_lyapunov_monotone(self):
        s = np.abs(np.random.default_rng(11).standard_normal(500))
        values = [p_moment(s, p).value for p in (1, 1.5, 2, 3, 4, 8)]
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))

    def test_bootstrap_interval_brackets_value(self):
        s = np.abs(np.random.default_rng(12).standard_normal(400))
        est = p_moment(s, 2, bootstrap=500, seed=3)
        lo, hi = est.ci()
        self.assertLess(lo, est.value)
        self.assertGreater(hi, est.value)

    def test_too_few_samples(self):
        with self.assertRaises(ValueError):
            p_moment([1.0], 2)


class MomentRatioTests(SimpleTestCase):
    def test_gaussian_norms_stay_in_band(self):
        rng = np.random.default_rng(13)
        scales = 1.0 / np.arange(1, 51)
        norms = np.linalg.norm(rng.standard_normal((5000, 50)) * scales, axis=1)
        for p, ratio in moment_ratios(norms, (1, 2, 4)).items():
            self.assertGreaterEqual(ratio, 0.5, p)
            self.assertLessEqual(ratio, 3.0, p)
