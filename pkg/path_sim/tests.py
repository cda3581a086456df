import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, tag

from gamma_calculus.services import error_gamma_norm_sq
from spectral_model.domain import GeneratorSpectrum, GridSpec, NoiseModel
from norms_stats.services import sobolev
from spectral_model.services import dirichlet_spectrum
from splitflow.exceptions import ConstraintViolation
from .domain import FinePath
from .services import (
    coupled_step_cov,
    discretized_path,
    discretized_path_direct,
    exact_path,
    normal_block,
    path_seed,
    rng_stream,
    sample_fine_path,
    splitting_path,
)
from .utils import dump_fine_path, load_fine_path


def manual_path(lam, increments, convolutions=None, T=1.0):
    increments = np.atleast_2d(np.asarray(increments, dtype=float))
    if convolutions is None:
        convolutions = increments.copy()
    return FinePath(
        seed=0, sample=-1, T=T, eigenvalues=np.atleast_1d(np.asarray(lam, dtype=float)),
        increments=increments, convolutions=np.atleast_2d(np.asarray(convolutions, dtype=float)),
    )


class CoupledCovarianceTests(SimpleTestCase):
    def test_zero_eigenvalue_is_degenerate(self):
        np.testing.assert_allclose(coupled_step_cov(0.0, 0.1), [[0.1, 0.1], [0.1, 0.1]], rtol=1e-15)

    def test_decaying_mode(self):
        cov = coupled_step_cov(-1.0, 0.1)
        self.assertAlmostEqual(cov[0, 1], 0.0951626, places=7)
        self.assertAlmostEqual(cov[1, 1], 0.0906346, places=7)
        self.assertAlmostEqual(np.linalg.det(cov), 7.5e-6, delta=1e-7)

    def test_determinant_nonnegative(self):
        for lam in (0.0, -1e-6, -1.0, -100.0, -1e4):
            for delta in (1e-4, 1e-2, 1.0):
                self.assertGreaterEqual(np.linalg.det(coupled_step_cov(lam, delta)), -1e-18)


class RngStreamTests(SimpleTestCase):
    def test_same_triple_same_output(self):
        self.assertEqual(rng_stream(42, 3, 17), rng_stream(42, 3, 17))
        self.assertNotEqual(rng_stream(42, 3, 17), rng_stream(42, 3, 18))
        self.assertNotEqual(rng_stream(42, 3, 17), rng_stream(42, 4, 17))

    def test_block_matches_single_draws(self):
        block = normal_block(7, 2, 0, 9)
        for step in range(9):
            np.testing.assert_array_equal(block[step], rng_stream(7, 2, step))
        np.testing.assert_array_equal(normal_block(7, 2, 3, 5), block[3:8])

    def test_moment_sanity(self):
        z = normal_block(123, 0, 0, 500_000).ravel()
        N = z.size
        self.assertLess(abs(z.mean()), 4 / math.sqrt(N))
        self.assertLess(abs(z.var() - 1), 4 * math.sqrt(2 / N))

    def test_distinct_steps_uncorrelated(self):
        z = normal_block(5, 1, 0, 200_001)[:, 0]
        corr = np.corrcoef(z[:-1], z[1:])[0, 1]
        self.assertLess(abs(corr), 4 / math.sqrt(z.size))

    def test_pair_uncorrelated(self):
        z = normal_block(5, 1, 0, 200_000)
        self.assertLess(abs(np.mean(z[:, 0] * z[:, 1])), 4 / math.sqrt(z.shape[0]))

    def test_sample_seeds_differ(self):
        self.assertNotEqual(path_seed(1, 0), path_seed(1, 1))
        self.assertEqual(path_seed(1, 5), path_seed(1, 5))


class SampleFinePathTests(SimpleTestCase):
    def test_sample_covariance_matches(self):
        M = 100_000
        for lam in (0.0, -1.0, -100.0):
            for delta in (1e-3, 0.1):
                spec = GeneratorSpectrum([lam], w=1.0)
                path = sample_fine_path(spec, GridSpec(T=M * delta, n=1, m=M), seed=77)
                expected = coupled_step_cov(lam, path.delta)
                x, y = path.increments[0], path.convolutions[0]
                for a, b, (i, j) in ((x, x, (0, 0)), (x, y, (0, 1)), (y, y, (1, 1))):
                    prod = a * b
                    se = prod.std(ddof=1) / math.sqrt(M)
                    if se == 0:
                        self.assertAlmostEqual(prod.mean(), expected[i, j], places=12)
                        continue
                    self.assertLess(abs(prod.mean() - expected[i, j]), 4 * se, (lam, delta, i, j))

    def test_same_seed_bit_identical(self):
        spec = dirichlet_spectrum(6)
        grid = GridSpec(1.0, 4, 64)
        a = sample_fine_path(spec, grid, seed=9, sample=3)
        b = sample_fine_path(spec, grid, seed=9, sample=3)
        np.testing.assert_array_equal(a.increments, b.increments)
        np.testing.assert_array_equal(a.convolutions, b.convolutions)

    def test_modes_independent(self):
        spec = GeneratorSpectrum([-1.0, -2.0])
        M = 100_000
        path = sample_fine_path(spec, GridSpec(1.0, 1, M), seed=3)
        prod = path.increments[0] * path.increments[1]
        self.assertLess(abs(prod.mean()), 4 * prod.std(ddof=1) / math.sqrt(M))

    def test_truncated_spectrum_reuses_streams(self):
        grid = GridSpec(1.0, 2, 32)
        big = sample_fine_path(dirichlet_spectrum(8), grid, seed=11)
        small = sample_fine_path(dirichlet_spectrum(3), grid, seed=11)
        np.testing.assert_array_equal(big.increments[:3], small.increments)
        np.testing.assert_array_equal(big.convolutions[:3], small.convolutions)

    def test_embedding_weights_scale_rows(self):
        spec = dirichlet_spectrum(5)
        grid = GridSpec(1.0, 2, 16)
        noise = NoiseModel(sigma_E=-0.3, iota="power", iota_power=0.75)
        plain = sample_fine_path(spec, grid, seed=6, sample=1)
        weighted = sample_fine_path(spec, grid, seed=6, noise=noise, sample=1)
        iota = np.arange(1, 6) ** -0.75
        np.testing.assert_allclose(weighted.increments, iota[:, None] * plain.increments, rtol=1e-15)
        np.testing.assert_allclose(weighted.convolutions, iota[:, None] * plain.convolutions, rtol=1e-15)

    def test_zero_mode_sets_convolution_to_increment(self):
        spec = GeneratorSpectrum([0.0, -3.0], w=1.0)
        path = sample_fine_path(spec, GridSpec(1.0, 1, 50), seed=2)
        np.testing.assert_array_equal(path.convolutions[0], path.increments[0])

    def test_refinement_consistency(self):
        path = sample_fine_path(dirichlet_spectrum(4), GridSpec(1.0, 4, 64), seed=8)
        coarse, fine = path.coarse_increments(8), path.coarse_increments(16)
        np.testing.assert_allclose(coarse, fine[:, 0::2] + fine[:, 1::2], rtol=1e-12, atol=1e-15)


class ExactPathTests(SimpleTestCase):
    def test_zero_convolutions(self):
        path = manual_path(-2.0, np.ones(5), np.zeros(5))
        np.testing.assert_array_equal(exact_path(path).values, 0.0)

    def test_zero_eigenvalue_is_brownian(self):
        inc = np.array([0.3, -0.1, 0.7, 0.2])
        path = manual_path(0.0, inc)
        np.testing.assert_allclose(exact_path(path).values[0], np.concatenate([[0], np.cumsum(inc)]))

    def test_recursion_base(self):
        path = manual_path(-1.0, [0.4], [1.0], T=1.0)
        self.assertEqual(exact_path(path).values[0, 1], 1.0)


class SplittingPathTests(SimpleTestCase):
    def test_single_step(self):
        path = manual_path(-1.0, [0.25, 0.25, 0.25, 0.25])
        self.assertAlmostEqual(splitting_path(path, None, 1).values[0, 1], 0.3678794, places=7)

    def test_zero_eigenvalue_is_exact(self):
        inc = np.arange(1.0, 9.0)
        path = manual_path(0.0, inc)
        v = splitting_path(path, None, 4).values[0]
        np.testing.assert_allclose(v, np.concatenate([[0], np.cumsum(inc)[1::2]]))

    def test_explicit_formula(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            n = int(rng.integers(1, 12))
            lam = -rng.uniform(0, 30, size=3)
            path = manual_path(lam, rng.normal(size=(3, 2 * n)))
            v = splitting_path(path, None, n).values
            dB = path.coarse_increments(n)
            t = np.arange(1, n + 1) / n
            for j in range(1, n + 1):
                expected = sum(np.exp(lam * t[j - i]) * dB[:, i - 1] for i in range(1, j + 1))
                np.testing.assert_allclose(v[:, j], expected, rtol=1e-12, atol=1e-14)

    def test_non_divisor_rejected(self):
        path = manual_path(-1.0, np.ones(6))
        with self.assertRaises(ConstraintViolation):
            splitting_path(path, None, 4)


class DiscretizedPathTests(SimpleTestCase):
    def test_coarse_indices_match_splitting(self):
        rng = np.random.default_rng(31)
        for case in range(100):
            n = int(2 ** rng.integers(0, 6))
            R = int(rng.integers(1, 9))
            K = int(rng.integers(1, 6))
            spec = GeneratorSpectrum(-rng.uniform(0.01, 500.0, size=K))
            path = sample_fine_path(spec, GridSpec(rng.uniform(0.2, 3.0), n, n * R), seed=case)
            disc = discretized_path(path, spec, n).values[:, ::R]
            split = splitting_path(path, spec, n).values
            np.testing.assert_allclose(disc, split, rtol=1e-10, atol=1e-13)

    def test_unit_refinement_kernel(self):
        path = manual_path(-1.0, [1.0, 0.0], T=1.0)
        self.assertAlmostEqual(discretized_path(path, None, 2).values[0, 2], math.exp(-1), places=14)

    def test_zero_eigenvalue_partial_sums(self):
        inc = np.array([0.5, -1.0, 2.0, 0.25, 1.0, -0.5])
        path = manual_path(0.0, inc)
        np.testing.assert_allclose(
            discretized_path(path, None, 3).values[0], np.concatenate([[0], np.cumsum(inc)]), atol=1e-14
        )

    def test_block_recursion_matches_direct_sum(self):
        spec = dirichlet_spectrum(5)
        path = sample_fine_path(spec, GridSpec(1.0, 8, 96), seed=4)
        fast = discretized_path(path, spec, 8).values
        slow = discretized_path_direct(path, spec, 8).values
        np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-14)

    def test_initial_value_does_not_change_grid_error(self):
        spec = dirichlet_spectrum(4)
        path = sample_fine_path(spec, GridSpec(1.0, 4, 32), seed=12)
        x = np.array([1.0, -2.0, 0.5, 3.0])
        err0 = discretized_path(path, spec, 4).values - exact_path(path, spec).values
        err1 = discretized_path(path, spec, 4, x=x).values - exact_path(path, spec, x=x).values
        np.testing.assert_allclose(err1[:, ::8], err0[:, ::8], atol=1e-12)
        v = splitting_path(path, spec, 4, x=x).values
        np.testing.assert_allclose(v[:, 0], x)


class FinePathDumpTests(SimpleTestCase):
    def test_dump_and_load(self):
        path = sample_fine_path(dirichlet_spectrum(3), GridSpec(2.0, 2, 8), seed=2 ** 63 + 5, sample=4)
        with tempfile.TemporaryDirectory() as tmp:
            target = dump_fine_path(path, Path(tmp) / "path.bin")
            self.assertEqual(target.stat().st_size, 38 + 8 * (3 + 2 * 3 * 8))
            loaded = load_fine_path(target)
        self.assertEqual((loaded.seed, loaded.sample, loaded.T), (path.seed, path.sample, path.T))
        np.testing.assert_array_equal(loaded.increments, path.increments)
        np.testing.assert_array_equal(loaded.convolutions, path.convolutions)


@tag("slow")
class ItoIsometryCrossCheckTests(SimpleTestCase):
    def test_mc_error_matches_closed_form(self):
        spec = dirichlet_spectrum(32)
        grid = GridSpec(1.0, 64, 512)
        M = 2000
        for noise in (NoiseModel(sigma_E=-0.3), NoiseModel(sigma_E=-0.3, iota="power", iota_power=0.5)):
            norm = sobolev(spec, noise.sigma_E)
            samples = {8: [], 64: []}
            for s in range(M):
                path = sample_fine_path(spec, grid, seed=2024, noise=noise, sample=s)
                exact_T = exact_path(path, spec).at(-1)
                for n in samples:
                    samples[n].append(norm(splitting_path(path, spec, n).at(-1) - exact_T) ** 2)
            for n, vals in samples.items():
                vals = np.asarray(vals)
                closed = error_gamma_norm_sq(spec, noise, n, 1.0, 0.0).value_sq
                se = vals.std(ddof=1) / math.sqrt(M)
                self.assertLess(abs(vals.mean() - closed), 4 * se, (noise.iota, n))
