import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, tag

from spectral_model.domain import GeneratorSpectrum, NoiseModel
from spectral_model.services import dirichlet_spectrum
from splitflow.exceptions import ConstraintViolation
from .domain import SweepConfig
from .services import (
    as_rate_check,
    fit_loglog,
    heat_demo,
    heat_encoding,
    ms_error_sweep,
    pathwise_error_sweep,
    theta_max,
)
from .utils import read_fit_points, write_error_table

HEAT_NOISE = NoiseModel(sigma_E=-0.3, beta=0.0)
POWERS = tuple(2 ** k for k in range(2, 11))


class ThetaMaxTests(SimpleTestCase):
    def test_white_noise_rate(self):
        self.assertAlmostEqual(theta_max(0, 0, 0), 0.5)

    def test_smooth_noise_capped_by_one(self):
        self.assertAlmostEqual(theta_max(0, 1, 0), 1.0)

    def test_formula(self):
        self.assertAlmostEqual(theta_max(0.25, 0, 0.1), 0.15)

    def test_heat_encoding(self):
        self.assertAlmostEqual(theta_max(*heat_encoding(-0.3, 0.0), 0.0), 0.25)
        self.assertAlmostEqual(theta_max(*heat_encoding(-0.3, 0.05), 0.1), 0.10)

    def test_infeasible_named(self):
        with self.assertRaises(ConstraintViolation) as ctx:
            theta_max(0.6, 0.0, 0.0)
        self.assertEqual(ctx.exception.constraint, "(α−β+θ)⁺+γ<1/2")
        with self.assertRaises(ConstraintViolation) as ctx:
            theta_max(0.0, 0.0, 0.5)
        self.assertEqual(ctx.exception.constraint, "γ<1/2")


class FitLogLogTests(SimpleTestCase):
    def test_exact_power_law(self):
        fit = fit_loglog([(n, 3 * n ** -0.5) for n in POWERS])
        self.assertAlmostEqual(fit.slope, 0.5, places=12)
        self.assertAlmostEqual(fit.r2, 1.0, places=12)
        self.assertAlmostEqual(math.exp(fit.intercept), 3.0, places=10)

    def test_constant_errors(self):
        fit = fit_loglog([(n, 0.2) for n in POWERS])
        self.assertAlmostEqual(fit.slope, 0.0, places=12)

    def test_alternating_perturbation(self):
        pts = [(n, n ** -0.5 * (1 + 0.01 * (-1) ** i)) for i, n in enumerate(POWERS)]
        self.assertLess(abs(fit_loglog(pts).slope - 0.5), 0.02)

    def test_needs_three_points(self):
        with self.assertRaises(ConstraintViolation):
            fit_loglog([(4, 1.0), (8, 0.5)])

    def test_rejects_nonpositive(self):
        with self.assertRaises(ConstraintViolation):
            fit_loglog([(4, 1.0), (8, 0.0), (16, 0.2)])


class MsErrorSweepTests(SimpleTestCase):
    def test_zero_mode_model(self):
        config = SweepConfig(GeneratorSpectrum([0.0], w=1.0), NoiseModel(sigma_E=0.0), n_grid=(1, 2, 4))
        self.assertTrue(all(row.error == 0.0 for row in ms_error_sweep(config).rows))

    def test_single_mode_value(self):
        config = SweepConfig(GeneratorSpectrum([-1.0]), NoiseModel(sigma_E=0.0), n_grid=(1, 2, 4))
        row = ms_error_sweep(config).rows[0]
        expected = math.sqrt(math.exp(-2) - 2 * math.exp(-1) * (1 - math.exp(-1)) + (1 - math.exp(-2)) / 2)
        self.assertAlmostEqual(row.error, expected, places=12)
        self.assertAlmostEqual(row.error, 0.3202801, places=6)

    def test_heat_rows_strictly_decreasing(self):
        config = SweepConfig(dirichlet_spectrum(512), HEAT_NOISE, n_grid=POWERS[:6])
        table = ms_error_sweep(config)
        errors = [r.error for r in table.rows]
        self.assertTrue(all(b < a for a, b in zip(errors, errors[1:])))
        self.assertEqual(table.rows[0].bound_theta1, table.rows[0].error)

    def test_final_time_rate(self):
        spec = dirichlet_spectrum(4096)
        fit = fit_loglog(ms_error_sweep(SweepConfig(spec, HEAT_NOISE, n_grid=POWERS)).points())
        self.assertGreaterEqual(fit.slope, 0.45)
        self.assertLessEqual(fit.slope, 0.55)
        fit = fit_loglog(ms_error_sweep(SweepConfig(spec, HEAT_NOISE, n_grid=POWERS, alpha=0.25)).points())
        self.assertGreaterEqual(fit.slope, 0.20)
        self.assertLessEqual(fit.slope, 0.30)

    def test_bit_reproducible(self):
        config = SweepConfig(dirichlet_spectrum(256), HEAT_NOISE, n_grid=POWERS[:4])
        self.assertEqual(ms_error_sweep(config).rows, ms_error_sweep(config).rows)

    def test_divisibility_checked(self):
        with self.assertRaises(ConstraintViolation) as ctx:
            SweepConfig(dirichlet_spectrum(8), HEAT_NOISE, n_grid=(4, 8), m=12)
        self.assertEqual(ctx.exception.constraint, "n|m")


class PathwiseSweepTests(SimpleTestCase):
    def small(self, **kwargs):
        base = dict(spec=dirichlet_spectrum(16), noise=HEAT_NOISE, n_grid=(4, 8, 16), m=64, M=20, seed=5)
        base.update(kwargs)
        return SweepConfig(**base)

    def test_zero_mode_model_is_exact(self):
        config = SweepConfig(GeneratorSpectrum([0.0], w=1.0), NoiseModel(sigma_E=0.0),
                             n_grid=(2, 8), m=8, M=1, seed=3)
        rows = pathwise_error_sweep(config).rows
        self.assertEqual(rows[-1].error, 0.0)
        self.assertAlmostEqual(rows[0].error, 0.0, places=12)

    def test_thread_count_does_not_change_results(self):
        one = pathwise_error_sweep(self.small(threads=1)).rows
        many = pathwise_error_sweep(self.small(threads=4)).rows
        self.assertEqual(one, many)

    def test_confidence_interval_shrinks_with_samples(self):
        def width(M):
            row = pathwise_error_sweep(self.small(M=M, n_grid=(4,), m=16)).rows[0]
            return row.ci_high - row.ci_low
        ratio = width(50) / width(200)
        self.assertGreater(ratio, 1.4)
        self.assertLess(ratio, 2.8)

    def test_errors_decrease(self):
        rows = pathwise_error_sweep(self.small(M=40)).rows
        self.assertGreater(rows[0].error, rows[-1].error)
        for row in rows:
            self.assertLessEqual(row.ci_low, row.error)
            self.assertGreaterEqual(row.ci_high, row.error)

    def test_decaying_embedding_weights_shrink_errors(self):
        flat = pathwise_error_sweep(self.small()).rows
        decaying = pathwise_error_sweep(self.small(noise=NoiseModel(sigma_E=-0.3, iota="power", iota_power=1.0))).rows
        for a, b in zip(flat, decaying):
            self.assertLess(b.error, a.error)


class AsRateCheckTests(SimpleTestCase):
    def test_zero_mode_model(self):
        config = SweepConfig(GeneratorSpectrum([0.0], w=1.0), NoiseModel(sigma_E=0.0), n_grid=(4, 8, 16), m=16)
        self.assertAlmostEqual(as_rate_check(config, 0.2).statistic, 0.0, places=12)

    def test_zero_theta_is_max_error(self):
        config = SweepConfig(dirichlet_spectrum(16), HEAT_NOISE, n_grid=(4, 8, 16), m=64, seed=4)
        stat = as_rate_check(config, 0.0)
        self.assertEqual(stat.statistic, max(stat.scaled))
        self.assertTrue(np.isfinite(stat.statistic))

    def test_theta_above_max_rejected(self):
        config = SweepConfig(dirichlet_spectrum(8), HEAT_NOISE, n_grid=(4, 8), m=8)
        with self.assertRaises(ConstraintViolation):
            as_rate_check(config, 0.5)


class HeatDemoTests(SimpleTestCase):
    def test_infeasible_named(self):
        config = SweepConfig(dirichlet_spectrum(8), HEAT_NOISE, n_grid=(2, 4, 8), gamma=0.2,
                             delta_space=0.1, theta=0.05)
        with self.assertRaises(ConstraintViolation) as ctx:
            heat_demo(config)
        self.assertEqual(ctx.exception.constraint, "γ+δ+θ<1/4")

    def test_requires_negative_space_index(self):
        config = SweepConfig(dirichlet_spectrum(8), NoiseModel(sigma_E=-0.2), n_grid=(2, 4, 8))
        with self.assertRaises(ConstraintViolation) as ctx:
            heat_demo(config)
        self.assertEqual(ctx.exception.constraint, "σ_E<-1/4")

    def test_small_run(self):
        config = SweepConfig(dirichlet_spectrum(32), HEAT_NOISE, n_grid=(4, 8, 16), m=64, M=10, P=64)
        result = heat_demo(config)
        self.assertAlmostEqual(result.theta_max, 0.25)
        self.assertEqual(result.table.experiment, "heat-demo")
        self.assertEqual(len(result.table.rows), 3)


class CsvRoundTripTests(SimpleTestCase):
    def test_emitted_rows_parse_for_fit(self):
        config = SweepConfig(dirichlet_spectrum(128), HEAT_NOISE, n_grid=POWERS[:5])
        table = ms_error_sweep(config)
        with tempfile.TemporaryDirectory() as tmp:
            target = write_error_table(table, Path(tmp) / "ms.csv")
            self.assertTrue(target.read_text().startswith("# splitflow-v1\n"))
            points = read_fit_points(target)
        self.assertEqual(points, [(float(r.n), r.error) for r in table.rows])


@tag("slow")
class AcceptanceSweepTests(SimpleTestCase):
    def test_holder_norm_rate(self):
        config = SweepConfig(dirichlet_spectrum(512), HEAT_NOISE, n_grid=(8, 16, 32, 64, 128, 256),
                             m=1024, M=200, gamma=0.1, p=2, seed=101, threads=4)
        table = pathwise_error_sweep(config)
        self.assertAlmostEqual(table.theta_max, 0.4)
        fit = fit_loglog(table.points())
        self.assertGreaterEqual(fit.slope, 0.30)
        self.assertLessEqual(fit.slope, 0.60)

    def test_heat_spatial_rate(self):
        config = SweepConfig(dirichlet_spectrum(256), HEAT_NOISE, n_grid=(8, 16, 32, 64, 128, 256),
                             m=1024, M=100, seed=202, threads=4)
        result = heat_demo(config)
        self.assertGreaterEqual(result.fit.slope, 0.15)
        self.assertLessEqual(result.fit.slope, 0.35)

    def test_almost_sure_rate_stability(self):
        base = dict(spec=dirichlet_spectrum(64), noise=HEAT_NOISE, n_grid=(4, 8, 16, 32, 64), m=256)
        theta = 0.8 * theta_max(0.0, 0.0, 0.0)
        stats = [as_rate_check(SweepConfig(seed=s, **base), theta) for s in range(10)]
        values = [s.statistic for s in stats]
        self.assertLess(max(values) / min(values), 3.0)
        for stat in stats:
            increasing = all(b > a for a, b in zip(stat.scaled, stat.scaled[1:]))
            self.assertFalse(increasing, stat.scaled)
