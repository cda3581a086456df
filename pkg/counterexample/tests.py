import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, tag

from rate_lab.utils import read_fit_points
from splitflow.exceptions import ConstraintViolation
from .constants import COLUMNS, REFINE_BITS
from .domain import DyadicProfile, SparseVec
from .services import (
    build_s_grid,
    divergence_passes,
    divergence_threshold,
    eval_profile,
    exact_integral_moment,
    expected_lp_pow,
    field_lp_pow,
    field_operator,
    gaussian_abs_moment,
    lower_bound,
    lq_lp_norm,
    mc_divergence_estimate,
    simulate_discretized_field,
    subwindow_exact,
)
from .utils import write_divergence_table

E1 = math.sqrt(2 / math.pi)


def brute_profile(t, profile):
    out = {}
    for k in range(1, profile.k_max + 1):
        for j in range(2 ** (k - 1)):
            c = (2 * j + 1) * 2.0 ** (-k)
            if c < t <= c + 2.0 ** (-profile.u * k):
                out[2 ** (k - 1) + j] = profile.scale(k)
    return out


class DyadicProfileTests(SimpleTestCase):
    def test_constraints_named(self):
        cases = [
            (dict(p=2.0), "1≤p<2"),
            (dict(p=1.0, u=1.5), "u>2/p"),
            (dict(p=1.0, r=0.5), "r<1-p/2"),
        ]
        for kwargs, constraint in cases:
            with self.assertRaises(ConstraintViolation) as ctx:
                DyadicProfile(**kwargs)
            self.assertEqual(ctx.exception.constraint, constraint)

    def test_level_one_window(self):
        prof = DyadicProfile()
        v = eval_profile(0.501, prof)
        self.assertEqual(v.indices, (1,))
        self.assertAlmostEqual(v.values[0], 2 ** -0.25)

    def test_window_is_left_open_right_closed(self):
        prof = DyadicProfile()
        self.assertEqual(len(eval_profile(0.5, prof)), 0)
        self.assertEqual(eval_profile(0.625, prof).indices, (1,))

    def test_level_three_window(self):
        v = eval_profile(0.626, DyadicProfile())
        self.assertEqual(v.indices, (6,))
        self.assertAlmostEqual(v.values[0], 2 ** -0.75)

    def test_outside_unit_interval(self):
        prof = DyadicProfile()
        for t in (-0.3, 0.0, 1.0, 1.2):
            self.assertEqual(len(eval_profile(t, prof)), 0)

    def test_matches_brute_force(self):
        prof = DyadicProfile(u=2.5, r=0.1, k_max=6)
        rng = np.random.default_rng(11)
        centers = [(2 * j + 1) * 2.0 ** -k for k in range(1, 7) for j in range(2 ** (k - 1))]
        ts = list(rng.uniform(0, 1, 200)) + [c + 1e-5 for c in centers]
        for t in ts:
            self.assertEqual(eval_profile(t, prof).as_dict(), brute_profile(t, prof))


class MomentTests(SimpleTestCase):
    def test_gaussian_abs_moment(self):
        self.assertAlmostEqual(gaussian_abs_moment(2), 1.0, places=12)
        self.assertAlmostEqual(gaussian_abs_moment(1), E1, places=12)
        self.assertAlmostEqual(gaussian_abs_moment(4), 3.0, places=12)

    def test_single_level(self):
        res = exact_integral_moment(DyadicProfile(k_max=1))
        self.assertAlmostEqual(res.value, 0.2372, places=4)

    def test_tail_bound_controls_truncation(self):
        short = exact_integral_moment(DyadicProfile(k_max=20))
        long = exact_integral_moment(DyadicProfile(k_max=40))
        self.assertGreaterEqual(long.value, short.value)
        self.assertLessEqual(long.value - short.value, short.tail_bound * (1 + 1e-9))

    def test_matches_sampled_integral(self):
        prof = DyadicProfile(k_max=3)
        rng = np.random.default_rng(5)
        total = np.zeros(100_000)
        for k in range(1, 4):
            sd = prof.scale(k) * math.sqrt(prof.window(k))
            total += np.abs(rng.normal(0, sd, (100_000, 2 ** (k - 1)))).sum(axis=1)
        se = total.std(ddof=1) / math.sqrt(total.size)
        self.assertLess(abs(total.mean() - exact_integral_moment(prof).value), 5 * se)


class SGridTests(SimpleTestCase):
    def test_grid_shape(self):
        prof = DyadicProfile(k_max=7)
        grid = build_s_grid(3, 128, prof)
        self.assertTrue(np.all(np.diff(grid.points) > 0))
        self.assertEqual(grid.points[0], -1.0)
        self.assertEqual(grid.points[-1], 1.0)
        self.assertAlmostEqual(grid.weights.sum(), 2.0, places=12)

    def test_breakpoints_present(self):
        prof = DyadicProfile(k_max=7)
        grid = build_s_grid(3, 128, prof)
        grid.index_of(2.0 ** (-3 * 3 - REFINE_BITS))
        grid.index_of(0.375 + 2.0 ** -3)
        grid.index_of(-0.625 + 2.0 ** -6)
        grid.index_of(-1.0 + 2.0 ** -3)
        with self.assertRaises(ValueError):
            grid.index_of(0.123456789)


class FieldTests(SimpleTestCase):
    def test_zero_increments(self):
        prof = DyadicProfile(k_max=6)
        points = np.linspace(-1, 1, 41)
        field = simulate_discretized_field(np.zeros(8), points, prof)
        self.assertTrue(all(len(v) == 0 for v in field))
        op = field_operator(8, points, prof)
        self.assertTrue(np.all(field_lp_pow(op, np.zeros(8)) == 0))

    def test_single_increment_is_shifted_profile(self):
        prof = DyadicProfile(k_max=6)
        grid = build_s_grid(3, 64, prof)
        dw = np.zeros(8)
        dw[3] = 0.7
        field = simulate_discretized_field(dw, grid.points, prof)
        hits = 0
        for s, vec in zip(grid.points, field):
            expected = {c: 0.7 * v for c, v in eval_profile(s + 4 / 8, prof).as_dict().items()}
            got = vec.as_dict()
            self.assertEqual(set(got), set(expected))
            for c in got:
                self.assertAlmostEqual(got[c], expected[c], places=14)
            hits += bool(got)
        self.assertGreater(hits, 0)

    def test_first_increment_sits_one_step_in(self):
        prof = DyadicProfile(k_max=6)
        dw = np.zeros(8)
        dw[0] = 1.0
        (vec,) = simulate_discretized_field(dw, [0.376], prof)
        self.assertEqual(vec.indices, (1,))
        self.assertAlmostEqual(vec.values[0], 2 ** -0.25, places=14)
        (edge,) = simulate_discretized_field(dw, [-1 / 8], prof)
        self.assertEqual(len(edge), 0)

    def test_lp_pow_matches_sparse_vectors(self):
        prof = DyadicProfile(k_max=7)
        grid = build_s_grid(3, 64, prof)
        dw = np.random.default_rng(2).normal(0, 8 ** -0.5, 8)
        field = simulate_discretized_field(dw, grid.points, prof)
        op = field_operator(8, grid.points, prof)
        np.testing.assert_allclose(
            field_lp_pow(op, dw), [v.norm(1.0) for v in field], rtol=1e-12, atol=1e-15)

    def test_expected_lp_pow_matches_sampling(self):
        prof = DyadicProfile(k_max=8)
        grid = build_s_grid(4, 64, prof)
        op = field_operator(16, grid.points, prof)
        dw = np.random.default_rng(9).normal(0, 0.25, (16, 4000))
        samples = field_lp_pow(op, dw)
        mean = samples.mean(axis=1)
        se = samples.std(axis=1, ddof=1) / math.sqrt(4000)
        exact = expected_lp_pow(op)
        mask = exact > 0
        self.assertTrue(mask.any())
        self.assertTrue(np.all(np.abs(mean - exact)[mask] <= 5 * se[mask] + 1e-12))
        self.assertTrue(np.all(mean[~mask] == 0))

    def test_subwindow_exact_matches_field_moment(self):
        q = 16.0
        for n in (2, 3, 4, 5):
            prof = DyadicProfile(k_max=n + 4)
            grid = build_s_grid(n, 64, prof)
            op = field_operator(2 ** n, grid.points, prof)
            star = grid.index_of(2.0 ** (-3 * n - REFINE_BITS))
            value = 2.0 ** (-3 * n) * expected_lp_pow(op)[star] ** q
            if n <= 3:
                self.assertAlmostEqual(value / subwindow_exact(n, prof, q), 1.0, places=10)
            else:
                self.assertGreaterEqual(value, subwindow_exact(n, prof, q))


class LqLpNormTests(SimpleTestCase):
    def test_zero_field(self):
        self.assertEqual(lq_lp_norm([SparseVec()] * 5, np.full(5, 0.5), 1.0, 4.0), 0.0)

    def test_indicator_field(self):
        points = np.linspace(-1, 1, 2001)
        weights = np.full(points.size, 0.001)
        weights[[0, -1]] = 0.0005
        field = [SparseVec((1,), (2.5,)) if 0 < s < 1 else SparseVec() for s in points]
        self.assertAlmostEqual(lq_lp_norm(field, weights, 1.0, 16.0), 2.5, delta=1e-3)

    def test_accepts_precomputed_norms(self):
        self.assertAlmostEqual(lq_lp_norm(np.array([1.0, 2.0]), np.array([1.0, 1.0]), 1.0, 2.0), math.sqrt(5))

    def test_empty_field(self):
        with self.assertRaises(ValueError):
            lq_lp_norm([], [], 1.0, 2.0)


class BoundTests(SimpleTestCase):
    def test_threshold_examples(self):
        self.assertAlmostEqual(divergence_threshold(1, 3, 0.25), 12.0)
        self.assertAlmostEqual(divergence_threshold(1, 2.5, 0.1), 6.25)

    def test_threshold_infeasible(self):
        with self.assertRaises(ConstraintViolation) as ctx:
            divergence_threshold(1, 3, 0.5)
        self.assertEqual(ctx.exception.constraint, "r<1-p/2")

    def test_lower_bound_example(self):
        self.assertAlmostEqual(lower_bound(4, 1, 3, 0.25, 16), 0.21584, delta=1e-5)
        self.assertAlmostEqual(lower_bound(4, 1, 3, 0.25, 16), 8 * E1 ** 16, places=12)

    def test_lower_bound_flat_at_threshold(self):
        for n in range(1, 9):
            self.assertAlmostEqual(lower_bound(n, 1, 3, 0.25, 12) / (0.5 * E1 ** 12), 1.0, places=12)

    def test_lower_bound_geometric_in_n(self):
        ratio = 2.0 ** (-3 + 0.25 * 16)
        for n in range(1, 8):
            self.assertAlmostEqual(
                lower_bound(n + 1, 1, 3, 0.25, 16) / lower_bound(n, 1, 3, 0.25, 16), ratio, places=12)

    def test_subwindow_dominates_lower_bound(self):
        for n in range(4, 9):
            prof = DyadicProfile(k_max=n + 4)
            self.assertGreaterEqual(subwindow_exact(n, prof, 16), lower_bound(n, 1, 3, 0.25, 16))


class DivergenceEstimateTests(SimpleTestCase):
    def run_small(self, **kwargs):
        params = dict(p=1.0, u=3.0, r=0.25, q=16.0, n_list=[3, 2], M=20, resolution=256, seed=3)
        params.update(kwargs)
        return mc_divergence_estimate(**params)

    def test_table_shape(self):
        table = self.run_small()
        self.assertEqual([row.n for row in table.rows], [2, 3])
        self.assertAlmostEqual(table.threshold, 12.0)
        self.assertEqual(table.rows[0].exact_moment, table.rows[1].exact_moment)
        for row in table.rows:
            self.assertLessEqual(row.ci_low, row.mc_estimate)
            self.assertLessEqual(row.mc_estimate, row.ci_high)
            self.assertAlmostEqual(row.lower_bound, lower_bound(row.n, 1.0, 3.0, 0.25, 16.0))

    def test_deterministic_across_threads(self):
        self.assertEqual(self.run_small().rows, self.run_small(threads=3).rows)

    def test_requires_two_paths(self):
        with self.assertRaises(ConstraintViolation):
            self.run_small(M=1)

    def test_infeasible_profile(self):
        with self.assertRaises(ConstraintViolation) as ctx:
            self.run_small(r=0.6)
        self.assertEqual(ctx.exception.constraint, "r<1-p/2")

    def test_csv_columns(self):
        table = self.run_small()
        with tempfile.TemporaryDirectory() as tmp:
            path = write_divergence_table(table, Path(tmp) / "counterexample.csv")
            lines = path.read_text(encoding="utf-8").splitlines()
            self.assertEqual(lines[0], "# splitflow-v1")
            self.assertEqual(lines[1], ",".join(COLUMNS))
            points = read_fit_points(path)
        self.assertEqual([n for n, _ in points], [2.0, 3.0])

    @tag("slow")
    def test_resolution_converged(self):
        coarse = self.run_small(n_list=[4, 5], M=100, resolution=4096)
        fine = self.run_small(n_list=[4, 5], M=100, resolution=8192)
        for a, b in zip(coarse.rows, fine.rows):
            self.assertLess(abs(a.mc_estimate - b.mc_estimate) / b.mc_estimate, 0.01)

    @tag("slow")
    def test_divergence_above_threshold(self):
        table = mc_divergence_estimate(
            p=1.0, u=3.0, r=0.25, q=16.0, n_list=range(4, 9), M=400, resolution=4096, seed=20240601)
        self.assertTrue(divergence_passes(table))
        bounds = [row.lower_bound for row in table.rows]
        self.assertTrue(all(b > a for a, b in zip(bounds, bounds[1:])))
