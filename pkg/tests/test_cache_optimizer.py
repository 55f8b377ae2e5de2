import math

import numpy as np

from .base import BaseTestCase
from src.cachenet.exceptions import OracleSizeError
from src.cachenet.network_logic.cache_optimizer import (
    CachingKind, brute_force_caching_oracle, custom_caching, cutoff_index, enumerate_simplex_grid,
    hit_probability, literal_grid_argmax, miss_probability, optimal_caching, sample_placement,
    uniform_caching, zipf_caching,
)
from src.cachenet.network_logic.oracle_suites import (
    caching_optimality_suite, grid_consistency_suite, heuristic_dominance_suite,
)
from src.cachenet.network_logic.popularity import sample_requests, zipf_pmf


def closed_form_two_files(gamma_r, g_c):
    pop = zipf_pmf(gamma_r, 2)
    z = pop.pmf ** (1.0 / (g_c - 2))
    nu = 1.0 / np.sum(1.0 / z)
    return nu, 1.0 - nu / z


class HitProbabilityTestCase(BaseTestCase):
    def test_uniform_two_files(self):
        for gamma_r in (0.0, 0.3, 0.9):
            self.assertAlmostEqual(hit_probability(zipf_pmf(gamma_r, 2), uniform_caching(2), 3), 0.75, places=12)

    def test_single_file_always_hits(self):
        self.assertEqual(hit_probability(zipf_pmf(0.5, 1), custom_caching([1.0]), 2), 1.0)

    def test_complement_of_miss(self):
        pop = zipf_pmf(0.7, 12)
        cache = optimal_caching(pop, 6)
        expected_miss = float(np.sum(pop.pmf * (1 - cache.pmf) ** 5))
        self.assertAlmostEqual(1 - hit_probability(pop, cache, 6), expected_miss, delta=1e-12)
        self.assertAlmostEqual(miss_probability(pop, cache, 5), expected_miss, delta=1e-12)

    def test_matches_simulated_clusters(self):
        pop = zipf_pmf(0.5, 3)
        cache = optimal_caching(pop, 4)
        rng = self.rng(77)
        clusters = 10 ** 6
        wanted = sample_requests(pop, clusters, rng).requests
        others = sample_placement(cache, 3 * clusters, rng).cached_file.reshape(clusters, 3)
        hits = np.any(others == wanted[:, None], axis=1)
        p = hit_probability(pop, cache, 4)
        self.assertLess(abs(hits.mean() - p), 4 * math.sqrt(p * (1 - p) / clusters))

    def test_rejects_bad_inputs(self):
        with self.assertRaises(ValueError):
            hit_probability(zipf_pmf(0.5, 2), uniform_caching(2), 1)
        with self.assertRaises(ValueError):
            hit_probability(zipf_pmf(0.5, 2), uniform_caching(3), 3)


class CutoffTestCase(BaseTestCase):
    def test_single_file(self):
        self.assertEqual(cutoff_index(zipf_pmf(0.5, 1), 3), (1, 0.0))

    def test_two_files(self):
        m_star, nu = cutoff_index(zipf_pmf(0.5, 2), 4)
        expected_nu, _ = closed_form_two_files(0.5, 4)
        self.assertEqual(m_star, 2)
        self.assertAlmostEqual(nu, expected_nu, places=12)
        self.assertAlmostEqual(nu, 0.3496, places=4)

    def test_tail_files_never_cached(self):
        pop = zipf_pmf(0.8, 20)
        m_star, nu = cutoff_index(pop, 4)
        self.assertLess(m_star, 20)
        z = pop.pmf ** 0.5
        # largest feasible prefix: the next index is infeasible
        k = m_star + 1
        self.assertGreaterEqual((k - 1) / np.sum(1 / z[:k]), z[k - 1])

    def test_rejects_small_clusters(self):
        for g_c in (1, 2):
            with self.assertRaises(ValueError):
                cutoff_index(zipf_pmf(0.5, 4), g_c)


class OptimalCachingTestCase(BaseTestCase):
    def test_single_file(self):
        cache = optimal_caching(zipf_pmf(0.5, 1), 3)
        np.testing.assert_array_equal(cache.pmf, [1.0])

    def test_two_files(self):
        cache = optimal_caching(zipf_pmf(0.5, 2), 4)
        nu, expected = closed_form_two_files(0.5, 4)
        np.testing.assert_allclose(cache.pmf, expected, atol=1e-12)
        np.testing.assert_allclose(cache.pmf, [0.5432, 0.4568], atol=1e-4)
        self.assertIs(cache.kind, CachingKind.OPTIMAL)
        self.assertAlmostEqual(cache.multiplier, nu, places=12)

    def test_water_filling_structure(self):
        rng = self.rng(2023)
        for _ in range(200):
            m = int(rng.integers(1, 300))
            g_c = int(rng.integers(3, 60))
            gamma_r = float(rng.uniform(0.01, 0.99))
            pop = zipf_pmf(gamma_r, m)
            cache = optimal_caching(pop, g_c)

            self.assertAlmostEqual(cache.pmf.sum(), 1.0, delta=1e-12)
            self.assertTrue(np.all(np.diff(cache.pmf) <= 1e-15))
            np.testing.assert_array_equal(np.nonzero(cache.pmf > 0)[0], np.arange(cache.cutoff))
            z = pop.pmf[:cache.cutoff] ** (1.0 / (g_c - 2))
            np.testing.assert_allclose(cache.pmf[:cache.cutoff], 1 - cache.multiplier / z, atol=1e-12)

    def test_beats_every_grid_point(self):
        pop = zipf_pmf(0.6, 5)
        optimal_hit = hit_probability(pop, optimal_caching(pop, 5), 5)
        grid = enumerate_simplex_grid(5, 0.05)
        grid_hits = 1 - np.power(1 - grid, 4) @ pop.pmf
        self.assertGreaterEqual(optimal_hit, grid_hits.max() - 1e-3)

    def test_dominates_heuristics(self):
        for m, g_c, gamma_r in ((10, 3, 0.2), (50, 8, 0.6), (200, 20, 0.9)):
            pop = zipf_pmf(gamma_r, m)
            optimal_hit = hit_probability(pop, optimal_caching(pop, g_c), g_c)
            self.assertGreaterEqual(optimal_hit, hit_probability(pop, zipf_caching(gamma_r, m), g_c))
            self.assertGreaterEqual(optimal_hit, hit_probability(pop, uniform_caching(m), g_c))

    def test_rejects_two_node_clusters(self):
        with self.assertRaises(ValueError):
            optimal_caching(zipf_pmf(0.5, 3), 2)


class CachingOracleTestCase(BaseTestCase):
    def test_single_file(self):
        np.testing.assert_array_equal(brute_force_caching_oracle(zipf_pmf(0.5, 1), 3, 0.01).pmf, [1.0])

    def test_two_files_near_closed_form(self):
        oracle = brute_force_caching_oracle(zipf_pmf(0.5, 2), 4, 0.01)
        np.testing.assert_allclose(oracle.pmf, [0.5432, 0.4568], atol=0.01)

    def test_linear_objective_picks_a_vertex(self):
        oracle = brute_force_caching_oracle(zipf_pmf(0.5, 2), 2, 0.01)
        np.testing.assert_array_equal(oracle.pmf, [1.0, 0.0])

    def test_matches_literal_enumeration(self):
        for m, g_c in ((2, 3), (3, 4), (3, 5)):
            pop = zipf_pmf(0.5, m)
            np.testing.assert_allclose(brute_force_caching_oracle(pop, g_c, 0.02).pmf,
                                       literal_grid_argmax(pop, g_c, 0.02), atol=1e-12)

    def test_guards(self):
        with self.assertRaises(OracleSizeError):
            brute_force_caching_oracle(zipf_pmf(0.5, 7), 3, 0.05)
        with self.assertRaises(ValueError):
            brute_force_caching_oracle(zipf_pmf(0.5, 3), 3, 0.03)

    def test_simplex_grid(self):
        grid = enumerate_simplex_grid(3, 0.05)
        self.assertEqual(len(grid), math.comb(22, 2))
        np.testing.assert_allclose(grid.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_array_equal(grid[0], [1.0, 0.0, 0.0])
        np.testing.assert_array_equal(grid[-1], [0.0, 0.0, 1.0])

    def test_optimality_suite(self):
        result = caching_optimality_suite(0.01)
        self.assertEqual(result.cases, 6 * 3 * 3)
        self.assertLessEqual(result.max_gap, 1e-3)
        self.assertTrue(result.passed)

    def test_other_suites(self):
        self.assertTrue(heuristic_dominance_suite().passed)
        self.assertTrue(grid_consistency_suite().passed)


class SamplePlacementTestCase(BaseTestCase):
    def test_single_file(self):
        placement = sample_placement(custom_caching([1.0]), 20, self.rng())
        self.assertTrue(np.all(placement.cached_file == 1))

    def test_frequency_matches_pmf(self):
        cache = optimal_caching(zipf_pmf(0.5, 2), 4)
        n = 10 ** 6
        placement = sample_placement(cache, n, self.rng(5))
        p = cache.pmf[0]
        self.assertLess(abs(np.mean(placement.cached_file == 1) - p), 4 * math.sqrt(p * (1 - p) / n))

    def test_never_draws_uncached_files(self):
        cache = optimal_caching(zipf_pmf(0.8, 20), 4)
        placement = sample_placement(cache, 10 ** 5, self.rng(6))
        self.assertLessEqual(placement.cached_file.max(), cache.cutoff)

    def test_deterministic_for_a_seed(self):
        cache = zipf_caching(0.4, 9)
        np.testing.assert_array_equal(sample_placement(cache, 500, self.rng(8)).cached_file,
                                      sample_placement(cache, 500, self.rng(8)).cached_file)

    def test_zipf_label(self):
        self.assertEqual(zipf_caching(0.4, 9).label, 'zipf:0.4')
        self.assertEqual(uniform_caching(3).label, 'uniform')
