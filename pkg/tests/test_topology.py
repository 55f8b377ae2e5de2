import math

import numpy as np

from .base import BaseTestCase
from src.cachenet.exceptions import InadmissibleTilingError
from src.cachenet.network_logic.cache_optimizer import sample_placement, uniform_caching
from src.cachenet.network_logic.oracle_suites import SOUNDNESS_GRIDS, edge_links, schedule_soundness_suite
from src.cachenet.network_logic.popularity import sample_requests, zipf_pmf
from src.cachenet.network_logic.simulator import find_potential_links, sample_slot_links
from src.cachenet.network_logic.topology import (
    LinkSet, admissible_cluster_sizes, build_clusters, build_grid, check_feasible, reuse_factor,
    reuse_schedule, transmission_range,
)


class GridTestCase(BaseTestCase):
    def test_seven_by_seven(self):
        grid = build_grid(49)
        self.assertEqual(grid.side_count, 7)
        self.assertAlmostEqual(grid.spacing, 1 / 7, places=12)
        self.assertAlmostEqual(grid.distance(0, 1), 1 / 7, places=12)
        self.assertAlmostEqual(grid.distance(0, 7), 1 / 7, places=12)

    def test_small_grid(self):
        grid = build_grid(4)
        self.assertAlmostEqual(grid.spacing, 0.5)
        self.assertTrue(np.all((grid.positions >= 0) & (grid.positions <= 1)))

    def test_large_grid(self):
        grid = build_grid(10000)
        self.assertEqual(grid.side_count, 100)
        self.assertEqual(len(grid.positions), 10000)

    def test_minimum_distance(self):
        grid = build_grid(36)
        diff = grid.positions[:, None, :] - grid.positions[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(dist, np.inf)
        self.assertAlmostEqual(dist.min(), 1 / 6, delta=1e-12)

    def test_non_square_names_neighbours(self):
        with self.assertRaises(InadmissibleTilingError) as ctx:
            build_grid(50)
        self.assertIn('49', str(ctx.exception))
        self.assertIn('64', str(ctx.exception))


class ClusterTestCase(BaseTestCase):
    def test_hundred_nodes_in_fours(self):
        clusters = build_clusters(build_grid(100), 4, 0.4)
        self.assertEqual(clusters.dim, 5)
        self.assertAlmostEqual(clusters.side, 0.2)
        self.assertEqual(clusters.num_clusters, 25)
        self.assertTrue(np.all(np.bincount(clusters.membership) == 4))
        self.assertEqual(clusters.K, 9)
        self.assertFalse(clusters.K_overridden)

    def test_members_form_a_square_block(self):
        clusters = build_clusters(build_grid(36), 9, 0.4)
        np.testing.assert_array_equal(clusters.members(0), [0, 1, 2, 6, 7, 8, 12, 13, 14])

    def test_range_covers_every_cluster_pair(self):
        clusters = build_clusters(build_grid(144), 16, 0.4)
        grid = clusters.grid
        for cluster in range(clusters.num_clusters):
            members = clusters.members(cluster)
            pts = grid.positions[members]
            diff = pts[:, None, :] - pts[None, :, :]
            self.assertLessEqual(np.hypot(diff[..., 0], diff[..., 1]).max(), clusters.R + 1e-12)

    def test_inadmissible_size(self):
        with self.assertRaises(InadmissibleTilingError) as ctx:
            build_clusters(build_grid(10000), 7, 0.4)
        self.assertIn('4', str(ctx.exception))

    def test_override_is_recorded(self):
        clusters = build_clusters(build_grid(100), 4, 0.4, K_override=4)
        self.assertEqual(clusters.K, 4)
        self.assertTrue(clusters.K_overridden)

    def test_admissible_sizes(self):
        self.assertEqual(admissible_cluster_sizes(100), [1, 4, 25, 100])
        self.assertEqual(admissible_cluster_sizes(10000), [1, 4, 16, 25, 100, 400, 625, 2500, 10000])


class RangeAndReuseTestCase(BaseTestCase):
    def test_transmission_range(self):
        self.assertAlmostEqual(transmission_range(4, 100), 0.28284271247, places=10)
        self.assertAlmostEqual(transmission_range(100, 100), math.sqrt(2), places=12)
        self.assertAlmostEqual(transmission_range(100, 10000), 0.14142135624, places=10)

    def test_reuse_factor(self):
        self.assertEqual(reuse_factor(0.4), 9)
        self.assertEqual(reuse_factor(1.0), 16)
        self.assertEqual(reuse_factor(0.01), 9)
        with self.assertRaises(ValueError):
            reuse_factor(0.0)


class ReuseScheduleTestCase(BaseTestCase):
    def test_one_cluster_per_color(self):
        clusters = build_clusters(build_grid(9), 1, 0.4)
        schedule = reuse_schedule(clusters)
        self.assertEqual(len(schedule), 9)
        self.assertTrue(all(len(c) == 1 for c in schedule))

    def test_four_clusters_per_color(self):
        clusters = build_clusters(build_grid(36), 1, 0.4)
        schedule = reuse_schedule(clusters)
        self.assertEqual([len(c) for c in schedule], [4] * 9)
        self.assertEqual(schedule[0], [0, 3, 18, 21])

    def test_partition(self):
        clusters = build_clusters(build_grid(10000), 100, 0.4, K_override=4)
        schedule = reuse_schedule(clusters)
        self.assertEqual(len(schedule), 4)
        self.assertEqual(sorted(c for color in schedule for c in color), list(range(100)))

    def test_non_square_K(self):
        clusters = build_clusters(build_grid(36), 4, 0.4, K_override=5)
        with self.assertRaises(ValueError):
            reuse_schedule(clusters)


class FeasibilityTestCase(BaseTestCase):
    def test_single_link_in_range(self):
        grid = build_grid(100)
        self.assertTrue(check_feasible(LinkSet.of([(0, 1)]), grid, 0.2, 0.4))

    def test_link_out_of_range(self):
        grid = build_grid(100)
        self.assertFalse(check_feasible(LinkSet.of([(0, 9)]), grid, 0.2, 0.4))

    def test_interfering_transmitter(self):
        grid = build_grid(100)
        # receiver 1 is 0.1 away from the second transmitter, well inside (1 + Delta) R
        self.assertFalse(check_feasible(LinkSet.of([(0, 1), (2, 3)]), grid, 0.2, 0.4))

    def test_empty_set(self):
        self.assertTrue(check_feasible(LinkSet.of([]), build_grid(4), 0.1, 0.4))

    def test_link_set_rules(self):
        with self.assertRaises(ValueError):
            LinkSet.of([(1, 1)])
        with self.assertRaises(ValueError):
            LinkSet.of([(1, 2), (1, 3)])
        self.assertEqual(len(LinkSet.of([(1, 2), (3, 4)]).without((1, 2))), 1)

    def test_every_slot_stays_feasible_after_removing_a_link(self):
        rng = self.rng(21)
        pop = zipf_pmf(0.5, 3)
        cache = uniform_caching(3)
        for n, g_c in SOUNDNESS_GRIDS:
            for delta in (0.2, 0.4, 1.0):
                clusters = build_clusters(build_grid(n), g_c, delta)
                links = find_potential_links(sample_placement(cache, n, rng), sample_requests(pop, n, rng), clusters)
                for slot in range(clusters.K):
                    active = sample_slot_links(links, slot, rng)
                    case = (n, g_c, delta, slot)
                    self.assertGreater(len(active), 1, case)
                    self.assertTrue(check_feasible(active, clusters.grid, clusters.R, delta), case)
                    for link in active.links:
                        self.assertTrue(check_feasible(active.without(link), clusters.grid, clusters.R, delta), case)

    def test_formula_reuse_is_sound_and_shrunk_reuse_is_not(self):
        result = schedule_soundness_suite(schedules=100, seed=11)
        self.assertEqual(result.max_gap, 0.0)
        self.assertTrue(result.passed)

    def test_edge_to_edge_links_with_formula_reuse(self):
        clusters = build_clusters(build_grid(576), 4, 1.0)
        for color in reuse_schedule(clusters):
            self.assertTrue(check_feasible(edge_links(clusters, color), clusters.grid, clusters.R, 1.0))

    def test_shrunk_reuse_violates(self):
        clusters = build_clusters(build_grid(576), 4, 1.0, K_override=9)
        links = edge_links(clusters, reuse_schedule(clusters)[0])
        self.assertFalse(check_feasible(links, clusters.grid, clusters.R, 1.0))
