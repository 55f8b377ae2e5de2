"""
Brute-force verification suites run by the `oracle` command.

Each suite returns one OracleResult: how many cases it checked, the worst
gap it saw (units given per suite) and whether every case passed.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..utils.sim_logger import get_sim_logger, sim_operation_logger
from .cache_optimizer import (
    brute_force_caching_oracle, hit_probability, literal_grid_argmax, optimal_caching,
    sample_placement, uniform_caching, zipf_caching,
)
from .popularity import sample_requests, zipf_pmf
from .sim_config import SimConfig
from .simulator import Z_95, enumerate_small_network, estimate_tradeoff_point, find_potential_links, sample_slot_links
from .topology import LinkSet, build_clusters, build_grid, check_feasible, reuse_schedule

logger = logging.getLogger(__name__)

OPTIMALITY_FILES = (1, 2, 3, 4, 5, 6)
OPTIMALITY_CLUSTER_SIZES = (3, 4, 5)
OPTIMALITY_EXPONENTS = (0.2, 0.5, 0.9)
HIT_TOLERANCE = 1e-3


@dataclass(frozen=True)
class OracleResult:
    suite: str
    cases: int
    max_gap: float
    passed: bool

    def as_row(self) -> dict:
        return {'suite': self.suite, 'cases': self.cases, 'max_gap': self.max_gap, 'passed': self.passed}


def caching_optimality_suite(resolution: float = 0.01) -> OracleResult:
    """Closed-form caching against the grid argmax; gap = worst hit-probability shortfall.

    A case also fails when the two PMFs differ by more than one grid step in any coordinate.
    """
    worst_gap = 0.0
    passed = True
    cases = 0
    for m, g_c, gamma_r in itertools.product(OPTIMALITY_FILES, OPTIMALITY_CLUSTER_SIZES, OPTIMALITY_EXPONENTS):
        pop = zipf_pmf(gamma_r, m)
        optimal = optimal_caching(pop, g_c)
        oracle = brute_force_caching_oracle(pop, g_c, resolution)

        gap = hit_probability(pop, oracle, g_c) - hit_probability(pop, optimal, g_c)
        coordinate_gap = float(np.max(np.abs(oracle.pmf - optimal.pmf)))
        worst_gap = max(worst_gap, gap)
        if gap > HIT_TOLERANCE or coordinate_gap > resolution + 1e-9:
            logger.warning(f"Optimality case m={m}, g_c={g_c}, gamma_r={gamma_r} failed: "
                           f"hit gap {gap:.3g}, coordinate gap {coordinate_gap:.3g}")
            passed = False
        cases += 1
    return OracleResult('caching_optimality', cases, worst_gap, passed)


def heuristic_dominance_suite() -> OracleResult:
    """Optimal caching against Zipf (gamma_c = gamma_r) and uniform caching; gap = worst heuristic excess."""
    worst_gap = -np.inf
    cases = 0
    for m, g_c, gamma_r in itertools.product((2, 5, 20, 100), OPTIMALITY_CLUSTER_SIZES + (10, 50),
                                             OPTIMALITY_EXPONENTS):
        pop = zipf_pmf(gamma_r, m)
        optimal_hit = hit_probability(pop, optimal_caching(pop, g_c), g_c)
        for heuristic in (zipf_caching(gamma_r, m), uniform_caching(m)):
            worst_gap = max(worst_gap, hit_probability(pop, heuristic, g_c) - optimal_hit)
            cases += 1
    return OracleResult('heuristic_dominance', cases, float(worst_gap), worst_gap <= 1e-12)


def grid_consistency_suite(resolution: float = 0.02) -> OracleResult:
    """Dynamic-program oracle against literal enumeration of the grid; gap = worst coordinate difference."""
    worst_gap = 0.0
    cases = 0
    for m, g_c, gamma_r in itertools.product((1, 2, 3), (2, 3, 4, 5), OPTIMALITY_EXPONENTS):
        pop = zipf_pmf(gamma_r, m)
        program = brute_force_caching_oracle(pop, g_c, resolution).pmf
        literal = literal_grid_argmax(pop, g_c, resolution)
        worst_gap = max(worst_gap, float(np.max(np.abs(program - literal))))
        cases += 1
    return OracleResult('grid_consistency', cases, worst_gap, worst_gap <= 1e-12)


def enumeration_suite(trials: int = 20000, seed: int = 2024) -> OracleResult:
    """Monte Carlo against exact enumeration for n=4, m=2, g_c=4; gap in standard errors (limit 4)."""
    config = SimConfig(n=4, m=2, gamma_r=0.5, g_c=4, seed=seed, trials=trials)
    exact = enumerate_small_network(config)
    estimate = estimate_tradeoff_point(config)

    gaps = []
    for observed, expected, half_width in ((estimate.p_hat, exact.p_o, estimate.p_ci),
                                           (estimate.t_min_hat, exact.t_mean, estimate.t_ci)):
        standard_error = half_width / Z_95
        gaps.append(abs(observed - expected) / standard_error if standard_error > 0 else
                    (0.0 if observed == expected else np.inf))
    worst = float(max(gaps))
    return OracleResult('small_network_enumeration', 2, worst, worst <= 4.0)


# (n, g_c) grids with at least 10 clusters per axis, enough for several per color at K = 25
SOUNDNESS_GRIDS = ((576, 4), (900, 9), (1600, 16))


def _soundness_clusters(delta: float, n: int = 576, g_c: int = 4, K_override=None):
    return build_clusters(build_grid(n), g_c, delta, K_override)


def schedule_soundness_suite(schedules: int = 100, seed: int = 7) -> OracleResult:
    """Random one-link-per-good-cluster slots under formula K; gap = fraction infeasible.

    Schedules rotate through SOUNDNESS_GRIDS with Delta drawn per schedule.

    Also runs the mutation check: with Delta = 1 and K shrunk from 16 to 9,
    edge-to-edge links in one color class must violate the protocol model.
    """
    rng = np.random.default_rng(seed)
    pop = zipf_pmf(0.5, 3)
    cache = uniform_caching(3)
    infeasible = 0

    for i in range(schedules):
        delta = float(rng.uniform(0.05, 1.8))
        n, g_c = SOUNDNESS_GRIDS[i % len(SOUNDNESS_GRIDS)]
        clusters = _soundness_clusters(delta, n, g_c)
        links = find_potential_links(sample_placement(cache, clusters.n, rng),
                                     sample_requests(pop, clusters.n, rng), clusters)
        slot = int(rng.integers(clusters.K))
        active = sample_slot_links(links, slot, rng)
        if not check_feasible(active, clusters.grid, clusters.R, clusters.Delta):
            infeasible += 1

    mutation_caught = not check_feasible(*_shrunk_reuse_slot())
    gap = infeasible / schedules
    return OracleResult('schedule_soundness', schedules + 1, gap, infeasible == 0 and mutation_caught)


def edge_links(clusters, cluster_ids: Sequence[int]) -> LinkSet:
    """Left-edge transmitter to right-edge receiver along the top row of each cluster"""
    pairs = []
    for cluster in cluster_ids:
        members = clusters.members(cluster)
        block = int(round(np.sqrt(clusters.g_c)))
        top_row = members[:block]
        pairs.append((int(top_row[0]), int(top_row[-1])))
    return LinkSet.of(pairs)


def _shrunk_reuse_slot():
    delta = 1.0
    # formula K for Delta = 1 is 16
    shrunk = _soundness_clusters(delta, K_override=9)
    links = edge_links(shrunk, reuse_schedule(shrunk)[0])
    return links, shrunk.grid, shrunk.R, delta


@sim_operation_logger('oracle_suites')
def run_oracle_suites(resolution: float = 0.01, trials: int = 20000, seed: int = 2024) -> List[OracleResult]:
    results = [
        caching_optimality_suite(resolution),
        heuristic_dominance_suite(),
        grid_consistency_suite(),
        enumeration_suite(trials, seed),
        schedule_soundness_suite(seed=seed),
    ]
    sim_logger = get_sim_logger()
    for result in results:
        sim_logger.log_event('oracle_suite_result', result.as_row(),
                             level='info' if result.passed else 'warning')
    return results
