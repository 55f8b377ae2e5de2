"""
Monte Carlo engine for the clustering scheme with random caching.

Per trial: draw a cache placement and a request vector, find the potential
links inside each cluster, and give every served user its long-run
round-robin share C / (K s), s being the number of served users in its
cluster. Trials are keyed by (master seed, trial index), so results do not
depend on how trials are spread over workers.
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional, Sequence

import numpy as np

from ..utils.sampling import trial_stream
from ..utils.sim_logger import get_sim_logger, performance_monitor, sim_operation_logger
from .cache_optimizer import (
    CachePlacement, CachingDistribution, CachingKind, miss_probability,
    optimal_caching, sample_placement, uniform_caching, zipf_caching,
)
from .popularity import PopularityModel, RequestVector, sample_requests, zipf_pmf
from .sim_config import SimConfig, parse_caching
from .theory import CurvePoint, SourceTag, TradeoffCurve
from .topology import ClusterGrid, LinkSet, build_clusters, build_grid, reuse_schedule

logger = logging.getLogger(__name__)

# 95% two-sided normal quantile
Z_95 = 1.959963984540054

ENUMERATION_LIMIT = 2 ** 20


@dataclass(frozen=True, eq=False)
class PotentialLinks:
    """Serving candidates for every user of one trial.

    candidate_count[u] counts the in-cluster nodes caching u's request (u itself
    only when self hits are allowed); server[u] is the lowest-index such node,
    preferring nodes other than u, or -1 when u is unserved.
    """
    placement: CachePlacement
    requests: RequestVector
    clusters: ClusterGrid
    allow_self_hit: bool
    candidate_count: np.ndarray
    server: np.ndarray
    served: np.ndarray
    good_clusters: np.ndarray

    def candidates(self, u: int) -> List[int]:
        same_cluster = self.clusters.membership == self.clusters.membership[u]
        holds = self.placement.cached_file == self.requests.requests[u]
        found = np.nonzero(same_cluster & holds)[0]
        if not self.allow_self_hit:
            found = found[found != u]
        return found.tolist()


@dataclass(frozen=True, eq=False)
class TrialOutcome:
    served: np.ndarray
    share: np.ndarray
    good_clusters: int
    served_per_cluster: np.ndarray


@dataclass
class TradeoffEstimate:
    """Aggregated outage and min per-user throughput of one configuration"""
    config: SimConfig
    p_hat: float
    p_ci: float
    t_min_hat: float
    t_ci: float
    t_min_diag: float
    trials: int
    g_c: int
    K: int
    K_overridden: bool
    caching_label: str
    analytic_outage: float
    status: str = 'ok'


@dataclass
class SkippedPoint:
    config: SimConfig
    reason: str

    @property
    def status(self) -> str:
        return f'skipped:{self.reason}'


@dataclass
class ClusterSweep:
    """Estimates ordered by p_hat, plus the cluster sizes that could not run"""
    estimates: List[TradeoffEstimate] = field(default_factory=list)
    skipped: List[SkippedPoint] = field(default_factory=list)

    @property
    def curve(self) -> TradeoffCurve:
        return TradeoffCurve([
            CurvePoint(p=e.p_hat, t=e.t_min_hat, case_tag=f'g_c={e.g_c}',
                       source_tag=SourceTag.SIMULATED.value)
            for e in self.estimates
        ])


@dataclass(frozen=True, eq=False)
class ExactExpectation:
    """Exact per-user expectations from full enumeration"""
    mean_share: np.ndarray
    outage: np.ndarray

    @property
    def p_o(self) -> float:
        return float(self.outage.mean())

    @property
    def t_mean(self) -> float:
        return float(self.mean_share.mean())


def caching_for(config: SimConfig, pop: PopularityModel) -> CachingDistribution:
    """Caching distribution named by the config, for its cluster size"""
    kind, gamma_c = parse_caching(config.caching)
    if kind == 'uniform':
        return uniform_caching(pop.m)
    if kind == 'zipf':
        return zipf_caching(gamma_c, pop.m)
    if pop.m == 1:
        return CachingDistribution(pmf=np.ones(1), kind=CachingKind.OPTIMAL, cutoff=1)
    return optimal_caching(pop, config.g_c)


def find_potential_links(placement: CachePlacement, requests: RequestVector,
                         clusters: ClusterGrid, allow_self_hit: bool = False) -> PotentialLinks:
    """Per-user in-cluster serving candidates, served flags and good clusters."""
    cached = placement.cached_file
    wanted = requests.requests
    n = clusters.n
    if len(cached) != n or len(wanted) != n:
        raise ValueError(f"placement ({len(cached)}) and requests ({len(wanted)}) must cover n={n} nodes")

    stride = int(max(cached.max(), wanted.max())) + 1
    cache_keys = clusters.membership.astype(np.int64) * stride + cached
    request_keys = clusters.membership.astype(np.int64) * stride + wanted

    # stable sort keeps equal keys in node order
    order = np.argsort(cache_keys, kind='stable')
    sorted_keys = cache_keys[order]
    left = np.searchsorted(sorted_keys, request_keys, side='left')
    right = np.searchsorted(sorted_keys, request_keys, side='right')
    count = right - left

    users = np.arange(n)
    own_hit = cached == wanted
    first = order[np.minimum(left, n - 1)]
    second = order[np.minimum(left + 1, n - 1)]

    server = np.where((first == users) & (count >= 2), second, first)
    if not allow_self_hit:
        count = count - own_hit
    server = np.where(count > 0, server, -1)
    served = count > 0

    good = np.bincount(clusters.membership[served], minlength=clusters.num_clusters) > 0

    return PotentialLinks(
        placement=placement,
        requests=requests,
        clusters=clusters,
        allow_self_hit=allow_self_hit,
        candidate_count=count,
        server=server,
        served=served,
        good_clusters=good,
    )


def _outcome_from_links(links: PotentialLinks, link_rate: float) -> TrialOutcome:
    clusters = links.clusters
    per_cluster = np.bincount(clusters.membership[links.served], minlength=clusters.num_clusters)
    s = per_cluster[clusters.membership]
    share = np.zeros(clusters.n)
    share[links.served] = link_rate / (clusters.K * s[links.served])
    return TrialOutcome(
        served=links.served,
        share=share,
        good_clusters=int(np.count_nonzero(per_cluster)),
        served_per_cluster=per_cluster,
    )


def run_trial(config: SimConfig, placement: CachePlacement, requests: RequestVector,
              clusters: ClusterGrid) -> TrialOutcome:
    """One trial: each served user gets C / (K s) where s counts served users in its cluster."""
    links = find_potential_links(placement, requests, clusters, config.allow_self_hit)
    return _outcome_from_links(links, config.link_rate)


def analytic_outage(pop: PopularityModel, cache: CachingDistribution, g_c: int,
                    allow_self_hit: bool = False) -> float:
    """Per-user outage under i.i.d. placement: sum_f P_r(f) (1 - P_c(f))^(g_c - 1).

    With self hits the user's own cache counts too and the exponent becomes g_c.
    """
    if allow_self_hit:
        if g_c < 1:
            raise ValueError(f"analytic outage needs g_c >= 1, got {g_c}")
        return miss_probability(pop, cache, g_c)
    if g_c < 2:
        raise ValueError(f"analytic outage needs g_c >= 2 without self hits, got {g_c}")
    return miss_probability(pop, cache, g_c - 1)


@dataclass(frozen=True, eq=False)
class _TrialContext:
    config: SimConfig
    pop: PopularityModel
    cache: CachingDistribution
    clusters: ClusterGrid


@dataclass(frozen=True, eq=False)
class _ChunkResult:
    outage_fractions: np.ndarray
    mean_shares: np.ndarray
    share_totals: np.ndarray


def _run_chunk(context: _TrialContext, trial_indices: Sequence[int]) -> _ChunkResult:
    n = context.clusters.n
    outage = np.empty(len(trial_indices))
    mean_share = np.empty(len(trial_indices))
    totals = np.zeros(n)

    for i, trial in enumerate(trial_indices):
        rng = trial_stream(context.config.seed, trial)
        placement = sample_placement(context.cache, n, rng)
        requests = sample_requests(context.pop, n, rng)
        outcome = run_trial(context.config, placement, requests, context.clusters)
        outage[i] = 1.0 - np.count_nonzero(outcome.served) / n
        mean_share[i] = outcome.share.mean()
        totals += outcome.share

    return _ChunkResult(outage_fractions=outage, mean_shares=mean_share, share_totals=totals)


def _half_width(samples: np.ndarray) -> float:
    if len(samples) < 2:
        return 0.0
    return float(Z_95 * np.std(samples, ddof=1) / math.sqrt(len(samples)))


def _trial_chunks(trials: int, chunk_size: int) -> List[range]:
    return [range(start, min(start + chunk_size, trials)) for start in range(0, trials, chunk_size)]


def _build_context(config: SimConfig) -> _TrialContext:
    errors = config.validate()
    if errors:
        raise ValueError('; '.join(errors))

    pop = zipf_pmf(config.gamma_r, config.m)
    cache = caching_for(config, pop)
    clusters = build_clusters(build_grid(config.n), config.g_c, config.delta, config.k_override)
    return _TrialContext(config=config, pop=pop, cache=cache, clusters=clusters)


@performance_monitor('estimate_tradeoff_point')
def estimate_tradeoff_point(config: SimConfig) -> TradeoffEstimate:
    """Run config.trials independent trials and aggregate outage and throughput.

    t_min_hat pools the per-user mean share over all users: users are
    exchangeable under exact tiling and i.i.d. draws, so the minimum over users
    of the long-run average equals the common mean. The plain minimum over
    per-user sample means is reported as t_min_diag; it is biased low.
    """
    context = _build_context(config)
    chunks = _trial_chunks(config.trials, config.chunk_size)
    run = partial(_run_chunk, context)

    if config.workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            results = list(executor.map(run, chunks))
    else:
        results = [run(chunk) for chunk in chunks]

    # ordered reduction over a worker-independent chunk partition
    outage = np.concatenate([r.outage_fractions for r in results])
    mean_share = np.concatenate([r.mean_shares for r in results])
    totals = np.zeros(config.n)
    for r in results:
        totals += r.share_totals

    estimate = TradeoffEstimate(
        config=config,
        p_hat=float(outage.mean()),
        p_ci=_half_width(outage),
        t_min_hat=float(mean_share.mean()),
        t_ci=_half_width(mean_share),
        t_min_diag=float(totals.min() / config.trials),
        trials=config.trials,
        g_c=config.g_c,
        K=context.clusters.K,
        K_overridden=context.clusters.K_overridden,
        caching_label=context.cache.label,
        analytic_outage=analytic_outage(context.pop, context.cache, config.g_c, config.allow_self_hit),
    )

    get_sim_logger().log_event('point_estimated', {
        'g_c': config.g_c,
        'trials': config.trials,
        'p_hat': estimate.p_hat,
        't_min_hat': estimate.t_min_hat,
        'K': estimate.K,
        'K_overridden': estimate.K_overridden,
    })
    return estimate


@sim_operation_logger('cluster_sweep')
def sweep_cluster_sizes(base: SimConfig, g_c_list: Sequence[int]) -> ClusterSweep:
    """Estimate one point per cluster size; inadmissible sizes become skipped rows."""
    shared = base.shared_errors()
    if shared:
        raise ValueError('; '.join(shared))

    sweep = ClusterSweep()
    sim_logger = get_sim_logger()

    for g_c in g_c_list:
        config = base.with_cluster_size(int(g_c))
        errors = config.cluster_size_errors()
        if errors:
            reason = '; '.join(errors)
            sweep.skipped.append(SkippedPoint(config=config, reason=reason))
            sim_logger.log_event('sweep_point_skipped', {'g_c': g_c, 'reason': reason}, level='warning')
            continue
        sweep.estimates.append(estimate_tradeoff_point(config))

    sweep.estimates.sort(key=lambda e: e.p_hat)
    return sweep


def sample_slot_links(links: PotentialLinks, slot: int, rng: np.random.Generator) -> LinkSet:
    """One active potential link per good cluster of reuse slot `slot`."""
    clusters = links.clusters
    active = reuse_schedule(clusters)[slot]
    pairs = []
    for cluster in active:
        members = clusters.members(cluster)
        # a self hit needs no transmission
        eligible = [u for u in members if links.served[u] and links.server[u] != u]
        if not eligible:
            continue
        u = int(eligible[rng.integers(len(eligible))])
        pairs.append((int(links.server[u]), u))
    return LinkSet.of(pairs)


def enumerate_small_network(config: SimConfig) -> ExactExpectation:
    """Exact per-user E[T_u] and outage by enumerating every placement and request vector."""
    errors = config.validate()
    if errors:
        raise ValueError('; '.join(errors))
    if config.m ** (2 * config.n) > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration of m^(2n) = {config.m}^{2 * config.n} outcomes exceeds {ENUMERATION_LIMIT}")

    pop = zipf_pmf(config.gamma_r, config.m)
    cache = caching_for(config, pop)
    clusters = build_clusters(build_grid(config.n), config.g_c, config.delta, config.k_override)

    files = range(1, config.m + 1)
    vectors = [np.array(v, dtype=np.int64) for v in itertools.product(files, repeat=config.n)]
    placement_prob = [float(np.prod(cache.pmf[v - 1])) for v in vectors]
    request_prob = [float(np.prod(pop.pmf[v - 1])) for v in vectors]

    mean_share = np.zeros(config.n)
    outage = np.zeros(config.n)
    for cached, p_place in zip(vectors, placement_prob):
        if p_place == 0.0:
            continue
        placement = CachePlacement(cached_file=cached)
        for wanted, p_req in zip(vectors, request_prob):
            outcome = run_trial(config, placement, RequestVector(requests=wanted), clusters)
            weight = p_place * p_req
            mean_share += weight * outcome.share
            outage += weight * (~outcome.served)

    return ExactExpectation(mean_share=mean_share, outage=outage)
