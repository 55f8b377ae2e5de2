"""
Random cache placement: the optimal caching distribution for the clustering
scheme, the in-cluster hit probability it maximizes, heuristic alternatives,
a brute-force grid oracle and placement sampling.

Every node caches exactly one file, drawn i.i.d. from the caching PMF.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from ..exceptions import OracleSizeError
from ..utils.sampling import cumulative_table, draw_indices
from .popularity import PopularityModel, harmonic

logger = logging.getLogger(__name__)

ORACLE_MAX_FILES = 6
ORACLE_RESOLUTIONS = (0.01, 0.02, 0.05)


class CachingKind(Enum):
    OPTIMAL = 'optimal'
    ZIPF_HEURISTIC = 'zipf'
    UNIFORM = 'uniform'
    CUSTOM = 'custom'


@dataclass(frozen=True, eq=False)
class CachingDistribution:
    """Caching PMF over files 1..m.

    For the optimal distribution, `cutoff` is m* (files beyond it are never
    cached) and `multiplier` is the water level nu. Other kinds carry
    cutoff = index of the last positive entry and multiplier = 0.
    """
    pmf: np.ndarray
    kind: CachingKind
    cutoff: int
    multiplier: float = 0.0
    gamma_c: Optional[float] = None
    cdf: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=np.float64)
        if pmf.ndim != 1 or len(pmf) == 0:
            raise ValueError("caching PMF must be a non-empty vector")
        if np.any(pmf < 0):
            raise ValueError("caching PMF has negative entries")
        if abs(pmf.sum() - 1.0) > 1e-9:
            raise ValueError(f"caching PMF must sum to 1, sums to {pmf.sum()!r}")
        pmf.setflags(write=False)
        object.__setattr__(self, 'pmf', pmf)
        object.__setattr__(self, 'cdf', cumulative_table(pmf))

    @property
    def m(self) -> int:
        return len(self.pmf)

    @property
    def label(self) -> str:
        if self.kind is CachingKind.ZIPF_HEURISTIC:
            return f'zipf:{self.gamma_c:g}'
        return self.kind.value


@dataclass(frozen=True, eq=False)
class CachePlacement:
    """One cached file (1-based index) per node"""
    cached_file: np.ndarray

    def __len__(self):
        return len(self.cached_file)


def _last_positive(pmf: np.ndarray) -> int:
    return int(np.nonzero(pmf > 0)[0][-1]) + 1


def uniform_caching(m: int) -> CachingDistribution:
    if m < 1:
        raise ValueError(f"library size m must be >= 1, got {m}")
    return CachingDistribution(pmf=np.full(m, 1.0 / m), kind=CachingKind.UNIFORM, cutoff=m)


def zipf_caching(gamma_c: float, m: int) -> CachingDistribution:
    """Heuristic caching: Zipf with its own exponent gamma_c (any gamma_c >= 0)."""
    if gamma_c < 0:
        raise ValueError(f"gamma_c must be >= 0, got {gamma_c}")
    if m < 1:
        raise ValueError(f"library size m must be >= 1, got {m}")
    weights = np.power(np.arange(1, m + 1, dtype=np.float64), -float(gamma_c))
    pmf = weights / harmonic(gamma_c, 1, m)
    return CachingDistribution(pmf=pmf, kind=CachingKind.ZIPF_HEURISTIC, cutoff=m,
                               gamma_c=float(gamma_c))


def custom_caching(pmf) -> CachingDistribution:
    pmf = np.asarray(pmf, dtype=np.float64)
    return CachingDistribution(pmf=pmf, kind=CachingKind.CUSTOM, cutoff=_last_positive(pmf))


def _check_same_library(pop: PopularityModel, cache: CachingDistribution):
    if pop.m != cache.m:
        raise ValueError(f"popularity covers m={pop.m} files but caching covers m={cache.m}")


def miss_probability(pop: PopularityModel, cache: CachingDistribution, others: int) -> float:
    """Probability that none of `others` i.i.d. caches holds the requested file."""
    _check_same_library(pop, cache)
    if others < 0:
        raise ValueError(f"number of other caches must be >= 0, got {others}")
    return float(np.dot(pop.pmf, np.power(1.0 - cache.pmf, others)))


def hit_probability(pop: PopularityModel, cache: CachingDistribution, g_c: int) -> float:
    """In-cluster hit probability sum_f P_r(f) (1 - (1 - P_c(f))^(g_c - 1)).

    The requesting user's own cache does not count: only the other g_c - 1
    members of its cluster can serve it.
    """
    if g_c < 2:
        raise ValueError(f"hit probability needs g_c >= 2, got {g_c}")
    return 1.0 - miss_probability(pop, cache, g_c - 1)


def _z_values(pop: PopularityModel, g_c: int) -> np.ndarray:
    return np.power(pop.pmf, 1.0 / (g_c - 2))


def cutoff_index(pop: PopularityModel, g_c: int) -> Tuple[int, float]:
    """Water-filling cutoff m* and water level nu for cluster size g_c.

    nu(k) = (k - 1) / sum_{j<=k} 1/z_j with z_j = P_r(j)^(1/(g_c - 2)); m* is the
    largest k with nu(k) < z_k. z is non-increasing and nu non-decreasing in k,
    so the feasible k form a prefix of 1..m.
    """
    if g_c <= 2:
        raise ValueError(f"optimal caching is undefined for g_c <= 2, got g_c={g_c}")

    z = _z_values(pop, g_c)
    k = np.arange(1, pop.m + 1, dtype=np.float64)
    nu = (k - 1.0) / np.cumsum(1.0 / z)
    feasible = np.nonzero(nu < z)[0]
    m_star = int(feasible[-1]) + 1
    return m_star, float(nu[m_star - 1])


def optimal_caching(pop: PopularityModel, g_c: int) -> CachingDistribution:
    """P_c*(f) = [1 - nu / z_f]^+ with (m*, nu) from cutoff_index."""
    m_star, nu = cutoff_index(pop, g_c)
    z = _z_values(pop, g_c)

    pmf = np.zeros(pop.m)
    pmf[:m_star] = 1.0 - nu / z[:m_star]
    # sum is 1 by construction of nu; renormalizing only absorbs rounding
    pmf /= math.fsum(pmf)

    logger.debug(f"Optimal caching for m={pop.m}, gamma_r={pop.gamma_r}, g_c={g_c}: "
                 f"m*={m_star}, nu={nu:.6g}")
    return CachingDistribution(pmf=pmf, kind=CachingKind.OPTIMAL, cutoff=m_star, multiplier=nu)


def _grid_units(resolution: float) -> int:
    if not any(abs(resolution - r) < 1e-12 for r in ORACLE_RESOLUTIONS):
        raise ValueError(f"resolution must be one of {ORACLE_RESOLUTIONS}, got {resolution}")
    return int(round(1.0 / resolution))


def enumerate_simplex_grid(m: int, resolution: float) -> np.ndarray:
    """Every PMF on the resolution grid over m files, one per row.

    Rows come out in lexicographically decreasing order of (x_1, x_2, ...).
    Only meant for small m; the row count is C(N + m - 1, m - 1) with N = 1/resolution.
    """
    units = _grid_units(resolution)
    rows = []

    def fill(prefix, remaining, slots):
        if slots == 1:
            rows.append(prefix + (remaining,))
            return
        for k in range(remaining, -1, -1):
            fill(prefix + (k,), remaining - k, slots - 1)

    fill((), units, m)
    return np.array(rows, dtype=np.float64) / units


def brute_force_caching_oracle(pop: PopularityModel, g_c: int, resolution: float) -> CachingDistribution:
    """Exact argmax of hit_probability over the resolution-grid simplex.

    The objective is separable, sum_f P_r(f) h(x_f) with h(x) = 1 - (1 - x)^(g_c - 1),
    so the search over all grid points is carried out as a dynamic program over
    files and remaining grid units; the result is the same argmax a full
    enumeration returns. Ties go to the lexicographically largest mass on low
    file indices.
    """
    if g_c < 2:
        raise ValueError(f"oracle needs g_c >= 2, got {g_c}")
    if pop.m > ORACLE_MAX_FILES:
        raise OracleSizeError(f"oracle enumeration limited to m <= {ORACLE_MAX_FILES}, got m={pop.m}")

    units = _grid_units(resolution)
    levels = np.arange(units + 1) / units
    # gain[f, k]: contribution of file f when it holds k grid units
    gain = pop.pmf[:, None] * (1.0 - np.power(1.0 - levels[None, :], g_c - 1))

    # best[f, r]: best total over files f..m-1 using exactly r units
    best = np.full((pop.m + 1, units + 1), -np.inf)
    best[pop.m, 0] = 0.0
    for f in range(pop.m - 1, -1, -1):
        for r in range(units + 1):
            best[f, r] = np.max(gain[f, :r + 1] + best[f + 1, r::-1])

    tie_tol = 1e-15
    allocation = np.zeros(pop.m, dtype=np.int64)
    remaining = units
    for f in range(pop.m):
        totals = gain[f, :remaining + 1] + best[f + 1, remaining::-1]
        target = best[f, remaining]
        # largest k achieving the optimum
        k = int(np.nonzero(totals >= target - tie_tol)[0][-1])
        allocation[f] = k
        remaining -= k

    return custom_caching(allocation / units)


def sample_placement(cache: CachingDistribution, n: int, rng: np.random.Generator) -> CachePlacement:
    """Each of n nodes caches one file drawn i.i.d. from the caching PMF."""
    if n < 1:
        raise ValueError(f"number of nodes must be >= 1, got {n}")
    return CachePlacement(cached_file=draw_indices(cache.cdf, n, rng))


def literal_grid_argmax(pop: PopularityModel, g_c: int, resolution: float) -> np.ndarray:
    """Argmax by scoring every grid row; first row wins ties (lexicographic order)."""
    grid = enumerate_simplex_grid(pop.m, resolution)
    scores = 1.0 - np.power(1.0 - grid, g_c - 1) @ pop.pmf
    best = np.max(scores)
    return grid[int(np.nonzero(scores >= best - 1e-15)[0][0])]


__all__ = [
    'CachingKind', 'CachingDistribution', 'CachePlacement',
    'uniform_caching', 'zipf_caching', 'custom_caching',
    'miss_probability', 'hit_probability', 'cutoff_index', 'optimal_caching',
    'enumerate_simplex_grid', 'brute_force_caching_oracle', 'literal_grid_argmax',
    'sample_placement', 'ORACLE_MAX_FILES',
]
