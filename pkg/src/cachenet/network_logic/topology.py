"""
Grid network geometry, square cluster tiling, transmission range, TDMA reuse
factor and a protocol-model feasibility check.

Nodes sit on a sqrt(n) x sqrt(n) lattice with spacing 1/sqrt(n). Node index
u = row * sqrt(n) + col. Clusters tile the lattice in sqrt(g_c) x sqrt(g_c)
blocks; cluster index = cluster_row * dim + cluster_col.
"""

import logging
import math
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from ..exceptions import InadmissibleTilingError

logger = logging.getLogger(__name__)

# Geometric comparisons tolerate this much floating-point slack
DISTANCE_TOLERANCE = 1e-12


def _is_square(value: int) -> bool:
    return value >= 0 and math.isqrt(value) ** 2 == value


@dataclass(frozen=True, eq=False)
class GridNetwork:
    """Regular grid of n nodes in the unit square"""
    n: int
    side_count: int
    positions: np.ndarray

    @property
    def spacing(self) -> float:
        return 1.0 / self.side_count

    def distance(self, i: int, j: int) -> float:
        return float(np.hypot(*(self.positions[i] - self.positions[j])))


@dataclass(frozen=True, eq=False)
class ClusterGrid:
    """Square clusters of g_c nodes with range R and reuse factor K"""
    grid: GridNetwork
    g_c: int
    side: float
    dim: int
    membership: np.ndarray
    R: float
    Delta: float
    K: int
    K_overridden: bool = False

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def num_clusters(self) -> int:
        return self.dim * self.dim

    def members(self, cluster: int) -> np.ndarray:
        return np.nonzero(self.membership == cluster)[0]


@dataclass(frozen=True)
class LinkSet:
    """Simultaneously active (transmitter, receiver) pairs"""
    links: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        links = frozenset((int(t), int(r)) for t, r in self.links)
        transmitters = [t for t, _ in links]
        if len(transmitters) != len(set(transmitters)):
            raise ValueError("a node transmits on more than one link")
        for t, r in links:
            if t == r:
                raise ValueError(f"node {t} cannot transmit to itself")
        object.__setattr__(self, 'links', links)

    @classmethod
    def of(cls, pairs: Iterable[Tuple[int, int]]) -> 'LinkSet':
        return cls(links=frozenset(pairs))

    def without(self, link: Tuple[int, int]) -> 'LinkSet':
        return LinkSet(links=self.links - {link})

    def __len__(self):
        return len(self.links)


def build_grid(n: int) -> GridNetwork:
    """sqrt(n) x sqrt(n) lattice, spacing 1/sqrt(n), cell-centred in [0, 1]^2."""
    if n < 1 or not _is_square(n):
        root = math.isqrt(max(n, 0))
        lower, upper = root * root, (root + 1) ** 2
        raise InadmissibleTilingError(
            f"n={n} is not a perfect square; nearest perfect squares are {lower} and {upper}"
        )

    side_count = math.isqrt(n)
    rows, cols = np.divmod(np.arange(n), side_count)
    positions = np.column_stack([(cols + 0.5) / side_count, (rows + 0.5) / side_count])
    positions.setflags(write=False)
    return GridNetwork(n=n, side_count=side_count, positions=positions)


def admissible_cluster_sizes(n: int) -> List[int]:
    """Every g_c that tiles a sqrt(n) lattice exactly: (sqrt(n)/d)^2 for d | sqrt(n)."""
    side_count = math.isqrt(n)
    return sorted((side_count // d) ** 2 for d in range(1, side_count + 1) if side_count % d == 0)


def transmission_range(g_c: int, n: int) -> float:
    """Cluster diagonal sqrt(2) * sqrt(g_c / n): any two nodes of a cluster are within it."""
    return math.sqrt(2.0) * math.sqrt(g_c / n)


def reuse_factor(Delta: float) -> int:
    """K = (ceil(sqrt(2) (1 + Delta)) + 1)^2."""
    if Delta <= 0:
        raise ValueError(f"Delta must be > 0, got {Delta}")
    return (math.ceil(math.sqrt(2.0) * (1.0 + Delta)) + 1) ** 2


def build_clusters(grid: GridNetwork, g_c: int, Delta: float,
                   K_override: Optional[int] = None) -> ClusterGrid:
    """Tile the grid into square clusters of exactly g_c nodes."""
    if g_c < 1 or grid.n % g_c != 0 or not _is_square(grid.n // g_c):
        options = admissible_cluster_sizes(grid.n)
        below = [g for g in options if g < g_c]
        above = [g for g in options if g > g_c]
        nearest = ([below[-1]] if below else []) + ([above[0]] if above else [])
        raise InadmissibleTilingError(
            f"g_c={g_c} does not tile n={grid.n} into square clusters; "
            f"nearest admissible g_c: {', '.join(str(g) for g in nearest)}"
        )
    if K_override is not None and K_override < 1:
        raise ValueError(f"K override must be >= 1, got {K_override}")

    dim = math.isqrt(grid.n // g_c)
    block = math.isqrt(g_c)
    rows, cols = np.divmod(np.arange(grid.n), grid.side_count)
    membership = (rows // block) * dim + (cols // block)
    membership.setflags(write=False)

    K = reuse_factor(Delta) if K_override is None else int(K_override)
    if K_override is not None:
        logger.info(f"Using reuse override K={K_override} (formula value {reuse_factor(Delta)})")

    return ClusterGrid(
        grid=grid,
        g_c=g_c,
        side=math.sqrt(g_c / grid.n),
        dim=dim,
        membership=membership,
        R=transmission_range(g_c, grid.n),
        Delta=float(Delta),
        K=K,
        K_overridden=K_override is not None,
    )


def reuse_schedule(clusters: ClusterGrid) -> List[List[int]]:
    """Partition clusters into K color classes by (row mod sqrt(K), col mod sqrt(K))."""
    if not _is_square(clusters.K):
        raise ValueError(f"square reuse coloring needs a perfect-square K, got K={clusters.K}")

    period = math.isqrt(clusters.K)
    rows, cols = np.divmod(np.arange(clusters.num_clusters), clusters.dim)
    colors = (rows % period) * period + (cols % period)
    return [np.nonzero(colors == c)[0].tolist() for c in range(clusters.K)]


def check_feasible(links: LinkSet, grid: GridNetwork, R: float, Delta: float) -> bool:
    """Protocol model: each receiver within R of its transmitter and at least
    (1 + Delta) R from every other active transmitter."""
    if len(links) == 0:
        return True

    pairs = np.array(sorted(links.links), dtype=np.int64)
    tx = grid.positions[pairs[:, 0]]
    rx = grid.positions[pairs[:, 1]]

    if np.any(np.hypot(*(tx - rx).T) > R + DISTANCE_TOLERANCE):
        return False

    # cross[i, k]: distance from receiver i to transmitter k
    diff = rx[:, None, :] - tx[None, :, :]
    cross = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(cross, np.inf)
    return bool(np.all(cross >= (1.0 + Delta) * R - DISTANCE_TOLERANCE))
