"""
Closed-form throughput-outage curves for the small-library regime.

Only dominant terms are evaluated; the vanishing corrections of the
asymptotic statements have no computable form at finite size. Throughputs are
in bits/s/Hz (multiply-through by the link rate C).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence

import numpy as np

from ..exceptions import ConvergenceError, ParameterBoundError
from ..utils.sim_logger import get_sim_logger

logger = logging.getLogger(__name__)

RHO4_RESIDUAL = 1e-12
RHO4_MAX_ITERATIONS = 400


class SourceTag(str, Enum):
    ACHIEVABLE = 'achievable'
    OUTER = 'outer'
    SIMULATED = 'simulated'
    BASELINE_BROADCAST = 'baseline_broadcast'
    BASELINE_CODED = 'baseline_coded'


class Regime(str, Enum):
    SMALL = 'small'
    LARGE = 'large'
    VERY_LARGE = 'very_large'


@dataclass(frozen=True)
class CurvePoint:
    p: float
    t: float
    case_tag: str
    source_tag: str


@dataclass
class TradeoffCurve:
    """(outage, throughput) points kept in non-decreasing order of p"""
    points: List[CurvePoint] = field(default_factory=list)

    def __post_init__(self):
        for point in self.points:
            if not (0.0 <= point.p <= 1.0):
                raise ValueError(f"outage {point.p} outside [0, 1]")
            if point.t < 0:
                raise ValueError(f"negative throughput {point.t}")
        self.points = sorted(self.points, key=lambda pt: pt.p)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def merged(self, *others: 'TradeoffCurve') -> 'TradeoffCurve':
        points = list(self.points)
        for other in others:
            points.extend(other.points)
        return TradeoffCurve(points)

    def by_source(self, source_tag: str) -> 'TradeoffCurve':
        return TradeoffCurve([pt for pt in self.points if pt.source_tag == source_tag])

    @property
    def p_values(self) -> np.ndarray:
        return np.array([pt.p for pt in self.points])

    @property
    def t_values(self) -> np.ndarray:
        return np.array([pt.t for pt in self.points])


def _alpha(gamma_r: float) -> float:
    return (2.0 - gamma_r) / (1.0 - gamma_r)


def _rho2_lower_bound(gamma_r: float) -> float:
    return ((1.0 - gamma_r) / gamma_r ** gamma_r) ** (1.0 / (2.0 - gamma_r))


@dataclass
class TheoryParams:
    """Parameters of the achievable and outer-bound curves.

    rho1 and rho2 default to their lower bounds, rho3 defaults to rho4.
    """
    gamma_r: float
    m: int
    n: int
    K: int
    C: float = 1.0
    Delta: float = 0.4
    rho1: Optional[float] = None
    rho2: Optional[float] = None
    rho3: Optional[float] = None
    eps_small: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.gamma_r < 1.0):
            raise ParameterBoundError(f"gamma_r must lie in (0, 1), got {self.gamma_r}")
        if self.m < 1 or self.n < 1:
            raise ParameterBoundError(f"m and n must be >= 1, got m={self.m}, n={self.n}")
        if self.K < 1:
            raise ParameterBoundError(f"K must be >= 1, got {self.K}")
        if self.C <= 0 or self.Delta <= 0:
            raise ParameterBoundError(f"C and Delta must be > 0, got C={self.C}, Delta={self.Delta}")

        if self.rho1 is None:
            self.rho1 = self.gamma_r
        if self.rho2 is None:
            self.rho2 = _rho2_lower_bound(self.gamma_r)
        if self.rho3 is None:
            self.rho3 = solve_rho4(self.gamma_r, self.Delta)

        # a hair of slack so the defaults, computed in floating point, pass
        if self.rho1 < self.gamma_r * (1 - 1e-12):
            raise ParameterBoundError(f"rho1 must be >= gamma_r={self.gamma_r}, got {self.rho1}")
        if self.rho2 < _rho2_lower_bound(self.gamma_r) * (1 - 1e-12):
            raise ParameterBoundError(
                f"rho2 must be >= {_rho2_lower_bound(self.gamma_r)!r}, got {self.rho2}")
        if self.rho3 <= 0:
            raise ParameterBoundError(f"rho3 must be > 0, got {self.rho3}")

    @property
    def alpha(self) -> float:
        return _alpha(self.gamma_r)

    @property
    def A(self) -> float:
        g = self.gamma_r
        return g ** (g / (1.0 - g))

    @property
    def a_gamma(self) -> float:
        g = self.gamma_r
        return g ** g * ((1.0 - g) / g ** g) ** (1.0 / self.alpha)

    @property
    def B(self) -> float:
        g = self.gamma_r
        return g ** g * self.rho2 ** (1.0 - g) / (1.0 + g ** g * self.rho2 ** (2.0 - g))

    @property
    def D(self) -> float:
        g = self.gamma_r
        a = self.a_gamma
        return a / (1.0 + a * ((1.0 - g) / g ** g) ** (1.0 / (2.0 - g)))

    @property
    def rho4(self) -> float:
        return solve_rho4(self.gamma_r, self.Delta)

    @property
    def m_scale(self) -> float:
        """m^(-1/alpha)"""
        return self.m ** (-1.0 / self.alpha)


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    ratio: float
    threshold: float


def regime_classify(n: int, m: int, gamma_r: float, eps_small: float = 0.1) -> RegimeReport:
    """Library regime from r = m / n^alpha against tau = (gamma^gamma/(1-gamma))^(alpha/(2-gamma)).

    The definitions are limits; eps_small stands in for "r -> 0" at finite size.
    """
    alpha = _alpha(gamma_r)
    ratio = math.exp(math.log(m) - alpha * math.log(n))
    threshold = (gamma_r ** gamma_r / (1.0 - gamma_r)) ** (alpha / (2.0 - gamma_r))

    if ratio < eps_small:
        regime = Regime.SMALL
    elif ratio <= threshold:
        regime = Regime.LARGE
    else:
        regime = Regime.VERY_LARGE
    return RegimeReport(regime=regime, ratio=ratio, threshold=threshold)


def _warn_unless_small(params: TheoryParams, curve_name: str):
    report = regime_classify(params.n, params.m, params.gamma_r, params.eps_small)
    if report.regime is not Regime.SMALL:
        get_sim_logger().log_event('non_small_library_regime', {
            'curve': curve_name,
            'regime': report.regime.value,
            'ratio': report.ratio,
            'threshold': report.threshold,
        }, level='warning')


def achievable_case2_point(params: TheoryParams, g_c: float) -> CurvePoint:
    """Case-2 point for cluster size g_c; its throughput reduces to C/(K g_c)."""
    g = params.gamma_r
    p = 1.0 - g ** g * (g_c / params.m) ** (1.0 - g)
    t = params.C * params.A / (params.K * params.m * (1.0 - p) ** (1.0 / (1.0 - g)))
    return CurvePoint(p=p, t=t, case_tag='case2', source_tag=SourceTag.ACHIEVABLE.value)


def achievable_at(params: TheoryParams, p: float) -> CurvePoint:
    """Dominant achievable throughput at outage p, picking the case whose p-range holds p."""
    g = params.gamma_r
    scale = params.m_scale
    case3_lower = 1.0 - g ** g * params.rho2 ** (1.0 - g) * scale
    case4_lower = 1.0 - params.a_gamma * scale
    tag = SourceTag.ACHIEVABLE.value

    if p >= case4_lower:
        return CurvePoint(p, params.C * params.D * scale / params.K, 'case4', tag)
    if case3_lower <= p < case4_lower:
        return CurvePoint(p, params.C * params.B * scale / params.K, 'case3', tag)
    if p > 1.0 - g:
        t = params.C * params.A / (params.K * params.m * (1.0 - p) ** (1.0 / (1.0 - g)))
        return CurvePoint(p, t, 'case2', tag)
    if p <= 0.0:
        return CurvePoint(0.0, 0.0, 'case1', tag)
    # p = (1 - gamma) e^(gamma - rho1)  <=>  rho1 = gamma - ln(p / (1 - gamma))
    rho1 = g - math.log(p / (1.0 - g))
    return CurvePoint(p, params.C / (params.K * rho1 * params.m), 'case1', tag)


def achievable_curve(params: TheoryParams,
                     p_grid: Optional[Sequence[float]] = None,
                     g_c_grid: Optional[Sequence[float]] = None,
                     rho1_grid: Optional[Sequence[float]] = None) -> TradeoffCurve:
    """Achievable dominant-term tradeoff of random caching with clustering.

    p_grid evaluates every case at the given outages; g_c_grid traces case 2
    by cluster size; rho1_grid traces case 1 by its parameter. With no grid at
    all, p runs over 0.01, 0.02, ..., 1.
    """
    _warn_unless_small(params, 'achievable')
    if p_grid is None and g_c_grid is None and rho1_grid is None:
        p_grid = np.linspace(0.01, 1.0, 100)

    points: List[CurvePoint] = []
    g = params.gamma_r

    for rho1 in rho1_grid if rho1_grid is not None else []:
        if rho1 < g:
            raise ParameterBoundError(f"rho1 must be >= gamma_r={g}, got {rho1}")
        p = (1.0 - g) * math.exp(g - rho1)
        points.append(CurvePoint(p, params.C / (params.K * rho1 * params.m), 'case1',
                                 SourceTag.ACHIEVABLE.value))

    for g_c in g_c_grid if g_c_grid is not None else []:
        if g_c > g * params.m or g_c <= params.m ** (1.0 / params.alpha):
            logger.warning(f"g_c={g_c} lies outside the case-2 validity range "
                           f"({params.m ** (1.0 / params.alpha):.4g}, {g * params.m:.4g}]")
        point = achievable_case2_point(params, g_c)
        if not (0.0 <= point.p <= 1.0):
            logger.warning(f"g_c={g_c} maps to outage {point.p:.4g} outside [0, 1]; skipped")
            continue
        points.append(point)

    if p_grid is not None:
        _check_case3_segment(params)
        points.extend(achievable_at(params, float(p)) for p in p_grid)

    return TradeoffCurve(points)


def _check_case3_segment(params: TheoryParams):
    g = params.gamma_r
    lower = 1.0 - g ** g * params.rho2 ** (1.0 - g) * params.m_scale
    upper = 1.0 - params.a_gamma * params.m_scale
    if lower >= upper:
        get_sim_logger().log_event('empty_case3_segment', {
            'gamma_r': g, 'm': params.m, 'lower': lower, 'upper': upper,
        }, level='warning')


def _bracket_and_bisect(func, lo: float, hi: float) -> float:
    for _ in range(RHO4_MAX_ITERATIONS):
        mid = 0.5 * (lo + hi)
        value = func(mid)
        if value == 0.0 or (hi - lo) <= 4 * np.finfo(float).eps * mid:
            return mid
        if value > 0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"bisection did not converge in {RHO4_MAX_ITERATIONS} iterations")


def solve_rho4(gamma_r: float, Delta: float) -> float:
    """Positive solution rho of ((1+3D/2)^2 rho)^(2-g) = ln(1 + (2-g)((1+3D/2)^2 rho)^(2-g)).

    With y = ((1+3D/2)^2 rho)^(2-g) and c = 2-g > 1 the equation reads y = ln(1 + c y).
    y = 0 is always a root; the other root is the one returned.
    """
    if not (0.0 < gamma_r < 1.0):
        raise ParameterBoundError(f"gamma_r must lie in (0, 1), got {gamma_r}")
    if Delta <= 0:
        raise ParameterBoundError(f"Delta must be > 0, got {Delta}")

    c = 2.0 - gamma_r
    gap = lambda y: math.log1p(c * y) - y  # > 0 between the two roots

    # ln(1 + cy) - y ~ (c - 1) y - c^2 y^2 / 2 near 0, positive below 2(c - 1)/c^2
    lo = (c - 1.0) / (c * c)
    while gap(lo) <= 0:
        lo *= 0.5
        if lo < 1e-300:
            raise ConvergenceError("could not bracket the positive root from below")
    hi = 1.0
    for _ in range(RHO4_MAX_ITERATIONS):
        if gap(hi) < 0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("could not bracket the positive root from above")

    y = _bracket_and_bisect(gap, lo, hi)
    if abs(gap(y)) >= RHO4_RESIDUAL:
        raise ConvergenceError(f"rho4 residual {abs(gap(y))!r} above {RHO4_RESIDUAL}")

    beta = (1.0 + 1.5 * Delta) ** 2
    return y ** (1.0 / c) / beta


def f1(rho: float, params: TheoryParams) -> float:
    """f_1(rho) = 16C/(Delta^2 rho) (1 - exp(-(1+3Delta/2)^(2(2-g)) rho^(2-g)))."""
    g = params.gamma_r
    beta = (1.0 + 1.5 * params.Delta) ** 2
    return (16.0 * params.C / (params.Delta ** 2 * rho)) * (
        -math.expm1(-(beta ** (2.0 - g)) * rho ** (2.0 - g)))


def _outer_case1(params: TheoryParams, p: float) -> float:
    return 16.0 * params.C / (
        params.Delta ** 2 * params.m * (1.0 - p) ** (1.0 / (1.0 - params.gamma_r)))


def outer_bound_at(params: TheoryParams, p: float) -> CurvePoint:
    g = params.gamma_r
    rho4 = params.rho4
    case2_lower = 1.0 - params.rho3 ** (1.0 - g) * params.m_scale
    case3_lower = 1.0 - rho4 ** (1.0 - g) * params.m_scale
    tag = SourceTag.OUTER.value

    if p >= case3_lower:
        return CurvePoint(p, f1(rho4, params) * params.m_scale, 'case3', tag)
    if p >= case2_lower:
        t = min(_outer_case1(params, p), f1(params.rho3, params) * params.m_scale)
        return CurvePoint(p, t, 'case2', tag)
    return CurvePoint(p, _outer_case1(params, p), 'case1', tag)


def default_g_r_grid(params: TheoryParams, points: int = 25) -> np.ndarray:
    """Geometric grid from m^(1/alpha) to 16 n / Delta^2."""
    low = params.m ** (1.0 / params.alpha)
    high = 16.0 * params.n / params.Delta ** 2
    return np.geomspace(low, high, points)


def outer_bound_curve(params: TheoryParams,
                      p_grid: Optional[Sequence[float]] = None,
                      g_r_grid: Optional[Sequence[float]] = None) -> TradeoffCurve:
    """Outer bound dominating every one-hop scheme under the protocol model.

    g_r_grid traces case 1 at p = 1 - (g_R/n)^(1-gamma_r); p_grid evaluates
    every case at the given outages. With no grid, both the default g_R grid
    and p = 0.01, ..., 1 are used.
    """
    _warn_unless_small(params, 'outer')
    if p_grid is None and g_r_grid is None:
        p_grid = np.linspace(0.01, 1.0, 100)
        g_r_grid = default_g_r_grid(params)

    g = params.gamma_r
    points: List[CurvePoint] = []
    g_r_max = 16.0 * params.n / params.Delta ** 2

    for g_r in g_r_grid if g_r_grid is not None else []:
        if g_r > g_r_max:
            raise ParameterBoundError(f"g_R={g_r} exceeds 16 n / Delta^2 = {g_r_max}")
        p = 1.0 - (g_r / params.n) ** (1.0 - g)
        if not (0.0 <= p <= 1.0):
            logger.warning(f"g_R={g_r} maps to outage {p:.4g} outside [0, 1]; skipped")
            continue
        points.append(CurvePoint(p, _outer_case1(params, p), 'case1', SourceTag.OUTER.value))

    for p in p_grid if p_grid is not None else []:
        points.append(outer_bound_at(params, float(p)))

    return TradeoffCurve(points)


@dataclass(frozen=True)
class Baselines:
    broadcast: float
    coded_multicast: float

    def curve(self, p_values: Iterable[float] = (0.0,)) -> TradeoffCurve:
        """Zero-outage reference levels drawn as constant rows at the given p values"""
        points = []
        for p in p_values:
            points.append(CurvePoint(p, self.broadcast, 'order_reference',
                                     SourceTag.BASELINE_BROADCAST.value))
            points.append(CurvePoint(p, self.coded_multicast, 'order_reference',
                                     SourceTag.BASELINE_CODED.value))
        return TradeoffCurve(points)


def baseline_throughputs(n: int, m: int, C: float = 1.0) -> Baselines:
    """Order-reference levels with unit constants: broadcast C/n, coded multicast C max(1/n, 1/m)."""
    if n < 1 or m < 1:
        raise ParameterBoundError(f"n and m must be >= 1, got n={n}, m={m}")
    return Baselines(broadcast=C / n, coded_multicast=C * max(1.0 / n, 1.0 / m))
