"""
Zipf request popularity: generalized harmonic sums, the request PMF and
i.i.d. request sampling.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..utils.sampling import cumulative_table, draw_indices


def harmonic(gamma: float, a: int, b: int) -> float:
    """H(gamma, a, b) = sum of i^(-gamma) for i = a..b."""
    if a < 1:
        raise ValueError(f"harmonic sum needs a >= 1, got a={a}")
    if b < a:
        raise ValueError(f"harmonic sum needs b >= a, got a={a}, b={b}")
    if gamma < 0:
        raise ValueError(f"harmonic sum needs gamma >= 0, got {gamma}")

    terms = np.power(np.arange(a, b + 1, dtype=np.float64), -float(gamma))
    return math.fsum(terms)


@dataclass(frozen=True, eq=False)
class PopularityModel:
    """Zipf request distribution over files 1..m (index f stored at pmf[f-1])"""
    m: int
    gamma_r: float
    pmf: np.ndarray
    harmonic_norm: float
    cdf: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class RequestVector:
    """Current requests, one 1-based file index per user"""
    requests: np.ndarray

    def __len__(self):
        return len(self.requests)


def zipf_pmf(gamma_r: float, m: int) -> PopularityModel:
    """Build the Zipf request model P_r(f) = f^(-gamma_r) / H(gamma_r, 1, m).

    gamma_r = 0 is accepted as the uniform-popularity extension. gamma_r >= 1 is
    rejected: the analytic results only hold for exponents below 1.
    """
    if not (0.0 <= gamma_r < 1.0):
        raise ValueError(f"gamma_r must lie in [0, 1), got {gamma_r}")
    if m < 1:
        raise ValueError(f"library size m must be >= 1, got {m}")

    norm = harmonic(gamma_r, 1, m)
    pmf = np.power(np.arange(1, m + 1, dtype=np.float64), -float(gamma_r)) / norm
    pmf.setflags(write=False)

    return PopularityModel(
        m=int(m),
        gamma_r=float(gamma_r),
        pmf=pmf,
        harmonic_norm=norm,
        cdf=cumulative_table(pmf),
    )


def sample_requests(model: PopularityModel, n: int, rng: np.random.Generator) -> RequestVector:
    """Draw n i.i.d. requests from the model."""
    if n < 1:
        raise ValueError(f"number of users must be >= 1, got {n}")
    return RequestVector(requests=draw_indices(model.cdf, n, rng))
