"""Inverse-CDF draws from discrete distributions over 1-based indices."""

import numpy as np

PMF = np.ndarray
CDF = np.ndarray


def cumulative_table(pmf: PMF) -> CDF:
    """Cumulative table for a PMF, pinned to exactly 1 from the last positive entry on."""
    pmf = np.asarray(pmf, dtype=np.float64)
    cdf = np.cumsum(pmf)
    cdf[np.flatnonzero(pmf > 0)[-1]:] = 1.0
    cdf.setflags(write=False)
    return cdf


def draw_indices(cdf: CDF, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `size` 1-based indices from the distribution whose CDF is `cdf`.

    Args:
        cdf: non-decreasing cumulative table ending at 1
        size: number of draws
        rng: the caller's random stream; draws advance it by exactly `size` uniforms

    Returns:
        int64 array of indices in [1, len(cdf)]
    """
    rand = rng.random(size)
    # side='right' so zero-probability entries (flat CDF steps) are never selected
    idx = np.searchsorted(cdf, rand, side='right')
    np.minimum(idx, len(cdf) - 1, out=idx)
    return idx.astype(np.int64) + 1


def trial_stream(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent random stream for one trial, keyed by (master seed, trial index)."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index,))
    return np.random.default_rng(seq)
