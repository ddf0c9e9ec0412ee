"""Task-independent reservoir measures and the rank-sum comparison.

A *reservoir* here is any callable mapping a 1-d input sequence to a
(T, dim) state matrix, e.g. ``lambda u: drive_film(genome, u)``.
"""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np
from scipy import stats

from magres.readout import train_ridge, with_bias

log = logging.getLogger(__name__)

Reservoir = Callable[[np.ndarray], np.ndarray]

RANK_TOL = 1e-6
KR_STREAM_LEN = 100
WASHOUT = 50


def effective_rank(matrix: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def kernel_rank(
    reservoir: Reservoir,
    n_streams: int | None = None,
    stream_len: int = KR_STREAM_LEN,
    seed: int = 0,
    tol: float = RANK_TOL,
) -> float:
    """Normalised kernel rank: rank of final states over distinct random streams / dim.

    ``n_streams`` defaults to the state dimension (probed with one stream).
    """
    rng = np.random.default_rng(seed)
    first = np.asarray(reservoir(rng.uniform(-1, 1, stream_len)))
    dim = first.shape[1]
    n_streams = dim if n_streams is None else n_streams
    cols = [first[-1]]
    for _ in range(n_streams - 1):
        cols.append(np.asarray(reservoir(rng.uniform(-1, 1, stream_len)))[-1])
    m = np.column_stack(cols)
    if not np.any(m):
        log.warning("kernel_rank: all states are zero")
        return 0.0
    return effective_rank(m, tol) / dim


def memory_capacity(
    reservoir: Reservoir,
    max_delay: int | None = None,
    seq_len: int = 2000,
    seed: int = 0,
    washout: int = WASHOUT,
    ridge_lambda: float = 1e-8,
) -> float:
    """Linear short-term memory capacity, scored on a held-out half.

    The default ``max_delay`` is ``min(2 * dim, 100)``.
    """
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1, 1, seq_len)
    x = np.asarray(reservoir(u), dtype=float)
    dim = x.shape[1]
    if max_delay is None:
        max_delay = min(2 * dim, 100)
    if seq_len <= max_delay + washout + 10:
        raise ValueError("seq_len too short for the requested delays")
    start = max(washout, max_delay)
    idx = np.arange(start, seq_len)
    half = len(idx) // 2
    tr, te = idx[:half], idx[half:]
    xb = with_bias(x)
    total = 0.0
    for k in range(1, max_delay + 1):
        ro = train_ridge(xb[tr], u[tr - k], ridge_lambda)
        pred = ro.predict(xb[te])
        if np.std(pred) == 0:
            continue
        r = np.corrcoef(pred, u[te - k])[0, 1]
        total += r * r
    return float(total)


def wilcoxon_ranksum(sample_a, sample_b) -> float:
    """Two-sided rank-sum p-value, normal approximation with tie and continuity correction."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples must be non-empty")
    ranks = stats.rankdata(np.concatenate([a, b]))
    w = ranks[:n1].sum()
    n = n1 + n2
    mean = n1 * (n + 1) / 2
    _, counts = np.unique(ranks, return_counts=True)
    tie = np.sum(counts**3 - counts)
    var = n1 * n2 / 12 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return 1.0
    diff = w - mean
    z = (diff - 0.5 * np.sign(diff)) / np.sqrt(var)
    return float(min(1.0, 2 * stats.norm.sf(abs(z))))
