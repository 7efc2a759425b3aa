"""Percolation on complete b-ary trees of height h.

The tree is never materialized: children of vertex i are b*i + 1 ... b*i + b,
and the root cluster is grown level by level.  In the default pruned mode
only the count of root-connected vertices per level is tracked, so one run
costs h binomial draws regardless of tree size.  The full mode sweeps all
n_h = (b^(h+1) - 1)/(b - 1) vertices to also produce the cluster
decomposition (needed for second-largest sizes) under a memory guard.

exact_root_pmf is a small-height dynamic-programming oracle: the root cluster
of a height-(j+1) tree is 1 plus b independent copies of (Bernoulli(p) times
the height-j cluster), so its pmf follows from repeated exact convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from splitperc.rngutil import as_generator

PMF_SIZE_GUARD = 10_000
FULL_MODE_VERTEX_GUARD = 1 << 25


def regular_size(b: int, h: int) -> int:
    """Number of vertices of the complete b-ary tree of height h."""
    if b < 2:
        raise ValueError(f"branch factor must be >= 2, got {b}")
    if h < 0:
        raise ValueError(f"height must be >= 0, got {h}")
    return (b ** (h + 1) - 1) // (b - 1)


@dataclass(frozen=True)
class RegularPercolation:
    """Summary of one percolation outcome on the complete b-ary tree."""

    root_vertices: int
    second_vertices: Optional[int]
    num_clusters: Optional[int]
    retained_edge_count: Optional[int]
    total_vertices: int
    mode: str


def simulate_regular(b: int, h: int, p: float, seed,
                     mode: str = "pruned",
                     vertex_guard: int = FULL_MODE_VERTEX_GUARD) -> RegularPercolation:
    """Percolate the complete b-ary tree and measure the root cluster.

    mode "pruned" visits only root-connected vertices (memory O(h)); mode
    "full" visits all n_h vertices and reports the decomposition summary,
    including the second-largest cluster.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"retention probability must be in [0, 1], got {p}")
    n_h = regular_size(b, h)
    rng = as_generator(seed)
    if mode == "pruned":
        if h > 0 and math.log2(b) * h > 62:
            raise OverflowError(f"b={b}, h={h} overflows 64-bit level sizes")
        conn = 1
        total = 1
        for _ in range(h):
            conn = int(rng.binomial(b * conn, p))
            total += conn
        return RegularPercolation(root_vertices=total, second_vertices=None,
                                  num_clusters=None, retained_edge_count=None,
                                  total_vertices=n_h, mode=mode)
    if mode != "full":
        raise ValueError(f"unknown mode {mode!r}")
    if n_h > vertex_guard:
        raise MemoryError(
            f"full mode needs {n_h} vertices, over the guard {vertex_guard}")
    # global BFS ids; level k occupies [ (b^k-1)/(b-1), (b^{k+1}-1)/(b-1) )
    cluster_chunks = [np.zeros(1, dtype=np.int64)]
    prev_cluster = cluster_chunks[0]
    base = 1
    retained_total = 0
    for k in range(1, h + 1):
        width = b ** k
        ids = np.arange(base, base + width, dtype=np.int64)
        retained = rng.random(width) < p
        retained_total += int(np.count_nonzero(retained))
        par_cluster = np.repeat(prev_cluster, b)
        cur = np.where(retained, par_cluster, ids)
        cluster_chunks.append(cur)
        prev_cluster = cur
        base += width
    cluster = np.concatenate(cluster_chunks)
    vert_tot = np.bincount(cluster, minlength=n_h)
    root_vertices = int(vert_tot[0])
    if vert_tot.size < 2:
        second = 0
    else:
        top2 = np.partition(vert_tot, vert_tot.size - 2)[-2:]
        second = int(top2.min())
    return RegularPercolation(root_vertices=root_vertices, second_vertices=second,
                              num_clusters=n_h - retained_total,
                              retained_edge_count=retained_total,
                              total_vertices=n_h, mode=mode)


def exact_root_pmf(b: int, h: int, p: float) -> np.ndarray:
    """Exact pmf of the root-cluster size over {1, ..., n_h}.

    Returns pmf with pmf[k-1] = P(size = k); mass sums to 1 within 1e-12.
    Convolutions run in float64; total-mass checks use exact (fsum)
    accumulation, and the size guard keeps rounding far below 1e-12.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"retention probability must be in [0, 1], got {p}")
    n_h = regular_size(b, h)
    if n_h > PMF_SIZE_GUARD:
        raise MemoryError(f"exact pmf needs support {n_h} > guard {PMF_SIZE_GUARD}")
    # pmf over sizes 0..n_j of the height-j root cluster (size 0 impossible,
    # kept for aligned convolutions)
    q = np.zeros(2)
    q[1] = 1.0
    for _ in range(h):
        # child contribution: Bernoulli(p) * cluster -> mass 1-p at zero
        w = np.concatenate(([1.0 - p + p * q[0]], p * q[1:]))
        conv = w
        for _ in range(b - 1):
            conv = np.convolve(conv, w)
        q = np.concatenate(([0.0], conv))  # +1 for the root itself
    total = math.fsum(q)
    if abs(total - 1.0) > 1e-12:
        raise ArithmeticError(f"pmf mass drifted to {total!r}")
    return q[1:]


def theorem4_statistic(g_reg: int, b: int, h: int, c: float) -> float:
    """Normalized root-cluster fluctuation for the regular-tree limit law.

    (G/n_h - e^-c) * h - c e^-c log_b h, for h >= 2 (log_b h must be positive
    and away from 0).
    """
    if h < 2:
        raise ValueError(f"need h >= 2, got h={h}")
    n_h = regular_size(b, h)
    ec = math.exp(-c)
    return (g_reg / n_h - ec) * h - c * ec * (math.log(h) / math.log(b))
