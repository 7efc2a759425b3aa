"""Bernoulli bond percolation on split trees.

Each edge is kept independently with probability p; the supercritical window
of interest is p = 1 - c/ln n.  Because vertices are stored level by level
with parents preceding children, one forward sweep assigns every vertex its
cluster id: a vertex whose parent edge survives joins the parent's cluster,
otherwise it founds a new one.  Edge randomness is drawn in vertex-id order
(one uniform per non-root vertex), so a fused build-and-percolate pass that
never stores the tree produces bit-identical root-cluster sizes to
percolate(build_tree(...)) under the same pair of seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from splitperc.rngutil import as_generator
from splitperc.splitvec import SplitParams
from splitperc.treegen import SplitTree, split_level


def percolation_param(n: int, c: float) -> float:
    """Supercritical edge-retention probability p = 1 - c/ln n."""
    if c < 0:
        raise ValueError(f"c must be nonnegative, got {c}")
    if n <= 1 and c > 0:
        raise ValueError(f"need n with ln n > 0, got n={n}")
    if c > 0 and math.log(n) <= c:
        raise ValueError(f"n={n} gives ln n = {math.log(n):.4f} <= c = {c}; p would leave [0, 1]")
    if c == 0:
        if n < 2:
            raise ValueError("need n >= 2")
        return 1.0
    return 1.0 - c / math.log(n)


@dataclass
class ClusterDecomposition:
    """Connected components after edge deletion.

    cluster_id[v] is the id (the minimal vertex) of v's cluster.  The dense
    arrays cluster_balls / cluster_vertices are indexed by cluster id and are
    zero elsewhere.  Second-largest totals are taken over all clusters other
    than the (ball- respectively vertex-) largest one, ties broken
    arbitrarily.
    """

    cluster_id: np.ndarray
    cluster_balls: np.ndarray
    cluster_vertices: np.ndarray
    root_cluster_balls: int
    root_cluster_vertices: int
    second_balls: int
    second_vertices: int
    retained_edge_count: int

    @property
    def num_clusters(self) -> int:
        return int(self.cluster_id.size) - self.retained_edge_count

    def cluster_roots(self) -> np.ndarray:
        return np.flatnonzero(self.cluster_vertices)


def _second_largest(totals: np.ndarray) -> int:
    if totals.size < 2:
        return 0
    top2 = np.partition(totals, totals.size - 2)[-2:]
    return int(top2.min())


def percolate(tree: SplitTree, p: float, seed) -> ClusterDecomposition:
    """Keep each edge with probability p and decompose into clusters.

    Deterministic given the seed; costs one uniform draw per non-root vertex
    plus two bincounts.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"retention probability must be in [0, 1], got {p}")
    rng = as_generator(seed)
    num = tree.num_vertices
    retained = np.empty(num, dtype=bool)
    retained[0] = False  # the root has no parent edge
    if num > 1:
        retained[1:] = rng.random(num - 1) < p
    cluster = np.arange(num, dtype=np.int64)
    ls = tree.level_starts
    for k in range(1, tree.height + 1):
        lo, hi = int(ls[k]), int(ls[k + 1])
        seg = slice(lo, hi)
        par_cluster = cluster[tree.parent[seg]]
        cluster[seg] = np.where(retained[seg], par_cluster, cluster[seg])
    ball_tot = np.bincount(cluster, weights=tree.balls.astype(np.float64),
                           minlength=num).astype(np.int64)
    vert_tot = np.bincount(cluster, minlength=num)
    return ClusterDecomposition(
        cluster_id=cluster,
        cluster_balls=ball_tot,
        cluster_vertices=vert_tot,
        root_cluster_balls=int(ball_tot[0]),
        root_cluster_vertices=int(vert_tot[0]),
        second_balls=_second_largest(ball_tot),
        second_vertices=_second_largest(vert_tot),
        retained_edge_count=int(np.count_nonzero(retained[1:])) if num > 1 else 0,
    )


def root_cluster_sizes(params: SplitParams, n: int, p: float, tree_seed,
                       perc_seed) -> tuple[int, int]:
    """(balls, vertices) of the root cluster, without materializing the tree.

    Fuses construction and percolation level by level; the tree stream and the
    edge stream are consumed in the same order as build_tree + percolate, so
    the result is identical to the two-step pipeline for equal seeds.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"retention probability must be in [0, 1], got {p}")
    rng_tree = as_generator(tree_seed)
    rng_perc = as_generator(perc_seed)
    counts = np.array([n], dtype=np.int64)
    conn = np.array([True])
    ghat = 0
    gvert = 0
    while counts.size:
        balls_held, child_counts, child_parent_pos, _ = split_level(
            counts, params, rng_tree, None)
        ghat += int(balls_held[conn].sum())
        gvert += int(np.count_nonzero(conn))
        if child_counts.size:
            keep_edge = rng_perc.random(child_counts.size) < p
            conn = conn[child_parent_pos] & keep_edge
        else:
            conn = np.empty(0, dtype=bool)
        counts = child_counts
    return ghat, gvert


def root_identity_check(params: SplitParams, n: int, c: float, replicas: int,
                        seed: int) -> tuple[float, float, float]:
    """Monte Carlo check of the root-cluster / ball-depth identity.

    lhs averages Ghat/n over fresh (tree, percolation) pairs; rhs averages
    p^(depth of one uniform ball) over fresh (tree, ball) pairs.  The two
    means agree in expectation exactly, for any split tree.  Returns
    (lhs, rhs, pooled standard error).
    """
    from splitperc import rngutil
    from splitperc.treegen import build_tree, sample_ball_depth

    p = percolation_param(n, c)
    lhs = np.empty(replicas)
    rhs = np.empty(replicas)
    for r in range(replicas):
        ghat, _ = root_cluster_sizes(
            params, n, p,
            rngutil.derive_seed(seed, 0, r, rngutil.TREE_STREAM),
            rngutil.derive_seed(seed, 0, r, rngutil.PERC_STREAM))
        lhs[r] = ghat / n
        tree = build_tree(params, n, rngutil.derive_seed(seed, 1, r, rngutil.TREE_STREAM))
        d = sample_ball_depth(tree, rngutil.derive_seed(seed, 1, r, rngutil.DRAW_STREAM))
        rhs[r] = p ** d
    se = math.sqrt(lhs.var(ddof=1) / replicas + rhs.var(ddof=1) / replicas)
    return float(lhs.mean()), float(rhs.mean()), se
