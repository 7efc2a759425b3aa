"""Random split-tree construction and tree statistics.

n balls trickle down an infinite b-ary tree: a vertex keeping more than its
capacity s splits, retaining s0 balls, handing s1 to each child, and routing
the rest through a multinomial draw with that vertex's split vector.  The
stored tree is the sub-tree of vertices whose subtree holds at least one ball.

Two constructions of the same law are provided.  The default
"recursive_multinomial" materializes whole levels at a time with vectorized
conditional-binomial multinomials (expected O(n) work per level, O(ln n)
levels).  "ball_by_ball" inserts the n balls one at a time exactly as the
incremental data-structure description goes; it is kept as a slow
cross-validation oracle for distributional equality tests.

Vertex ids are allocation-ordered (breadth first), children sit in
split-vector coordinate order, and each level occupies a contiguous id range,
which is what makes single-pass percolation possible downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from splitperc.rngutil import as_generator
from splitperc.splitvec import SplitParams

MAX_BALLS = 1 << 53  # ball counts beyond this lose integer exactness in aggregation

MODES = ("recursive_multinomial", "ball_by_ball")


@dataclass
class SplitTree:
    """Index-arena split tree in breadth-first layout.

    parent[0] == -1 marks the root.  Vertices with the same depth are
    contiguous: depth-k ids live in [level_starts[k], level_starts[k+1]).
    balls[u] is the number of balls held at u (C(u)); subtree_balls[u] is the
    total in the subtree rooted at u (n_u > 0 for every stored vertex).
    nhat[u], when built, is the path product n * prod(V along root path).
    """

    params: SplitParams
    n: int
    parent: np.ndarray
    depth: np.ndarray
    balls: np.ndarray
    subtree_balls: np.ndarray
    level_starts: np.ndarray
    nhat: Optional[np.ndarray] = None
    _ball_cum: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def num_vertices(self) -> int:
        return int(self.parent.size)

    @property
    def height(self) -> int:
        return int(self.level_starts.size) - 2

    def vertices_at_depth(self, k: int) -> np.ndarray:
        if k < 0 or k > self.height:
            return np.empty(0, dtype=np.int64)
        return np.arange(self.level_starts[k], self.level_starts[k + 1], dtype=np.int64)

    def child_ids(self, v: int) -> np.ndarray:
        """Children of v in split-vector coordinate order (pruned of empties)."""
        k = int(self.depth[v]) + 1
        if k > self.height:
            return np.empty(0, dtype=np.int64)
        lo, hi = int(self.level_starts[k]), int(self.level_starts[k + 1])
        seg = self.parent[lo:hi]
        left = lo + np.searchsorted(seg, v, side="left")
        right = lo + np.searchsorted(seg, v, side="right")
        return np.arange(left, right, dtype=np.int64)

    def ball_cum(self) -> np.ndarray:
        if self._ball_cum is None:
            self._ball_cum = np.cumsum(self.balls)
        return self._ball_cum


def _multinomial_rows(totals: np.ndarray, probs: np.ndarray,
                      rng: np.random.Generator) -> np.ndarray:
    """Row-wise Mult(totals[i], probs[i]) by sequential conditional binomials.

    Each conditional draw is an exact binomial variate (no normal
    approximation), so the joint law is exactly multinomial.
    """
    m, b = probs.shape
    out = np.empty((m, b), dtype=np.int64)
    remaining = np.asarray(totals, dtype=np.int64).copy()
    prob_left = np.ones(m)
    for j in range(b - 1):
        with np.errstate(divide="ignore", invalid="ignore"):
            pj = np.where(prob_left > 0.0, probs[:, j] / prob_left, 1.0)
        np.clip(pj, 0.0, 1.0, out=pj)
        draw = rng.binomial(remaining, pj)
        out[:, j] = draw
        remaining -= draw
        prob_left -= probs[:, j]
    out[:, -1] = remaining
    return out


def split_level(counts: np.ndarray, params: SplitParams, rng: np.random.Generator,
                nhat: Optional[np.ndarray] = None):
    """Resolve one frontier level: who is a leaf, and the next level's counts.

    Returns (balls_held, child_counts, child_parent_pos, child_nhat) where
    child_parent_pos indexes into the current level.  Children with zero balls
    are pruned; surviving children appear grouped by parent, in coordinate
    order.
    """
    b, s, s0, s1 = params.b, params.s, params.s0, params.s1
    is_leaf = counts <= s
    balls_held = np.where(is_leaf, counts, np.int64(s0))
    internal = np.flatnonzero(~is_leaf)
    if internal.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return balls_held, empty, empty, (np.empty(0) if nhat is not None else None)
    vecs = params.family.sample_matrix(internal.size, rng)
    spare = counts[internal] - s0 - b * s1
    kids = _multinomial_rows(spare, vecs, rng)
    if s1:
        kids += s1
    flat = kids.ravel()
    keep = flat > 0
    child_counts = flat[keep]
    child_parent_pos = np.repeat(internal, b)[keep]
    child_nhat = None
    if nhat is not None:
        child_nhat = (nhat[internal, None] * vecs).ravel()[keep]
    return balls_held, child_counts, child_parent_pos, child_nhat


def _build_multinomial(params: SplitParams, n: int, rng: np.random.Generator,
                       store_nhat: bool) -> SplitTree:
    parent_chunks, depth_chunks, balls_chunks, sub_chunks, nhat_chunks = [], [], [], [], []
    level_starts = [0]
    counts = np.array([n], dtype=np.int64)
    parents = np.array([-1], dtype=np.int64)
    nhat = np.array([float(n)]) if store_nhat else None
    level_base = 0
    depth = 0
    while counts.size:
        m = counts.size
        level_starts.append(level_starts[-1] + m)
        parent_chunks.append(parents)
        depth_chunks.append(np.full(m, depth, dtype=np.int32))
        sub_chunks.append(counts)
        if store_nhat:
            nhat_chunks.append(nhat)
        balls_held, child_counts, child_parent_pos, child_nhat = split_level(
            counts, params, rng, nhat)
        balls_chunks.append(balls_held)
        parents = level_base + child_parent_pos
        level_base = level_starts[-1]
        counts = child_counts
        nhat = child_nhat
        depth += 1
    return SplitTree(
        params=params,
        n=n,
        parent=np.concatenate(parent_chunks),
        depth=np.concatenate(depth_chunks),
        balls=np.concatenate(balls_chunks),
        subtree_balls=np.concatenate(sub_chunks),
        level_starts=np.asarray(level_starts, dtype=np.int64),
        nhat=np.concatenate(nhat_chunks) if store_nhat else None,
    )


def _build_ball_by_ball(params: SplitParams, n: int, rng: np.random.Generator,
                        store_nhat: bool) -> SplitTree:
    b, s, s0, s1 = params.b, params.s, params.s0, params.s1
    family = params.family
    C = [0]
    parent = [-1]
    kids = [[-1] * b]
    vec: list[Optional[np.ndarray]] = [None]
    cum: list[Optional[np.ndarray]] = [None]
    internal = [False]

    def split_vector(u: int) -> np.ndarray:
        if vec[u] is None:
            vec[u] = family.sample_matrix(1, rng)[0]
            cum[u] = np.cumsum(vec[u])
        return cum[u]

    def child(u: int, i: int) -> int:
        v = kids[u][i]
        if v < 0:
            v = len(C)
            kids[u][i] = v
            C.append(0)
            parent.append(u)
            kids.append([-1] * b)
            vec.append(None)
            cum.append(None)
            internal.append(False)
        return v

    def route(u: int) -> int:
        cu = split_vector(u)
        i = int(np.searchsorted(cu, rng.random()))
        return min(i, b - 1)

    for _ in range(n):
        u = 0
        while internal[u]:
            u = child(u, route(u))
        C[u] += 1
        overflow = [u] if C[u] > s else []
        # explicit work stack: an overflowing vertex always holds exactly
        # s + 1 balls, keeps s0, gives s1 to every child, routes the rest
        while overflow:
            u = overflow.pop()
            spare = C[u] - s0 - b * s1
            C[u] = s0
            internal[u] = True
            received = [s1] * b
            for _ in range(spare):
                received[route(u)] += 1
            for i in range(b):
                if received[i]:
                    w = child(u, i)
                    C[w] += received[i]
                    if C[w] > s:
                        overflow.append(w)

    num = len(C)
    # subtree ball counts: children always have larger creation index
    sub = np.array(C, dtype=np.int64)
    for v in range(num - 1, 0, -1):
        sub[parent[v]] += sub[v]

    # canonical breadth-first relabeling, children in coordinate order
    order = []
    frontier = [0]
    while frontier:
        order.extend(frontier)
        nxt = []
        for u in frontier:
            nxt.extend(w for w in kids[u] if w >= 0)
        frontier = nxt
    order = np.asarray(order, dtype=np.int64)
    rank = np.empty(num, dtype=np.int64)
    rank[order] = np.arange(num)

    parent_arr = np.array(parent, dtype=np.int64)[order]
    parent_arr[1:] = rank[parent_arr[1:]]
    parent_arr[0] = -1
    balls_arr = np.array(C, dtype=np.int64)[order]
    sub_arr = sub[order]
    depth_arr = np.zeros(num, dtype=np.int32)
    for v in range(1, num):
        depth_arr[v] = depth_arr[parent_arr[v]] + 1
    height = int(depth_arr.max()) if num else 0
    level_starts = np.zeros(height + 2, dtype=np.int64)
    np.add.at(level_starts, depth_arr + 1, 1)
    level_starts = np.cumsum(level_starts)

    nhat_arr = None
    if store_nhat:
        nhat_old = np.zeros(num)
        nhat_old[0] = float(n)
        frontier = [0]
        while frontier:
            nxt = []
            for u in frontier:
                for i, w in enumerate(kids[u]):
                    if w >= 0:
                        nhat_old[w] = nhat_old[u] * float(vec[u][i])
                        nxt.append(w)
            frontier = nxt
        nhat_arr = nhat_old[order]

    return SplitTree(params=params, n=n, parent=parent_arr, depth=depth_arr,
                     balls=balls_arr, subtree_balls=sub_arr,
                     level_starts=level_starts, nhat=nhat_arr)


def build_tree(params: SplitParams, n: int, seed,
               mode: str = "recursive_multinomial", store_nhat: bool = False) -> SplitTree:
    """Build a random split tree holding n balls.

    Both modes sample from the same distribution; see the module docstring.
    """
    if n < 1:
        raise ValueError(f"need at least one ball, got n={n}")
    if n > MAX_BALLS:
        raise OverflowError(f"n={n} exceeds the supported ball-count capacity {MAX_BALLS}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    rng = as_generator(seed)
    if mode == "recursive_multinomial":
        return _build_multinomial(params, n, rng, store_nhat)
    return _build_ball_by_ball(params, n, rng, store_nhat)


@dataclass(frozen=True)
class TreeStats:
    """Vertex count, path lengths, height, and depth histograms."""

    num_vertices: int
    psi: int          # total ball path length, sum of ball depths
    upsilon: int      # total vertex path length, sum of vertex depths
    height: int
    ball_depth_histogram: np.ndarray
    vertex_depth_histogram: np.ndarray


def tree_stats(tree: SplitTree) -> TreeStats:
    depths = tree.depth.astype(np.int64)
    ball_hist = np.bincount(depths, weights=tree.balls.astype(np.float64),
                            minlength=tree.height + 1).astype(np.int64)
    vert_hist = np.bincount(depths, minlength=tree.height + 1)
    psi = int(np.dot(ball_hist, np.arange(ball_hist.size)))
    upsilon = int(np.dot(vert_hist, np.arange(vert_hist.size)))
    return TreeStats(num_vertices=tree.num_vertices, psi=psi, upsilon=upsilon,
                     height=tree.height, ball_depth_histogram=ball_hist,
                     vertex_depth_histogram=vert_hist)


def subtree_profile(tree: SplitTree, k: int) -> list[tuple[int, int, Optional[float]]]:
    """(vertex id, n_v, nhat_v) for every depth-k vertex; [] above the height."""
    if k < 0:
        raise ValueError("depth must be nonnegative")
    ids = tree.vertices_at_depth(k)
    out = []
    for v in ids:
        nh = float(tree.nhat[v]) if tree.nhat is not None else None
        out.append((int(v), int(tree.subtree_balls[v]), nh))
    return out


def sample_ball_vertices(tree: SplitTree, rng: np.random.Generator,
                         size: int) -> np.ndarray:
    """Vertices holding `size` uniformly chosen balls (exact, with replacement)."""
    cum = tree.ball_cum()
    picks = rng.integers(0, tree.n, size=size)
    return np.searchsorted(cum, picks, side="right")


def sample_ball_depth(tree: SplitTree, seed, size: Optional[int] = None):
    """Depth of a uniformly chosen ball (or an array of `size` draws)."""
    rng = as_generator(seed)
    verts = sample_ball_vertices(tree, rng, 1 if size is None else size)
    depths = tree.depth[verts].astype(np.int64)
    return int(depths[0]) if size is None else depths


def lca_depth(tree: SplitTree, seed) -> int:
    """Depth of the last common ancestor of two independent uniform balls."""
    rng = as_generator(seed)
    u, v = sample_ball_vertices(tree, rng, 2)
    return _lca_depth_of(tree, int(u), int(v))


def _lca_depth_of(tree: SplitTree, u: int, v: int) -> int:
    du, dv = int(tree.depth[u]), int(tree.depth[v])
    while du > dv:
        u = int(tree.parent[u])
        du -= 1
    while dv > du:
        v = int(tree.parent[v])
        dv -= 1
    while u != v:
        u = int(tree.parent[u])
        v = int(tree.parent[v])
        du -= 1
    return du
