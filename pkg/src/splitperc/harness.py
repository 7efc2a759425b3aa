"""Seeded, replica-parallel Monte Carlo experiments with reproducible reports.

Each experiment kind maps one asymptotic statement onto a concrete sampling
plan: lln (giant-cluster law of large numbers and uniqueness), fluct
(normalized ball-count fluctuations against the Luria-Delbruck limit),
identity (the exact root-cluster / ball-depth identity), regular
(complete b-ary trees and their limit), renewal (exponential renewal sums),
depth (typical ball-depth moments) and levy_tail (the 1/x jump-measure tail).

Reproducibility contract: replica r of grid point g draws its streams from
hash(master seed, g, r, stream), so reports are byte-identical for a fixed
(config, seed) at any thread count.  Wall-clock timing is therefore kept out
of the canonical report payload unless explicitly requested.

Finite-size caveat: the limit statements carry no finite-n error bars, so
fluctuation comparisons are median/tail-shape based; every tolerance used
here is an engineering choice and reports label the targets accordingly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional

import numpy as np

from splitperc import limitlaw, perc, regtree, renewal, rngutil, treegen
from splitperc.splitvec import (
    SplitFamily,
    SplitParams,
    family_constants,
    parse_family,
    preset_params,
)

EXPERIMENT_KINDS = ("lln", "fluct", "identity", "regular", "renewal", "depth", "levy_tail")

TOLERANCE_NOTE = ("limit statements are asymptotic without finite-size error bars; "
                  "all comparison targets and tolerances here are engineering choices")


class ConfigError(ValueError):
    """Experiment configuration failed validation."""


# ---------------------------------------------------------------------------
# statistics helpers

def fluct_statistic(ghat: int, n: int, c: float, mu: float) -> float:
    """Normalized ball-count fluctuation of the root cluster.

    (Ghat/n - e^{-c/mu}) ln n - (c/mu) e^{-c/mu} ln ln n; needs n >= 16 so
    ln ln n is safely positive.
    """
    if n < 16:
        raise ValueError(f"need n >= 16, got n={n}")
    ln_n = math.log(n)
    ec = math.exp(-c / mu)
    return (ghat / n - ec) * ln_n - (c / mu) * ec * math.log(ln_n)


def fluct_statistic_vertices(g: int, n: int, c: float, mu: float, alpha: float) -> float:
    """Vertex-count analogue: (G/n - alpha e^{-c/mu}) ln n - (c alpha/mu) e^{-c/mu} ln ln n."""
    if n < 16:
        raise ValueError(f"need n >= 16, got n={n}")
    ln_n = math.log(n)
    ec = math.exp(-c / mu)
    return (g / n - alpha * ec) * ln_n - (c * alpha / mu) * ec * math.log(ln_n)


def ks_distance(samples, law_cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance between samples and a CDF.

    law_cdf is either a vectorized callable x -> F(x) or a LimitLaw (in which
    case a monotone interpolation table of its CDF is built first).
    """
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("samples must be nonempty")
    if isinstance(law_cdf, limitlaw.LimitLaw):
        law_cdf = law_cdf_interpolator(law_cdf, x[0], x[-1])
    f = np.asarray(law_cdf(x), dtype=float)
    m = x.size
    upper = np.arange(1, m + 1) / m - f
    lower = f - np.arange(0, m) / m
    return float(max(upper.max(), lower.max(), 0.0))


def law_cdf_interpolator(law: limitlaw.LimitLaw, x_lo: float, x_hi: float,
                         tol: float = 1e-7, core_points: int = 257) -> Callable:
    """Monotone CDF table for fast repeated evaluation (KS statistics).

    Dense linear nodes across the bulk (loc +/- 50 scale units) plus
    geometric wings out to the requested range; interpolation error is far
    below sampling noise at the replica counts used here.
    """
    s = abs(law.scale) if law.scale != 0 else 1.0
    core_lo, core_hi = law.loc - 50 * s, law.loc + 50 * s
    nodes = [np.linspace(core_lo, core_hi, core_points)]
    if x_lo < core_lo:
        span = core_lo - x_lo
        steps = np.geomspace(s, span + s, 48) - s
        nodes.append(core_lo - steps[1:] - 1e-9)
        nodes.append(np.array([x_lo - s]))
    if x_hi > core_hi:
        span = x_hi - core_hi
        steps = np.geomspace(s, span + s, 48) - s
        nodes.append(core_hi + steps[1:] + 1e-9)
        nodes.append(np.array([x_hi + s]))
    xs = np.unique(np.concatenate(nodes))
    fs = np.array([limitlaw.cdf(law, float(v), tol) for v in xs])
    fs = np.maximum.accumulate(fs)

    def interp(x):
        return np.interp(np.asarray(x, dtype=float), xs, fs, left=0.0, right=1.0)

    return interp


def hill_estimator(samples, k: int) -> float:
    """Hill estimate of the power-law tail index from the top-k order stats.

    Samples must already be transformed to the positive heavy tail under
    study.  Raises on fewer than k positive samples and on degenerate
    (constant) tails.
    """
    x = np.asarray(samples, dtype=float)
    x = x[x > 0]
    if k < 1:
        raise ValueError("k must be positive")
    if x.size <= k:
        raise ValueError(f"need more than k={k} positive samples, have {x.size}")
    x = np.sort(x)
    top = x[-(k + 1):]
    logs = np.log(top[1:]) - math.log(top[0])
    h = float(logs.mean())
    if h <= 0.0:
        raise ValueError("degenerate tail: top order statistics are constant")
    return 1.0 / h


# ---------------------------------------------------------------------------
# configuration and report

@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment, seed included."""

    kind: str
    family: str = "bst"
    s: Optional[int] = None
    s0: Optional[int] = None
    s1: Optional[int] = None
    c: float = 1.0
    n_grid: tuple = ()
    b: Optional[int] = None          # regular-tree branch factor
    h: Optional[int] = None          # regular-tree height
    replicas: int = 100
    seed: int = 0
    threads: int = 1
    emit_samples: bool = False
    include_timing: bool = False
    z_max: float = 8.0
    z_step: float = 0.25
    x_threshold: float = 1.0
    hill_k: int = 200
    draws_per_tree: int = 1000
    varsigma: Optional[float] = None
    alpha: Optional[float] = None
    zeta: Optional[float] = None
    estimate_constants: bool = False

    def resolve_family(self) -> SplitFamily:
        return parse_family(self.family)

    def resolve_params(self) -> SplitParams:
        return preset_params(self.resolve_family(), self.s, self.s0, self.s1)

    def validate(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.kind == "regular":
            if self.b is None or self.h is None:
                raise ConfigError("regular experiments need --b and --h")
            if self.b < 2:
                raise ConfigError("b must be >= 2")
            if self.h < 2:
                raise ConfigError("regular-tree statistic needs h >= 2")
            if self.c < 0:
                raise ConfigError("c must be >= 0")
            return
        try:
            params = self.resolve_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.kind == "renewal":
            if self.z_max <= 0 or self.z_step <= 0:
                raise ConfigError("z_max and z_step must be positive")
            return
        if not self.n_grid:
            raise ConfigError("this experiment needs at least one n (--n)")
        for n in self.n_grid:
            if n < 2:
                raise ConfigError(f"n must be >= 2, got {n}")
            if self.kind in ("lln", "fluct", "identity", "levy_tail") and self.c > 0 \
                    and math.log(n) <= self.c:
                raise ConfigError(f"n={n} is too small for c={self.c}: ln n <= c")
        if self.kind == "fluct" and min(self.n_grid) < 16:
            raise ConfigError("fluctuation statistic needs n >= 16")
        if self.kind == "levy_tail" and min(self.n_grid) < 16:
            raise ConfigError("levy_tail needs n >= 16")
        if self.kind == "depth" and self.draws_per_tree < 1:
            raise ConfigError("draws_per_tree must be >= 1")
        _ = params  # params validity is the real check above


@dataclass
class ExperimentReport:
    """Structured result of run_experiment; canonically serializable."""

    config: dict
    per_n: list
    samples: Optional[dict]
    ks: Optional[dict]
    hill: Optional[dict]
    runtime_ms: Optional[float]
    failures: dict
    notes: list

    def payload(self, include_samples: Optional[bool] = None) -> dict:
        if include_samples is None:
            include_samples = bool(self.config.get("emit_samples"))
        include_timing = bool(self.config.get("include_timing"))
        return {
            "config": self.config,
            "per_n": self.per_n,
            "samples": self.samples if include_samples else None,
            "ks": self.ks,
            "hill": self.hill,
            "runtime_ms": self.runtime_ms if include_timing else None,
            "failures": self.failures,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.payload(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        kind = self.config["kind"]
        if kind in ("fluct", "regular") and self.samples:
            w.writerow(["n", "replica", "statistic"])
            key = "statistic"
            n_val = self.config.get("h") if kind == "regular" else self.config["n_grid"][0]
            for i, v in enumerate(self.samples[key]):
                w.writerow([n_val, i, repr(v)])
        elif kind == "renewal":
            w.writerow(["z", "mean", "stderr"])
            for row in self.per_n:
                w.writerow([repr(row["z"]), repr(row["mean"]), repr(row["stderr"])])
        else:
            keys = sorted(self.per_n[0].keys()) if self.per_n else []
            w.writerow(keys)
            for row in self.per_n:
                w.writerow([repr(row[k]) for k in keys])
        return buf.getvalue()

    def save(self, path: str, fmt: str = "json") -> None:
        text = self.to_json() if fmt == "json" else self.to_csv()
        with open(path, "w") as fh:
            fh.write(text)


def _parallel_map(fn: Callable, count: int, threads: int) -> list:
    # results are collected in replica order, so aggregation never sees the
    # scheduler
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _summary(values: np.ndarray) -> dict:
    v = np.asarray(values, dtype=float)
    out = {
        "mean": float(v.mean()),
        "stderr": float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0,
        "median": float(np.median(v)),
        "q25": float(np.quantile(v, 0.25)),
        "q75": float(np.quantile(v, 0.75)),
        "count": int(v.size),
    }
    return out


# ---------------------------------------------------------------------------
# experiment bodies

def _run_lln(cfg: ExperimentConfig):
    params = cfg.resolve_params()
    per_n = []
    samples = {}
    target = None
    consts = _constants_for(cfg, params.family)
    if consts is not None:
        target = math.exp(-cfg.c / consts.mu)
    for gi, n in enumerate(cfg.n_grid):
        p = perc.percolation_param(n, cfg.c)

        def one(r, n=n, p=p, gi=gi):
            tree = treegen.build_tree(
                params, n, rngutil.derive_seed(cfg.seed, gi, r, rngutil.TREE_STREAM))
            dec = perc.percolate(
                tree, p, rngutil.derive_seed(cfg.seed, gi, r, rngutil.PERC_STREAM))
            return (dec.root_cluster_balls / n, dec.root_cluster_vertices / n,
                    dec.second_balls / n, dec.second_vertices / n)

        rows = np.asarray(_parallel_map(one, cfg.replicas, cfg.threads))
        entry = {
            "n": int(n),
            "p": p,
            "ghat_frac": _summary(rows[:, 0]),
            "gvert_frac": _summary(rows[:, 1]),
            "second_ball_frac": _summary(rows[:, 2]),
            "second_vertex_frac": _summary(rows[:, 3]),
        }
        if target is not None:
            entry["lln_target"] = target
            entry["abs_bias"] = abs(entry["ghat_frac"]["mean"] - target)
        per_n.append(entry)
        samples[f"ghat_frac/{n}"] = rows[:, 0].tolist()
        samples[f"second_ball_frac/{n}"] = rows[:, 2].tolist()
    return per_n, samples, None, None


def _constants_for(cfg: ExperimentConfig, family: SplitFamily):
    try:
        method = "closed_form" if family.kind in ("bst", "deterministic") else "quadrature"
        consts = family_constants(family, method)
    except ValueError:
        return None
    if cfg.varsigma is not None or cfg.alpha is not None or cfg.zeta is not None:
        consts = consts.with_estimates(alpha=cfg.alpha, varsigma=cfg.varsigma,
                                       zeta=cfg.zeta)
    return consts


def _run_fluct(cfg: ExperimentConfig):
    params = cfg.resolve_params()
    family = params.family
    if family.is_lattice:
        raise ConfigError("fluctuation comparisons are defined for non-lattice "
                          "families only (the periodic corrections have no "
                          "closed form)")
    consts = _constants_for(cfg, family)
    notes = []
    if consts.varsigma is None and cfg.estimate_constants:
        est = estimate_family_constants(
            family, params, n_grid=(1 << 14, 1 << 15, 1 << 16), replicas=200,
            seed=cfg.seed + 1, threads=cfg.threads)
        consts = consts.with_estimates(alpha=est.alpha_hat, varsigma=est.varsigma_hat,
                                       zeta=est.zeta_hat)
        notes.append("varsigma/alpha/zeta estimated empirically, not analytic")
    n = int(cfg.n_grid[0])
    p = perc.percolation_param(n, cfg.c)
    mu = consts.mu

    def one(r):
        ghat, g = perc.root_cluster_sizes(
            params, n, p,
            rngutil.derive_seed(cfg.seed, 0, r, rngutil.TREE_STREAM),
            rngutil.derive_seed(cfg.seed, 0, r, rngutil.PERC_STREAM))
        return ghat, g

    rows = _parallel_map(one, cfg.replicas, cfg.threads)
    stats = np.array([fluct_statistic(gh, n, cfg.c, mu) for gh, _ in rows])
    entry = {"n": n, "p": p, "mu": mu, "statistic": _summary(stats)}
    ks = None
    hill = None
    if consts.varsigma is not None:
        law = limitlaw.theorem2_limit(cfg.c, mu, consts.sigma2, consts.varsigma)
        entry["limit_median"] = limitlaw.quantile(law, 0.5, tol=1e-6)
        entry["median_gap"] = entry["statistic"]["median"] - entry["limit_median"]
        ks = {"statistic_vs_limit": ks_distance(stats, law)}
    else:
        notes.append("no varsigma available: limit-law comparison skipped")
    # the heavy tail sits on the left (negative scale flips the stable tail)
    lower = -(stats - np.median(stats))
    if cfg.hill_k < np.count_nonzero(lower > 0):
        hill = {"lower_tail_index": hill_estimator(lower, cfg.hill_k),
                "k": cfg.hill_k}
    samples = {"statistic": stats.tolist()}
    if consts.alpha is not None:
        vstats = np.array([fluct_statistic_vertices(g, n, cfg.c, mu, consts.alpha)
                           for _, g in rows])
        entry["vertex_statistic"] = _summary(vstats)
        if consts.zeta is not None:
            vlaw = limitlaw.theorem1_limit(cfg.c, mu, consts.sigma2, consts.alpha,
                                           consts.zeta)
            entry["vertex_limit_median"] = limitlaw.quantile(vlaw, 0.5, tol=1e-6)
        samples["vertex_statistic"] = vstats.tolist()
    return [entry], samples, ks, hill, notes


def _run_identity(cfg: ExperimentConfig):
    params = cfg.resolve_params()
    per_n = []
    for gi, n in enumerate(cfg.n_grid):
        lhs, rhs, se = perc.root_identity_check(
            params, n, cfg.c, cfg.replicas, _subseed(cfg.seed, gi))
        per_n.append({"n": int(n), "lhs_mean_ghat_frac": lhs,
                      "rhs_mean_p_to_depth": rhs, "pooled_stderr": se,
                      "abs_gap": abs(lhs - rhs),
                      "gap_over_stderr": abs(lhs - rhs) / se if se > 0 else 0.0})
    return per_n, None, None, None


def _subseed(seed: int, gi: int) -> int:
    # distinct master per grid point, still a pure function of (seed, gi)
    return (seed * 1000003 + gi) & 0x7FFFFFFFFFFF


def _run_regular(cfg: ExperimentConfig):
    b, h, c = int(cfg.b), int(cfg.h), cfg.c
    p = math.exp(-c / h)

    def one(r):
        out = regtree.simulate_regular(
            b, h, p, rngutil.derive_seed(cfg.seed, 0, r, rngutil.TREE_STREAM))
        return out.root_vertices

    g = np.asarray(_parallel_map(one, cfg.replicas, cfg.threads), dtype=np.int64)
    stats = np.array([regtree.theorem4_statistic(int(v), b, h, c) for v in g])
    rho = math.log(h) / math.log(b) % 1.0
    law = limitlaw.theorem4_limit(c, rho, b)
    entry = {
        "b": b, "h": h, "p": p, "rho": rho,
        "n_h": regtree.regular_size(b, h),
        "statistic": _summary(stats),
        "g_frac": _summary(g / regtree.regular_size(b, h)),
        "limit_median": limitlaw.quantile(law, 0.5, tol=1e-6),
    }
    entry["median_gap"] = entry["statistic"]["median"] - entry["limit_median"]
    ks = {"statistic_vs_limit": ks_distance(stats, law)}
    hill = None
    lower = -(stats - np.median(stats))
    if cfg.hill_k < np.count_nonzero(lower > 0):
        hill = {"lower_tail_index": hill_estimator(lower, cfg.hill_k), "k": cfg.hill_k}
    return [entry], {"statistic": stats.tolist()}, ks, hill


def _run_renewal(cfg: ExperimentConfig):
    family = cfg.resolve_family()
    grid = np.arange(0.0, cfg.z_max + 0.5 * cfg.z_step, cfg.z_step)
    prof = renewal.renewal_profile(family, family.b, grid, cfg.replicas, cfg.seed)
    per_n = [{"z": float(z), "mean": float(m), "stderr": float(s)}
             for z, m, s in prof.rows()]
    consts = family_constants(
        family, "closed_form" if family.kind in ("bst", "deterministic") else "quadrature")
    summary = {
        "integral_mean": prof.integral_mean,
        "integral_stderr": prof.integral_stderr,
        "mu": prof.mu,
    }
    if not family.is_lattice:
        summary["integral_target"] = ((consts.sigma2 - consts.mu ** 2)
                                      / (2 * consts.mu ** 2) - 1.0 / consts.mu)
    per_n.append({"z": -1.0, "mean": float("nan"), "stderr": float("nan"),
                  **{f"summary_{k}": v for k, v in summary.items()}})
    failures = {"count": prof.failures}
    return per_n, None, None, None, [], failures


def _run_depth(cfg: ExperimentConfig):
    params = cfg.resolve_params()
    family = params.family
    consts = _constants_for(cfg, family)
    per_n = []
    samples = {}
    for gi, n in enumerate(cfg.n_grid):

        def one(r, n=n, gi=gi):
            tree = treegen.build_tree(
                params, n, rngutil.derive_seed(cfg.seed, gi, r, rngutil.TREE_STREAM))
            d = treegen.sample_ball_depth(
                tree, rngutil.derive_seed(cfg.seed, gi, r, rngutil.DRAW_STREAM),
                size=cfg.draws_per_tree)
            return float(d.sum()), float((d.astype(float) ** 2).sum()), d.size

        rows = _parallel_map(one, cfg.replicas, cfg.threads)
        tot = sum(r[0] for r in rows)
        tot2 = sum(r[1] for r in rows)
        cnt = sum(r[2] for r in rows)
        mean = tot / cnt
        var = tot2 / cnt - mean * mean
        entry = {"n": int(n), "draws": int(cnt), "mean_depth": mean, "var_depth": var}
        if consts is not None:
            mu, s2 = consts.mu, consts.sigma2
            entry["mean_target_loglead"] = math.log(n) / mu
            entry["var_target"] = s2 / mu ** 3 * math.log(n)
            if consts.varsigma is not None:
                entry["mean_target"] = math.log(n) / mu + consts.varsigma
        per_n.append(entry)
    return per_n, samples or None, None, None


def _run_levy_tail(cfg: ExperimentConfig):
    params = cfg.resolve_params()
    family = params.family
    consts = _constants_for(cfg, family)
    mu = consts.mu
    x = cfg.x_threshold
    per_n = []
    for gi, n in enumerate(cfg.n_grid):
        p = perc.percolation_param(n, cfg.c)
        k = int(math.floor(2.0 * math.log(math.log(n)) / math.log(params.b)))
        cutoff = x * math.exp(cfg.c / mu) * n / math.log(n)

        def one(r, n=n, k=k, cutoff=cutoff, gi=gi):
            tree = treegen.build_tree(
                params, n, rngutil.derive_seed(cfg.seed, gi, r, rngutil.TREE_STREAM))
            ids = tree.vertices_at_depth(k)
            count = int(np.count_nonzero(tree.subtree_balls[ids] > cutoff))
            return (1.0 - p) * count

        vals = np.asarray(_parallel_map(one, cfg.replicas, cfg.threads))
        per_n.append({
            "n": int(n), "depth_k": k, "x": x,
            "scaled_count": _summary(vals),
            "nu_target": (cfg.c / mu) * math.exp(-cfg.c / mu) / x,
        })
    return per_n, None, None, None


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Validate, dispatch, aggregate, and wrap up one experiment."""
    cfg.validate()
    t0 = time.perf_counter()
    notes = [TOLERANCE_NOTE]
    failures = {"count": 0}
    if cfg.kind == "lln":
        per_n, samples, ks, hill = _run_lln(cfg)
    elif cfg.kind == "fluct":
        per_n, samples, ks, hill, extra = _run_fluct(cfg)
        notes.extend(extra)
    elif cfg.kind == "identity":
        per_n, samples, ks, hill = _run_identity(cfg)
    elif cfg.kind == "regular":
        per_n, samples, ks, hill = _run_regular(cfg)
    elif cfg.kind == "renewal":
        per_n, samples, ks, hill, extra, failures = _run_renewal(cfg)
        notes.extend(extra)
    elif cfg.kind == "depth":
        per_n, samples, ks, hill = _run_depth(cfg)
    else:
        per_n, samples, ks, hill = _run_levy_tail(cfg)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    config_echo = asdict(cfg)
    config_echo["n_grid"] = list(cfg.n_grid)
    return ExperimentReport(config=config_echo, per_n=per_n, samples=samples,
                            ks=ks, hill=hill, runtime_ms=runtime_ms,
                            failures=failures, notes=notes)


# ---------------------------------------------------------------------------
# empirical family constants

@dataclass(frozen=True)
class EstimatedConstants:
    alpha_hat: float
    alpha_stderr: float
    varsigma_hat: float
    varsigma_stderr: float
    zeta_hat: float
    zeta_stderr: float


def estimate_family_constants(family: SplitFamily, params: SplitParams, n_grid,
                              replicas: int, seed: int = 0,
                              threads: int = 1) -> EstimatedConstants:
    """Estimate alpha (vertex/ball ratio) and the path-length corrections.

    alpha_hat is the least-squares slope of mean vertex count against n over
    the grid; varsigma_hat averages mean(Psi)/n - ln(n)/mu over the grid and
    zeta_hat does the same with Upsilon and alpha_hat.  Lattice families are
    rejected: their corrections are periodic, not constants.
    """
    if family.is_lattice:
        raise ValueError("lattice family: the path-length correction is periodic, "
                         "not a constant; estimation is defined for non-lattice "
                         "families only")
    n_grid = tuple(int(n) for n in n_grid)
    if len(n_grid) < 3 or max(n_grid) < 4 * min(n_grid):
        raise ValueError("need >= 3 grid points spanning at least two octaves")
    mu = family_constants(
        family, "closed_form" if family.kind == "bst" else "quadrature").mu

    mean_N = []
    se_N = []
    varsig_rows = []
    ups_rows = []
    for gi, n in enumerate(n_grid):

        def one(r, n=n, gi=gi):
            tree = treegen.build_tree(
                params, n, rngutil.derive_seed(seed, gi, r, rngutil.TREE_STREAM))
            st = treegen.tree_stats(tree)
            return st.num_vertices, st.psi, st.upsilon

        rows = np.asarray(_parallel_map(one, replicas, threads), dtype=float)
        mean_N.append(rows[:, 0].mean())
        se_N.append(rows[:, 0].std(ddof=1) / math.sqrt(replicas) if replicas > 1 else 0.0)
        varsig_rows.append(rows[:, 1] / n - math.log(n) / mu)
        ups_rows.append(rows[:, 2] / n)

    ns = np.asarray(n_grid, dtype=float)
    mean_N = np.asarray(mean_N)
    nc = ns - ns.mean()
    alpha_hat = float(np.dot(nc, mean_N - mean_N.mean()) / np.dot(nc, nc))
    resid = mean_N - mean_N.mean() - alpha_hat * nc
    dof = max(len(n_grid) - 2, 1)
    alpha_se = float(math.sqrt(max(np.dot(resid, resid), 0.0) / dof / np.dot(nc, nc)))

    vs_means = np.array([v.mean() for v in varsig_rows])
    vs_ses = np.array([v.std(ddof=1) / math.sqrt(len(v)) if len(v) > 1 else 0.0
                       for v in varsig_rows])
    varsigma_hat = float(vs_means.mean())
    varsigma_se = float(np.sqrt(np.sum(vs_ses ** 2)) / len(vs_means))

    zs_means = np.array([u.mean() - alpha_hat * math.log(n) / mu
                         for u, n in zip(ups_rows, n_grid)])
    zs_ses = np.array([u.std(ddof=1) / math.sqrt(len(u)) if len(u) > 1 else 0.0
                       for u in ups_rows])
    zeta_hat = float(zs_means.mean())
    zeta_se = float(np.sqrt(np.sum(zs_ses ** 2)) / len(zs_means))

    return EstimatedConstants(alpha_hat=alpha_hat, alpha_stderr=alpha_se,
                              varsigma_hat=varsigma_hat, varsigma_stderr=varsigma_se,
                              zeta_hat=zeta_hat, zeta_stderr=zeta_se)
