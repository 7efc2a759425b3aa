"""Command-line front end: splitperc <experiment> [flags].

Thin wiring only: flags (optionally seeded from a flat key=value config file
and the SPLITPERC_SEED / SPLITPERC_THREADS environment variables) become an
ExperimentConfig, the harness runs it, and the report is written out.

Exit codes: 0 success, 2 validation/usage error, 3 budget overrun.
"""

from __future__ import annotations

import argparse
import os
import sys

from splitperc.harness import ConfigError, ExperimentConfig, EXPERIMENT_KINDS, run_experiment
from splitperc.renewal import BudgetExceeded

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3


def _parse_n_grid(text: str) -> tuple:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --n value {text!r}: {exc}") from exc


def read_config_file(path: str) -> dict:
    """Flat key=value lines; '#' comments and blank lines ignored."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitperc",
        description="Monte Carlo experiments for percolation on random split "
                    "trees and complete b-ary trees.")
    sub = parser.add_subparsers(dest="kind", metavar="experiment")
    descriptions = {
        "lln": "giant-cluster law of large numbers and uniqueness across an n grid",
        "fluct": "normalized root-cluster fluctuations vs the stable limit law",
        "identity": "exact identity between mean Ghat/n and mean p^depth",
        "regular": "complete b-ary tree percolation and its limit statistic",
        "renewal": "exponential renewal sums by branching exploration",
        "depth": "typical ball-depth moments",
        "levy_tail": "jump-measure 1/x tail of subtree counts near the root",
    }
    for kind in EXPERIMENT_KINDS:
        sp = sub.add_parser(kind, help=descriptions[kind], description=descriptions[kind])
        sp.add_argument("--config", help="flat key=value config file; flags override it")
        sp.add_argument("--family", default=None,
                        help="bst | spacings:b | deterministic:b | dirichlet:b:a")
        sp.add_argument("--s", type=int, default=None, help="vertex capacity")
        sp.add_argument("--s0", type=int, default=None, help="balls kept by internal vertices")
        sp.add_argument("--s1", type=int, default=None, help="balls handed to each child on split")
        sp.add_argument("--c", type=float, default=None, help="supercritical constant c")
        sp.add_argument("--n", default=None,
                        help="ball count, or comma-separated grid (e.g. 16384,131072)")
        sp.add_argument("--b", type=int, default=None, help="regular-tree branch factor")
        sp.add_argument("--h", type=int, default=None, help="regular-tree height")
        sp.add_argument("--reps", type=int, default=None, help="replica count")
        sp.add_argument("--seed", type=int, default=None, help="master seed")
        sp.add_argument("--threads", type=int, default=None, help="worker threads")
        sp.add_argument("--out", default=None, help="report path (default: report.<fmt>)")
        sp.add_argument("--format", choices=("json", "csv"), default=None, dest="fmt")
        sp.add_argument("--emit-samples", action="store_true", default=None,
                        help="include raw normalized samples in the report")
        sp.add_argument("--timing", action="store_true", default=None,
                        help="embed wall-clock runtime (breaks byte-level determinism)")
        sp.add_argument("--zmax", type=float, default=None, help="renewal grid endpoint")
        sp.add_argument("--zstep", type=float, default=None, help="renewal grid step")
        sp.add_argument("--x", type=float, default=None, help="levy_tail threshold x")
        sp.add_argument("--hill-k", type=int, default=None, help="Hill order statistics")
        sp.add_argument("--draws-per-tree", type=int, default=None,
                        help="ball-depth draws per tree (depth experiment)")
        sp.add_argument("--estimate-constants", action="store_true", default=None,
                        help="estimate varsigma/alpha/zeta when not analytic")
    return parser


_FIELD_TYPES = {
    "family": str, "s": int, "s0": int, "s1": int, "c": float, "n": str,
    "b": int, "h": int, "reps": int, "seed": int, "threads": int,
    "out": str, "format": str, "emit_samples": bool, "timing": bool,
    "zmax": float, "zstep": float, "x": float, "hill_k": int,
    "draws_per_tree": int, "estimate_constants": bool,
}


def _coerce(key: str, val: str):
    typ = _FIELD_TYPES.get(key)
    if typ is None:
        raise ConfigError(f"unknown config key {key!r}")
    if typ is bool:
        if val.lower() in ("1", "true", "yes", "on"):
            return True
        if val.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"config key {key!r} expects a boolean, got {val!r}")
    try:
        return typ(val)
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from exc


def resolve_config(kind: str, args: argparse.Namespace, env) -> ExperimentConfig:
    """Merge precedence: flags > config file > environment > defaults."""
    merged: dict = {}
    if args.config:
        for key, val in read_config_file(args.config).items():
            merged[key] = _coerce(key, val)
    if env.get("SPLITPERC_SEED") is not None and "seed" not in merged:
        merged.setdefault("seed", int(env["SPLITPERC_SEED"]))
    if env.get("SPLITPERC_THREADS") is not None and "threads" not in merged:
        merged.setdefault("threads", int(env["SPLITPERC_THREADS"]))
    flag_map = {
        "family": args.family, "s": args.s, "s0": args.s0, "s1": args.s1,
        "c": args.c, "n": args.n, "b": args.b, "h": args.h, "reps": args.reps,
        "seed": args.seed, "threads": args.threads, "out": args.out,
        "format": args.fmt, "emit_samples": args.emit_samples,
        "timing": args.timing, "zmax": args.zmax, "zstep": args.zstep,
        "x": args.x, "hill_k": args.hill_k, "draws_per_tree": args.draws_per_tree,
        "estimate_constants": args.estimate_constants,
    }
    for key, val in flag_map.items():
        if val is not None:
            merged[key] = val

    n_grid: tuple = ()
    if "n" in merged and merged["n"] is not None:
        n_grid = _parse_n_grid(str(merged["n"]))
    try:
        seed = int(merged.get("seed", 0))
        threads = int(merged.get("threads", 1))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad seed/threads: {exc}") from exc
    cfg = ExperimentConfig(
        kind=kind,
        family=merged.get("family", "bst"),
        s=merged.get("s"), s0=merged.get("s0"), s1=merged.get("s1"),
        c=float(merged.get("c", 1.0)),
        n_grid=n_grid,
        b=merged.get("b"), h=merged.get("h"),
        replicas=int(merged.get("reps", 100)),
        seed=seed, threads=threads,
        emit_samples=bool(merged.get("emit_samples", False)),
        include_timing=bool(merged.get("timing", False)),
        z_max=float(merged.get("zmax", 8.0)),
        z_step=float(merged.get("zstep", 0.25)),
        x_threshold=float(merged.get("x", 1.0)),
        hill_k=int(merged.get("hill_k", 200)),
        draws_per_tree=int(merged.get("draws_per_tree", 1000)),
        estimate_constants=bool(merged.get("estimate_constants", False)),
    )
    cfg.validate()
    return cfg, merged.get("out"), merged.get("format", "json")


def main(argv=None, env=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    env = dict(os.environ) if env is None else env
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; pass both through
        return int(exc.code or 0)
    if args.kind is None:
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    try:
        cfg, out_path, fmt = resolve_config(args.kind, args, env)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"splitperc: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        report = run_experiment(cfg)
    except BudgetExceeded as exc:
        print(f"splitperc: budget overrun: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except MemoryError as exc:
        print(f"splitperc: budget overrun: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ValueError) as exc:
        print(f"splitperc: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    out_path = out_path or f"report.{fmt}"
    report.save(out_path, fmt)
    if report.runtime_ms is not None:
        print(f"wrote {out_path} ({report.runtime_ms:.0f} ms)", file=sys.stderr)
    print(out_path)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
