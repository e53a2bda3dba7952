"""Command line interface.

Usage:
    isohull sigma    --k config.json [--resolution N] [--out sigma.csv]
    isohull grid     --k config.json [--resolution N] [--out grid.csv]
    isohull laminate --k config.json --matrix a,b,c,d [--out cert.json]
    isohull approx   --k config.json --delta D [--seed S] [--out report.json]

The --k argument names a JSON config file:

    {
      "k": [[1.0, 2.0], [0.5, 3.0]],       required: the K points
      "tol": 1e-9,                          optional: classification tol
      "seed": 0,                            optional: sampling seed
      "grid": {"x_max": 3.0, "y_max": 3.0, "resolution": 64},
      "n_samples": 1000                     optional: approx sample count
    }

Command line flags override config values.  All emitted floats use
shortest round-trip formatting, so identical inputs produce byte-identical
outputs.

Exit codes:
    0  success
    2  configuration / input error (bad config, bad matrix, bad delta)
    3  matrix outside the hull (laminate)
    4  numerical failure (depth exceeded, bracket failure, verification)
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import approx as approx_mod
from . import laminate as lam_mod
from .envelope import (
    KSet,
    KSetError,
    NotApplicableError,
    UnsupportedCardinalityError,
    sigma_closed_form,
    sigma_many,
)
from .hull import classify_sv_batch
from .mat2 import Mat2, Mat2Error

_CLASS_NAMES = {0: "E", 1: "interior", 2: "boundary", 3: "outside"}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OUTSIDE = 3
EXIT_NUMERICAL = 4


class ConfigError(ValueError):
    """Bad configuration file or command line input."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved run configuration (config file merged with CLI flags)."""

    k: KSet
    tol: float = 1e-9
    seed: int = 0
    n_samples: int = 1000
    x_max: float = None
    y_max: float = None
    resolution: int = None


def load_config(path) -> RunConfig:
    """Parse a config file into a RunConfig; raises ConfigError."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "k" not in raw:
        raise ConfigError(f"config {path} must be an object with a 'k' entry")
    try:
        k = KSet(tuple(tuple(p) for p in raw["k"]))
    except (KSetError, TypeError) as exc:
        raise ConfigError(f"invalid K in {path}: {exc}") from exc
    grid = raw.get("grid", {}) or {}
    if not isinstance(grid, dict):
        raise ConfigError("config 'grid' must be an object")
    try:
        return RunConfig(
            k=k,
            tol=float(raw.get("tol", 1e-9)),
            seed=int(raw.get("seed", 0)),
            n_samples=int(raw.get("n_samples", 1000)),
            x_max=None if "x_max" not in grid else float(grid["x_max"]),
            y_max=None if "y_max" not in grid else float(grid["y_max"]),
            resolution=None if "resolution" not in grid else int(grid["resolution"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value in config {path}: {exc}") from exc


def _parse_matrix(text) -> Mat2:
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigError(
            f"--matrix needs 4 comma-separated entries, got {len(parts)}")
    try:
        return Mat2.from_flat(float(p) for p in parts)
    except (ValueError, Mat2Error) as exc:
        raise ConfigError(f"invalid --matrix {text!r}: {exc}") from exc


def _write_lines(out_path, lines):
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sigma(cfg: RunConfig, args) -> int:
    """Tabulate sigma over [0, x_max] as CSV, with the closed form as a
    third column when |K| <= 3 and the formulas apply."""
    env = cfg.k.envelope
    res = args.resolution or cfg.resolution or 200
    x_max = cfg.x_max if cfg.x_max is not None else 2.0 * cfg.k.b_max
    xs = np.linspace(0.0, x_max, res)
    sig = sigma_many(env, xs)

    closed = None
    if len(cfg.k) <= 3:
        try:
            closed = [sigma_closed_form(cfg.k, float(x)) for x in xs]
        except NotApplicableError as exc:
            print(f"closed form not applicable: {exc}", file=sys.stderr)
        except UnsupportedCardinalityError:
            pass

    if closed is None:
        lines = ["x,sigma"]
        lines += [f"{float(x)!r},{float(s)!r}" for x, s in zip(xs, sig)]
    else:
        lines = ["x,sigma,sigma_closed"]
        lines += [f"{float(x)!r},{float(s)!r},{float(c)!r}"
                  for x, s, c in zip(xs, sig, closed)]
    _write_lines(args.out, lines)
    return EXIT_OK


def cmd_grid(cfg: RunConfig, args) -> int:
    """Classify a singular-value grid as CSV rows lam1,lam2,class."""
    res = args.resolution or cfg.resolution or 64
    x_max = cfg.x_max if cfg.x_max is not None else 1.5 * cfg.k.b_max
    y_max = cfg.y_max if cfg.y_max is not None else 1.5 * cfg.k.b_max
    xs = np.linspace(0.0, x_max, res)
    ys = np.linspace(0.0, y_max, res)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    mask = gx.ravel() <= gy.ravel()
    l1 = gx.ravel()[mask]
    l2 = gy.ravel()[mask]
    codes, _ = classify_sv_batch(l1, l2, cfg.k, cfg.tol)
    lines = ["lam1,lam2,class"]
    lines += [f"{float(a)!r},{float(b)!r},{_CLASS_NAMES[int(c)]}"
              for a, b, c in zip(l1, l2, codes)]
    _write_lines(args.out, lines)
    return EXIT_OK


def cmd_laminate(cfg: RunConfig, args) -> int:
    """Decompose --matrix into a laminate certificate and verify it."""
    xi = _parse_matrix(args.matrix)
    dcfg = lam_mod.DecomposeConfig(margin_tol=cfg.tol)
    tree = lam_mod.decompose(xi, cfg.k, dcfg)
    report = lam_mod.verify(tree, xi, cfg.k, dcfg)
    out = args.out or "certificate.json"
    lam_mod.save_certificate(out, tree)
    print(f"leaves: {report.n_leaves}  splits: {report.n_splits}  "
          f"depth: {report.depth}")
    print(f"max barycenter residual: {report.max_barycenter_residual:.3e}")
    print(f"max rank-one defect:     {report.max_rank_one_defect:.3e}")
    print(f"max leaf distance:       {report.max_leaf_distance:.3e}")
    print(f"certificate written to {out}")
    if not report.ok:
        for f in report.failures:
            print(f"verification failure: {f}", file=sys.stderr)
        return EXIT_NUMERICAL
    print("verification: OK")
    return EXIT_OK


def cmd_approx(cfg: RunConfig, args) -> int:
    """Check the three approximation conditions for one delta family."""
    if args.delta is None:
        raise ConfigError("approx requires --delta")
    family = approx_mod.make_delta_family(cfg.k, args.delta)
    rep1 = approx_mod.check_condition1(family, cfg.n_samples, cfg.seed, cfg.tol)
    rep2 = approx_mod.check_condition2(family, cfg.n_samples, cfg.seed, cfg.tol)

    # delta-star search for interior samples, over a grid descending
    # geometrically from delta (condition 3 is a limit statement, so the
    # grid must be allowed to go well below the family's own delta)
    grid = [family.delta * 2.0 ** (-i) for i in range(41)]
    rng = np.random.default_rng(cfg.seed + 1)
    n_eta = max(1, cfg.n_samples // 10)
    svs = approx_mod._sample_hull_svs(cfg.k, 4 * n_eta, rng)
    stars = []
    misses = 0
    taken = 0
    for lam1, lam2 in svs:
        if taken >= n_eta:
            break
        eta = Mat2.diag(lam1, lam2)
        try:
            rep3 = approx_mod.check_condition3(cfg.k, eta, grid, cfg.tol)
        except approx_mod.NotInteriorError:
            continue
        taken += 1
        if rep3.delta_star is None:
            misses += 1
        else:
            stars.append(rep3.delta_star)

    report = {
        "delta": family.delta,
        "condition1": rep1.to_dict(),
        "condition2": rep2.to_dict(),
        "condition3": {
            "samples": taken,
            "delta_star_min": min(stars) if stars else None,
            "delta_star_max": max(stars) if stars else None,
            "misses": misses,
            "passed": taken > 0 and misses == 0,
        },
    }
    report["passed"] = bool(rep1.passed and rep2.passed
                            and report["condition3"]["passed"])
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isohull",
        description="Rank-one convex hulls of isotropic 2x2 matrix sets: "
                    "boundary curves, classification grids, laminate "
                    "certificates, approximation checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--k", required=True, metavar="CONFIG",
                       help="JSON config file with the K points")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--tol", type=float, default=None,
                       help="classification tolerance override")
        p.add_argument("--seed", type=int, default=None,
                       help="sampling seed override")

    p_sigma = sub.add_parser("sigma", help="tabulate the hull boundary curve")
    common(p_sigma)
    p_sigma.add_argument("--resolution", type=int, default=None)

    p_grid = sub.add_parser("grid", help="classify a singular-value grid")
    common(p_grid)
    p_grid.add_argument("--resolution", type=int, default=None)

    p_lam = sub.add_parser("laminate", help="build a laminate certificate")
    common(p_lam)
    p_lam.add_argument("--matrix", required=True,
                       help="matrix entries m11,m12,m21,m22")

    p_approx = sub.add_parser("approx", help="check the approximation property")
    common(p_approx)
    p_approx.add_argument("--delta", type=float, default=None,
                          help="inward shift of the K points")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.k)
        if args.tol is not None:
            cfg = dataclasses.replace(cfg, tol=args.tol)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        handler = {
            "sigma": cmd_sigma,
            "grid": cmd_grid,
            "laminate": cmd_laminate,
            "approx": cmd_approx,
        }[args.command]
        return handler(cfg, args)
    except (ConfigError, KSetError, Mat2Error,
            approx_mod.DeltaTooLargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except lam_mod.OutsideHullError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTSIDE
    except lam_mod.LaminateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
