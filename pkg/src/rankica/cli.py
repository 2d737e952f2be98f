"""Command-line entry point: ``rankica simulate | estimate | demix-image``.

Exit codes: 0 success, 2 configuration / parse / I/O problems, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import imagedemix, simharness
from .errors import ConfigError, IoError, ParseError, RankICAError
from .estimators import build_estimator
from .restimator import DEFAULT_C, DEFAULT_LAMBDA_MAX

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def read_data_csv(path) -> np.ndarray:
    """Comma-separated numeric rows, no header; blank and ``#`` lines are skipped."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    rows = []
    for i, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            rows.append([float(x) for x in s.split(",")])
        except ValueError as exc:
            raise ParseError(f"{path}:{i}: non-numeric field") from exc
        if len(rows[-1]) != len(rows[0]):
            raise ParseError(f"{path}:{i}: expected {len(rows[0])} fields, found {len(rows[-1])}")
    if not rows:
        raise ParseError(f"{path}: no data rows")
    X = np.array(rows)
    if not np.all(np.isfinite(X)):
        raise ParseError(f"{path}: non-finite values")
    return X


def write_matrix_csv(M, path):
    np.savetxt(path, np.asarray(M), delimiter=",", fmt="%.17g")


def _outdir(args):
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {out}: {exc}") from exc
    return out


def cmd_simulate(args):
    cfg_values = {}
    if args.config:
        base = simharness.load_config(args.config)
        cfg_values = {f: getattr(base, f) for f in base.__dataclass_fields__}
    overrides = {
        "setup": args.setup,
        "n": args.n,
        "M": args.M,
        "seed": args.seed,
        "jobs": args.jobs,
        "steps": args.steps,
        "c": args.c,
        "lambda_max": args.lambda_max,
    }
    cfg_values.update({k: v for k, v in overrides.items() if v is not None})
    if args.estimators:
        cfg_values["estimators"] = simharness._split_estimators(args.estimators)
    if args.no_timing:
        cfg_values["timing"] = False
    cfg = simharness.config_from_mapping(cfg_values)
    print(f"root seed: {cfg.seed}", file=sys.stderr)
    out = _outdir(args)
    result = simharness.run_experiment(cfg)
    stem = f"sim_{cfg.setup}_n{cfg.n}"
    simharness.write_csv(result.rows, out / f"{stem}.csv")
    payload = simharness.write_summary(result, out / f"{stem}_summary.json")
    for label, s in payload["summary"].items():
        med = s["amari"]["median"]
        print(f"{label:60s} median AE {med if med is None else round(med, 4)}  failed {s['n_failed']}")
    return EXIT_OK


def cmd_estimate(args):
    X = read_data_csv(args.data)
    out = _outdir(args)
    n, k = X.shape
    est = build_estimator(
        args.estimator,
        DEFAULT_C if args.c is None else args.c,
        DEFAULT_LAMBDA_MAX if args.lambda_max is None else args.lambda_max,
        args.steps,
    )
    if k == 1:
        warnings.warn("single-column data: the mixing matrix is trivially the identity", stacklevel=2)
    res = est.fit(X, 0 if args.seed is None else args.seed)
    write_matrix_csv(res.estimate, out / "mixing.csv")
    diag = {
        "estimator": est.label,
        "n": n,
        "k": k,
        "estimate": res.estimate.tolist(),
        "flags": res.flags,
        "per_step": res.diagnostics,
    }
    (out / "diagnostics.json").write_text(json.dumps(diag, indent=2) + "\n")
    print(est.label)
    print(np.array2string(res.estimate, precision=6))
    return EXIT_OK


def cmd_demix(args):
    out = _outdir(args)
    seed = 0 if args.seed is None else args.seed
    print(f"root seed: {seed}", file=sys.stderr)
    if args.generate:
        sources = imagedemix.synthetic_images(args.height, args.width, seed)
        for j, im in enumerate(sources):
            imagedemix.write_pgm(im, out / f"source_c{j}.pgm")
    else:
        if not args.images or len(args.images) < 2:
            raise ConfigError("give at least two PGM images or --generate")
        sources = [imagedemix.read_pgm(p) for p in args.images]
    k = len(sources)
    L = imagedemix.star_mixing(k) if args.mixing is None else simharness._parse_matrix(args.mixing)
    if args.premixed:
        X = imagedemix.images_to_sample(sources)
        truth = None if args.mixing is None else L
    else:
        mixed, X = imagedemix.mix_images(sources, L)
        truth = L
        for j, im in enumerate(mixed):
            imagedemix.write_pgm(im, out / f"mixed_c{j}.pgm")
    shape = sources[0].shape
    results = []
    c = DEFAULT_C if args.c is None else args.c
    lm = DEFAULT_LAMBDA_MAX if args.lambda_max is None else args.lambda_max
    steps = 5 if args.steps is None else args.steps
    for prelim in args.prelim:
        res = imagedemix.demix_images(X, shape, prelim, steps, truth, c, lm, seed)
        imagedemix.write_demixed(res, out)
        results.append(res)
        if res.trace:
            print(f"{res.prelim:24s} AE " + " ".join(f"{v:.4f}" for v in res.trace))
    if truth is not None:
        imagedemix.write_trace_csv(results, out / "trace.csv")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="rankica", description="Rank-based ICA estimation and experiments.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="root seed (overrides the config)")
        sp.add_argument("--steps", type=int, default=None, help="number of R-estimation steps")
        sp.add_argument("--c", type=float, default=None, help="line-search grid density")
        sp.add_argument("--lambda-max", dest="lambda_max", type=float, default=None)

    s = sub.add_parser("simulate", help="Monte Carlo experiment over setups A-I")
    common(s)
    s.add_argument("--config", help="INI file with a [simulation] section")
    s.add_argument("--jobs", type=int, default=None, help="worker processes for replications")
    s.add_argument("--setup", default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--M", type=int, default=None, help="replications")
    s.add_argument("--estimators", default=None, help="';'-separated estimator descriptors")
    s.add_argument("--no-timing", action="store_true", help="write runtime_ms as 0 for reproducible CSVs")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="estimate a mixing matrix from a CSV sample")
    common(e)
    e.add_argument("data", help="n x k comma-separated numeric rows")
    e.add_argument("--estimator", default="r(prelim=fobi,steps=1,scores=skewt)")
    e.add_argument("--config", help=argparse.SUPPRESS)
    e.add_argument("--jobs", type=int, default=None, help=argparse.SUPPRESS)
    e.set_defaults(func=cmd_estimate)

    d = sub.add_parser("demix-image", help="mix and demix grayscale PGM images")
    common(d)
    d.add_argument("images", nargs="*", help="source PGM files (same size)")
    d.add_argument("--generate", action="store_true", help="use synthetic source images")
    d.add_argument("--height", type=int, default=64)
    d.add_argument("--width", type=int, default=128)
    d.add_argument("--mixing", default=None, help="rows separated by ';', default 1 on / 0.95 off the diagonal")
    d.add_argument("--premixed", action="store_true", help="inputs are already mixed observations")
    d.add_argument("--prelim", nargs="+", default=["fobi", "fastica"])
    d.add_argument("--config", help=argparse.SUPPRESS)
    d.add_argument("--jobs", type=int, default=None, help=argparse.SUPPRESS)
    d.set_defaults(func=cmd_demix)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ParseError, IoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RankICAError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
