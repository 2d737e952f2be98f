"""Run the Monte Carlo study over several setups and print a median-AE table.

    python3 scripts/run_simulation.py --setups A B C --n 1000 --M 100 --out results/

Each setup writes ``sim_<setup>_n<n>.csv`` and a JSON quantile summary.
"""
import argparse
import sys
from pathlib import Path

from rankica import simharness


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="INI file; its setup is replaced by each of --setups")
    ap.add_argument("--setups", nargs="+", default=list("ABCDEFGHI"))
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--M", type=int, default=100)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args(argv)

    base = {}
    if args.config:
        cfg = simharness.load_config(args.config)
        base = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = {}
    for setup in args.setups:
        values = dict(base, setup=setup, n=args.n, M=args.M, seed=args.seed, jobs=args.jobs)
        cfg = simharness.config_from_mapping(values)
        print(f"setup {setup}: n={cfg.n}, M={cfg.M}, seed={cfg.seed}", file=sys.stderr)
        res = simharness.run_experiment(cfg)
        stem = out / f"sim_{setup}_n{cfg.n}"
        simharness.write_csv(res.rows, f"{stem}.csv")
        payload = simharness.write_summary(res, f"{stem}_summary.json")
        table[setup] = {k: v["amari"]["median"] for k, v in payload["summary"].items()}

    labels = list(dict.fromkeys(k for row in table.values() for k in row))
    width = max(len(s) for s in labels)
    print(f"{'estimator':{width}s} " + " ".join(f"{s:>7s}" for s in table))
    for lab in labels:
        cells = []
        for s in table:
            v = table[s].get(lab)
            cells.append(f"{v:7.4f}" if v is not None else f"{'-':>7s}")
        print(f"{lab:{width}s} " + " ".join(cells))


if __name__ == "__main__":
    main()
