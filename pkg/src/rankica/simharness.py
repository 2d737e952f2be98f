"""Monte Carlo harness: generating processes A-I, contamination and the replication driver.

Every replication draws from its own seed substreams, split off the root seed
by counter: ``[root, rep, 0]`` for the sources, ``[root, rep, 1]`` for
contamination and ``[root, rep, 2]`` for randomized estimators.  Adding or
removing estimators never changes the simulated data.
"""
from __future__ import annotations

import configparser
import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import algebra
from .densities import parse_family
from .errors import ConfigError, IoError, ParseError, RankICAError
from .estimators import build_estimator, parse_descriptor

log = logging.getLogger(__name__)

DEFAULT_MIXING = np.array([[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]])

SETUPS = {
    "A": ("skewt(alpha=-4,nu=5)", "skewt(alpha=2,nu=5)", "t(nu=5)"),
    "B": ("slaplace(eta=2)", "slaplace(eta=1/3)", "laplace"),
    "C": ("stable(beta=-1,gamma=1.5)", "stable(beta=1,gamma=1.5)", "stable(beta=0,gamma=1.5)"),
    "D": ("skewt(alpha=-4,nu=5)", "slaplace(eta=2)", "stable(beta=-1,gamma=1.5)"),
    "E": ("stable(beta=-1,gamma=1.5)", "slaplace(eta=2)", "mixt3"),
    "F": ("cauchy", "t(nu=2)", "t(nu=3)"),
    "G": ("t(nu=3)", "t(nu=5)", "gauss"),
}
CONTAMINATED_POOL = ("skewt(alpha=4,nu=5)", "slaplace(eta=2)", "gauss", "stable(beta=1,gamma=1.5)", "mixt3")
CONTAMINATION_RATE = {"H": 0.02, "I": 0.05}
CONTAMINATION_FACTOR = 5.0  # factors are uniform on [-5, 5]

DEFAULT_ESTIMATORS = (
    "fobi",
    "fastica",
    "twoscatter(tyler,huber)",
    "r(prelim=fobi,steps=1,scores=skewt)",
    "r(prelim=fastica,steps=1,scores=skewt)",
    "r(prelim=twoscatter(tyler,huber),steps=1,scores=skewt)",
)

CSV_HEADER = ("setup", "n", "rep", "estimator", "amari", "mdi", "runtime_ms", "flags")


def substream(root, rep, stream):
    return np.random.default_rng(np.random.SeedSequence([int(root), int(rep), int(stream)]))


@dataclass
class Sample:
    X: np.ndarray
    Z: np.ndarray
    mixing: np.ndarray
    families: tuple
    contaminated: np.ndarray  # boolean mask over observations


def setup_families(setup, rng=None):
    """Specs of the three source densities; setups H and I draw them from ``rng``."""
    setup = str(setup).upper()
    if setup in SETUPS:
        return SETUPS[setup]
    if setup in CONTAMINATION_RATE:
        if rng is None:
            raise ConfigError(f"setup {setup} selects its densities at random and needs a generator")
        pick = rng.choice(len(CONTAMINATED_POOL), size=3, replace=False)
        return tuple(CONTAMINATED_POOL[i] for i in pick)
    raise ConfigError(f"unknown setup {setup!r}; expected one of A..I")


def contaminate(X, rate, rng, mode="observation"):
    """Multiply a ``rate`` fraction of observations by uniform factors on ``[-5, 5]``.

    ``mode="observation"`` scales the whole vector by one factor;
    ``mode="component"`` draws an independent factor per coordinate.
    """
    X = np.array(X, dtype=float, copy=True)
    n, k = X.shape
    hit = rng.random(n) < rate
    if mode == "observation":
        X[hit] *= rng.uniform(-CONTAMINATION_FACTOR, CONTAMINATION_FACTOR, size=(int(hit.sum()), 1))
    elif mode == "component":
        X[hit] *= rng.uniform(-CONTAMINATION_FACTOR, CONTAMINATION_FACTOR, size=(int(hit.sum()), k))
    else:
        raise ConfigError(f"unknown contamination mode {mode!r}")
    return X, hit


def generate(setup, n, seed, rep=0, mixing=None, contamination=None, mode="observation") -> Sample:
    """Draw ``n`` observations ``X = L Z`` from a setup.

    ``contamination`` overrides the setup's rate (``0`` gives the clean
    analogue of H or I with the same source draws).
    """
    setup = str(setup).upper()
    L = DEFAULT_MIXING if mixing is None else algebra.check_nonsingular(mixing, "mixing")
    rng = substream(seed, rep, 0)
    specs = setup_families(setup, rng)
    fams = tuple(parse_family(s) for s in specs)
    if L.shape[0] != len(fams):
        raise ConfigError(f"mixing matrix is {L.shape[0]}x{L.shape[0]} but the setup has {len(fams)} sources")
    Z = np.column_stack([f.sample(n, rng) for f in fams])
    X = Z @ L.T
    rate = CONTAMINATION_RATE.get(setup, 0.0) if contamination is None else float(contamination)
    hit = np.zeros(n, dtype=bool)
    if rate > 0:
        X, hit = contaminate(X, rate, substream(seed, rep, 1), mode)
    return Sample(X, Z, L.copy(), specs, hit)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class SimConfig:
    setup: str = "B"
    n: int = 1000
    M: int = 100
    seed: int = 0
    mixing: np.ndarray | None = None
    estimators: tuple = DEFAULT_ESTIMATORS
    c: float = 20.0
    lambda_max: float = 10.0
    steps: int | None = None  # overrides steps of every r(...) descriptor
    contamination: float | None = None
    contamination_mode: str = "observation"
    trace_steps: bool = False  # one row per multistep iterate of r(...) estimators
    timing: bool = True
    jobs: int = 1

    def __post_init__(self):
        self.setup = str(self.setup).upper()
        if self.setup not in SETUPS and self.setup not in CONTAMINATION_RATE:
            raise ConfigError(f"setup must be one of A..I, got {self.setup!r}")
        if int(self.n) < 50:
            raise ConfigError("n must be at least 50")
        if int(self.M) < 1:
            raise ConfigError("M must be at least 1")
        if not self.estimators:
            raise ConfigError("at least one estimator is required")
        if self.c <= 0 or self.lambda_max <= 0:
            raise ConfigError("c and lambda_max must be positive")
        if self.contamination is not None and not 0 <= self.contamination <= 1:
            raise ConfigError("contamination must lie in [0, 1]")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        self.n, self.M, self.seed = int(self.n), int(self.M), int(self.seed)
        self.estimators = tuple(str(e) for e in self.estimators)
        try:
            for e in self.estimators:
                build_estimator(e, self.c, self.lambda_max, self.steps)
        except ParseError as exc:
            raise ConfigError(str(exc)) from exc
        if self.mixing is not None:
            try:
                self.mixing = algebra.check_nonsingular(self.mixing, "mixing")
            except RankICAError as exc:
                raise ConfigError(str(exc)) from exc


def _parse_bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _parse_matrix(text):
    try:
        rows = [[float(x) for x in r.split(",")] for r in text.strip().split(";") if r.strip()]
        return np.array(rows)
    except ValueError as exc:
        raise ConfigError(f"bad mixing matrix {text!r}") from exc


def _split_estimators(text):
    out = [s.strip() for chunk in text.splitlines() for s in chunk.split(";")]
    return tuple(s for s in out if s)


def config_from_mapping(values: dict) -> SimConfig:
    """Build a config from string values (INI section or CLI overrides)."""
    known = {f.name for f in fields(SimConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    conv = {
        "n": int,
        "M": int,
        "seed": int,
        "c": float,
        "lambda_max": float,
        "steps": lambda v: None if str(v).strip().lower() in ("", "none") else int(v),
        "contamination": lambda v: None if str(v).strip().lower() in ("", "none") else float(v),
        "trace_steps": _parse_bool,
        "timing": _parse_bool,
        "jobs": int,
        "mixing": _parse_matrix,
        "estimators": _split_estimators,
    }
    kw = {}
    for k, v in values.items():
        try:
            kw[k] = conv[k](v) if (k in conv and isinstance(v, str)) else v
        except ValueError as exc:
            raise ConfigError(f"bad value for {k}: {v!r}") from exc
    return SimConfig(**kw)


def load_config(path) -> SimConfig:
    """Read a ``[simulation]`` INI section.

    Keys mirror :class:`SimConfig`; ``estimators`` is a ``;`` or newline
    separated list of descriptors and ``mixing`` lists rows separated by ``;``.
    """
    path = Path(path)
    if not path.is_file():
        raise IoError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep 'M' upper-case
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if "simulation" not in cp:
        raise ConfigError(f"{path} has no [simulation] section")
    return config_from_mapping(dict(cp["simulation"]))


# ---------------------------------------------------------------------------
# running


@dataclass
class SimResult:
    config: SimConfig
    rows: list = field(default_factory=list)  # dicts keyed by CSV_HEADER

    def summary(self):
        return summarize(self.rows)

    def amari(self, estimator):
        return np.array([r["amari"] for r in self.rows if r["estimator"] == estimator and r["amari"] is not None])


def _estimator_seed(root, rep):
    return int(np.random.SeedSequence([int(root), int(rep), 2]).generate_state(1)[0])


def _row(cfg, rep, label, amari=None, mdi=None, ms=0.0, flags=()):
    return {
        "setup": cfg.setup,
        "n": cfg.n,
        "rep": rep,
        "estimator": label,
        "amari": amari,
        "mdi": mdi,
        "runtime_ms": round(ms, 3) if cfg.timing else 0,
        "flags": "|".join(flags),
    }


def run_replication(cfg: SimConfig, rep: int) -> list:
    """All estimator rows of one replication; failures become flagged rows with empty errors."""
    sample = generate(cfg.setup, cfg.n, cfg.seed, rep, cfg.mixing, cfg.contamination, cfg.contamination_mode)
    truth = sample.mixing
    eseed = _estimator_seed(cfg.seed, rep)
    rows = []
    for desc in cfg.estimators:
        est = build_estimator(desc, cfg.c, cfg.lambda_max, cfg.steps)
        t0 = time.perf_counter()
        try:
            res = est.fit(sample.X, eseed)
        except (RankICAError, np.linalg.LinAlgError) as exc:
            ms = 1e3 * (time.perf_counter() - t0)
            rows.append(_row(cfg, rep, est.label, ms=ms, flags=[f"error:{type(exc).__name__}"]))
            log.info("rep %d %s failed: %s", rep, est.label, exc)
            continue
        ms = 1e3 * (time.perf_counter() - t0)
        d = parse_descriptor(est.label)
        if cfg.trace_steps and d.name == "r" and len(res.estimates) > 1:
            prelim = d.kw("prelim")
            scores = d.kw("scores")
            for t, L in enumerate(res.estimates):
                label = f"r(prelim={prelim},steps={t},scores={scores})"
                fl = [f for f in res.flags if not f.startswith("step") or int(f[4 : f.index(":")]) <= t]
                rows.append(
                    _row(cfg, rep, label, algebra.amari_error(L, truth), algebra.min_distance_index(L, truth), ms, fl)
                )
            continue
        rows.append(
            _row(
                cfg,
                rep,
                est.label,
                algebra.amari_error(res.estimate, truth),
                algebra.min_distance_index(res.estimate, truth),
                ms,
                res.flags,
            )
        )
    return rows


def _run_block(args):
    cfg, reps = args
    return [row for rep in reps for row in run_replication(cfg, rep)]


def run_experiment(cfg: SimConfig) -> SimResult:
    """Run ``cfg.M`` replications, optionally over ``cfg.jobs`` worker processes.

    Rows are ordered by replication then estimator regardless of ``jobs``.
    """
    reps = list(range(cfg.M))
    if cfg.jobs == 1 or cfg.M == 1:
        rows = _run_block((cfg, reps))
    else:
        blocks = [reps[i :: cfg.jobs] for i in range(cfg.jobs)]
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = [r for part in pool.map(_run_block, [(cfg, b) for b in blocks if b]) for r in part]
        rows.sort(key=lambda r: r["rep"])  # stable: estimator order within a replication is kept
    return SimResult(cfg, rows)


# ---------------------------------------------------------------------------
# persistence and summaries

QUANTILES = {"q25": 0.25, "median": 0.5, "q75": 0.75, "q95": 0.95}


def summarize(rows) -> dict:
    """Per-estimator quantiles of ``amari`` and ``mdi`` plus success counts."""
    out = {}
    for label in dict.fromkeys(r["estimator"] for r in rows):
        sel = [r for r in rows if r["estimator"] == label]
        ok = [r for r in sel if r["amari"] not in (None, "")]
        entry = {"n_ok": len(ok), "n_failed": len(sel) - len(ok)}
        for metric in ("amari", "mdi"):
            vals = np.array([float(r[metric]) for r in ok])
            entry[metric] = {
                name: (float(np.quantile(vals, q)) if vals.size else None) for name, q in QUANTILES.items()
            }
        out[label] = entry
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows, path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow([_fmt(r[h]) for h in CSV_HEADER])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> list:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["n"], r["rep"] = int(r["n"]), int(r["rep"])
        for key in ("amari", "mdi"):
            r[key] = float(r[key]) if r[key] != "" else None
        r["runtime_ms"] = float(r["runtime_ms"])
    return rows


def write_summary(result: SimResult, path):
    cfg = result.config
    payload = {
        "setup": cfg.setup,
        "n": cfg.n,
        "M": cfg.M,
        "seed": cfg.seed,
        "estimators": list(cfg.estimators),
        "summary": result.summary(),
    }
    try:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return payload
