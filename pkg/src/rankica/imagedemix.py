"""Grayscale image demixing: PGM I/O, pixelwise mixing and multistep R-estimation on pixels."""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algebra
from .errors import DimensionMismatch, IoError, ParseError
from .estimators import EstimateResult, build_estimator
from .restimator import DEFAULT_C, DEFAULT_LAMBDA_MAX, data_driven_r_estimator

MIN_PIXELS = 1000


@dataclass(frozen=True)
class GrayImage:
    pixels: np.ndarray  # (h, w) floats in [0, 1]

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=float)
        if p.ndim != 2 or p.size == 0:
            raise DimensionMismatch(f"image pixels must form a non-empty 2-d array, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or p.min() < 0 or p.max() > 1:
            raise ValueError("pixels must lie in [0, 1]")
        object.__setattr__(self, "pixels", p)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def shape(self):
        return self.pixels.shape


def star_mixing(k=3, off=0.95):
    """Ones on the diagonal, ``off`` everywhere else."""
    return np.eye(k) + off * (np.ones((k, k)) - np.eye(k))


# ---------------------------------------------------------------------------
# PGM I/O

_HEADER_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def read_pgm(path) -> GrayImage:
    """Read a binary (P5) or ASCII (P2) portable graymap; values are mapped to ``v / maxval``."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    pos, tokens = 0, []
    for _ in range(4):
        m = _HEADER_TOKEN.match(data, pos)
        if not m:
            raise ParseError(f"{path}: truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    magic = tokens[0]
    if magic not in (b"P5", b"P2"):
        raise ParseError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ParseError(f"{path}: bad PGM header") from exc
    if w <= 0 or h <= 0 or not 0 < maxval < 65536:
        raise ParseError(f"{path}: bad PGM dimensions or maxval")
    if magic == b"P5":
        body = data[pos + 1 :]  # exactly one whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        need = w * h * dtype.itemsize
        if len(body) < need:
            raise ParseError(f"{path}: expected {need} pixel bytes, found {len(body)}")
        vals = np.frombuffer(body[:need], dtype=dtype).astype(float)
    else:
        text = re.sub(rb"#[^\n]*", b"", data[pos:])
        try:
            vals = np.array([int(t) for t in text.split()], dtype=float)
        except ValueError as exc:
            raise ParseError(f"{path}: non-integer pixel value") from exc
        if vals.size != w * h:
            raise ParseError(f"{path}: expected {w * h} pixel values, found {vals.size}")
    if vals.max(initial=0) > maxval:
        raise ParseError(f"{path}: pixel value exceeds maxval {maxval}")
    return GrayImage(vals.reshape(h, w) / maxval)


def write_pgm(img: GrayImage, path, binary=True):
    """Write an 8-bit PGM (``round(255 * pixel)``)."""
    path = Path(path)
    q = np.rint(np.asarray(img.pixels) * 255).astype(np.uint8)
    h, w = q.shape
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if binary:
            path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + q.tobytes())
        else:
            rows = "\n".join(" ".join(str(v) for v in r) for r in q)
            path.write_text(f"P2\n{w} {h}\n255\n{rows}\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# mixing and display


def rescale_display(channel) -> np.ndarray:
    """Min-max rescaling to ``[0, 1]``; a constant channel maps to zeros."""
    c = np.asarray(channel, dtype=float)
    lo, hi = c.min(), c.max()
    if hi - lo <= 0:
        return np.zeros_like(c)
    return (c - lo) / (hi - lo)


def images_to_sample(images) -> np.ndarray:
    """Stack ``k`` same-size images into an ``(h*w, k)`` sample (row-major pixel order)."""
    images = list(images)
    if not images:
        raise DimensionMismatch("no images given")
    shape = images[0].shape
    for im in images[1:]:
        if im.shape != shape:
            raise DimensionMismatch(f"image sizes differ: {shape} vs {im.shape}")
    return np.column_stack([im.pixels.ravel() for im in images])


def sample_to_images(X, shape, display=True):
    X = np.asarray(X, dtype=float)
    if X.shape[0] != shape[0] * shape[1]:
        raise DimensionMismatch(f"{X.shape[0]} pixels do not fill a {shape} image")
    return [GrayImage((rescale_display(X[:, j]) if display else X[:, j]).reshape(shape)) for j in range(X.shape[1])]


def mix_images(sources, L=None):
    """Pixelwise mixing ``X_rs = L Z_rs``.

    Returns the display images (per-channel min-max rescaled) and the raw
    ``(h*w, k)`` sample, which is left untouched.
    """
    Z = images_to_sample(sources)
    k = Z.shape[1]
    L = star_mixing(k) if L is None else np.asarray(L, dtype=float)
    if L.shape != (k, k):
        raise DimensionMismatch(f"mixing matrix {L.shape} does not match {k} images")
    X = Z @ L.T
    return sample_to_images(X, sources[0].shape), X


# ---------------------------------------------------------------------------
# demixing


@dataclass
class DemixResult:
    prelim: str
    estimates: list  # L_(0) (preliminary), L_(1), ..., L_(T)
    images: list  # per step, k display images of L_(t)^{-1} X
    trace: list = field(default_factory=list)  # AE(L_(t), truth) when truth is known
    flags: list = field(default_factory=list)
    tie_fraction: float = 0.0


def tie_fraction(X) -> float:
    """Share of pixel values that repeat an earlier value in the same channel."""
    X = np.asarray(X, dtype=float)
    s = np.sort(X, axis=0)
    return float(np.mean(s[1:] == s[:-1]))


def demix_images(
    X,
    shape,
    prelim="fobi",
    steps=5,
    truth=None,
    c=DEFAULT_C,
    lambda_max=DEFAULT_LAMBDA_MAX,
    seed=0,
) -> DemixResult:
    """Preliminary estimate plus ``steps`` data-driven skew-t R-steps on the pixel sample.

    ``prelim`` is an estimator descriptor or a given ``k x k`` mixing matrix.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != shape[0] * shape[1]:
        raise DimensionMismatch(f"sample of shape {X.shape} does not match image shape {tuple(shape)}")
    if X.shape[0] < MIN_PIXELS:
        raise DimensionMismatch(f"need at least {MIN_PIXELS} pixels, got {X.shape[0]}")
    if isinstance(prelim, str):
        est = build_estimator(prelim, c, lambda_max)
        label, pre = est.label, est.fit(X, seed)
    else:
        label, pre = "given", EstimateResult(algebra.check_nonsingular(prelim, "prelim"))
    out = data_driven_r_estimator(X, pre.estimate, steps=steps, c=c, lambda_max=lambda_max, truth=truth)
    images = [sample_to_images(np.linalg.solve(L, X.T).T, shape) for L in out.estimates]
    return DemixResult(
        prelim=label,
        estimates=out.estimates,
        images=images,
        trace=list(out.trace),
        flags=pre.flags + out.flags,
        tie_fraction=tie_fraction(X),
    )


def write_trace_csv(results, path):
    """CSV ``step,estimator,amari`` for every result with a known-truth trace."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("step", "estimator", "amari"))
            for res in results:
                for t, ae in enumerate(res.trace):
                    w.writerow((t, res.prelim, repr(float(ae))))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_demixed(res: DemixResult, outdir, tag=None):
    """Write ``demixed_<tag>_t<step>_c<channel>.pgm``; steps ``1..T``, or the preliminary when ``T = 0``."""
    outdir = Path(outdir)
    tag = tag or re.sub(r"[^A-Za-z0-9]+", "_", res.prelim).strip("_")
    steps = range(1, len(res.images)) if len(res.images) > 1 else [0]
    paths = []
    for t in steps:
        for j, im in enumerate(res.images[t]):
            p = outdir / f"demixed_{tag}_t{t:02d}_c{j}.pgm"
            write_pgm(im, p)
            paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# synthetic sources


def synthetic_images(h=64, w=128, seed=0):
    """Three independent 8-bit textures with distinct non-Gaussian marginals.

    Channel 0 is skewed noise, channel 1 a blocky two-level-heavy mosaic and
    channel 2 a bimodal speckle.  Each is quantized to 256 gray levels.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xD3]))
    c0 = rng.beta(1.5, 6.0, size=(h, w))
    blocks = rng.uniform(size=((h + 3) // 4, (w + 3) // 4)) ** 3
    c1 = np.kron(blocks, np.ones((4, 4)))[:h, :w]
    c1 = 0.8 * c1 + 0.2 * rng.uniform(size=(h, w))
    mode = rng.random((h, w)) < 0.3
    c2 = np.where(mode, rng.normal(0.8, 0.06, (h, w)), rng.normal(0.3, 0.1, (h, w)))
    out = []
    for c in (c0, c1, c2):
        c = rescale_display(c)
        out.append(GrayImage(np.rint(c * 255) / 255))
    return out

