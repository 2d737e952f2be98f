"""Estimator descriptors.

A small grammar names every estimator the harness and the CLI can run::

    fobi
    fastica
    twoscatter(tyler,huber)
    r(prelim=fobi,steps=5,scores=skewt)
    r(prelim=twoscatter(tyler,huber),steps=1)

Descriptors parse into :class:`Descriptor` trees and are turned into
callables by :func:`build_estimator`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import preliminary
from .errors import ParseError
from .restimator import DEFAULT_C, DEFAULT_LAMBDA_MAX, data_driven_r_estimator

_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_\-]*|[0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?|[(),=])")


@dataclass(frozen=True)
class Descriptor:
    name: str
    args: tuple = ()  # positional, each a Descriptor
    kwargs: tuple = ()  # ((key, Descriptor | str), ...)

    def kw(self, key, default=None):
        for k, v in self.kwargs:
            if k == key:
                return v
        return default

    def __str__(self):
        parts = [str(a) for a in self.args] + [f"{k}={v}" for k, v in self.kwargs]
        return self.name if not parts else f"{self.name}({','.join(parts)})"


def _tokenize(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} in descriptor {text!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect=None):
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise ParseError(f"expected {expect or 'a token'} in descriptor {self.text!r}, got {tok!r}")
        self.i += 1
        return tok

    def node(self):
        name = self.take()
        if name in "(),=":
            raise ParseError(f"expected a name in descriptor {self.text!r}, got {name!r}")
        args, kwargs = [], []
        if self.peek() == "(":
            self.take("(")
            while self.peek() != ")":
                if self.i + 1 < len(self.toks) and self.toks[self.i + 1] == "=":
                    key = self.take()
                    self.take("=")
                    kwargs.append((key, self.node()))
                else:
                    args.append(self.node())
                if self.peek() == ",":
                    self.take(",")
                elif self.peek() != ")":
                    raise ParseError(f"expected ',' or ')' in descriptor {self.text!r}")
            self.take(")")
        return Descriptor(name.lower(), tuple(args), tuple(kwargs))


def parse_descriptor(text) -> Descriptor:
    if isinstance(text, Descriptor):
        return text
    p = _Parser(str(text))
    if not p.toks:
        raise ParseError("empty estimator descriptor")
    d = p.node()
    if p.peek() is not None:
        raise ParseError(f"trailing input in descriptor {text!r}")
    return d


@dataclass
class EstimateResult:
    estimate: np.ndarray
    flags: list = field(default_factory=list)
    estimates: list = field(default_factory=list)  # one per multistep iterate, prelim first
    diagnostics: list = field(default_factory=list)


@dataclass(frozen=True)
class Estimator:
    label: str
    fn: object

    def fit(self, X, seed=None) -> EstimateResult:
        return self.fn(np.asarray(X, dtype=float), seed)


def _leaf(d: Descriptor):
    if d.args or d.kwargs:
        raise ParseError(f"{d.name} takes no arguments")


def _scalar(v, cast, what):
    if isinstance(v, Descriptor):
        if v.args or v.kwargs:
            raise ParseError(f"{what} must be a plain value")
        v = v.name
    try:
        return cast(v)
    except ValueError as exc:
        raise ParseError(f"bad value {v!r} for {what}") from exc


def build_estimator(desc, c=DEFAULT_C, lambda_max=DEFAULT_LAMBDA_MAX, steps=None) -> Estimator:
    """Callable estimator for a descriptor.

    ``steps`` (when given) overrides the ``steps`` argument of ``r(...)``;
    ``c`` and ``lambda_max`` configure the cross-information line search.
    """
    d = parse_descriptor(desc)
    label = str(d)

    if d.name == "fobi":
        _leaf(d)
        return Estimator(label, lambda X, seed: EstimateResult(preliminary.fobi(X)))

    if d.name == "fastica":
        _leaf(d)

        def run(X, seed):
            L, info = preliminary.fastica_symmetric(X, seed=0 if seed is None else seed, return_info=True)
            return EstimateResult(L, list(info.flags))

        return Estimator(label, run)

    if d.name == "twoscatter":
        if len(d.args) != 2 or d.kwargs:
            raise ParseError("twoscatter needs exactly two scatter names")
        a, b = (x.name for x in d.args)
        for s in (a, b):
            if s not in preliminary.SCATTERS:
                raise ParseError(f"unknown scatter {s!r}; choose from {sorted(preliminary.SCATTERS)}")

        def run(X, seed):
            if X.shape[1] == 1:
                return EstimateResult(np.ones((1, 1)))
            SA = preliminary.scatter_by_name(a, X)
            SB = preliminary.scatter_by_name(b, X)
            return EstimateResult(preliminary.two_scatter_estimator(SA, SB))

        return Estimator(label, run)

    if d.name == "r":
        if d.args:
            raise ParseError("r(...) takes keyword arguments only")
        unknown = {k for k, _ in d.kwargs} - {"prelim", "steps", "scores", "c", "lambda_max"}
        if unknown:
            raise ParseError(f"unknown r(...) arguments: {sorted(unknown)}")
        prelim_d = d.kw("prelim", Descriptor("fobi"))
        if prelim_d.name == "r":
            raise ParseError("the preliminary of r(...) cannot itself be an R-estimator")
        prelim = build_estimator(prelim_d)
        n_steps = steps if steps is not None else _scalar(d.kw("steps", "1"), int, "steps")
        if n_steps < 0:
            raise ParseError("steps must be non-negative")
        scores = _scalar(d.kw("scores", "skewt"), str, "scores")
        if scores not in ("skewt", "gauss"):
            raise ParseError(f"unknown score family {scores!r}; choose skewt or gauss")
        cc = _scalar(d.kw("c", str(c)), float, "c")
        lm = _scalar(d.kw("lambda_max", str(lambda_max)), float, "lambda_max")
        label = f"r(prelim={prelim_d},steps={n_steps},scores={scores})"

        def run(X, seed):
            pre = prelim.fit(X, seed)
            out = data_driven_r_estimator(X, pre.estimate, steps=n_steps, c=cc, lambda_max=lm, scores=scores)
            return EstimateResult(
                out.estimate,
                pre.flags + out.flags,
                out.estimates,
                out.diagnostics,
            )

        return Estimator(label, run)

    raise ParseError(f"unknown estimator {d.name!r}")
