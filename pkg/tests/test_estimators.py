import numpy as np
import pytest

from rankica import algebra, preliminary
from rankica.errors import ParseError
from rankica.estimators import Descriptor, build_estimator, parse_descriptor

L_BENCH = np.array([[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]])


@pytest.mark.parametrize(
    "text, canon",
    [
        ("fobi", "fobi"),
        (" twoscatter( tyler , huber ) ", "twoscatter(tyler,huber)"),
        ("r(prelim=twoscatter(tyler,huber),steps=3)", "r(prelim=twoscatter(tyler,huber),steps=3)"),
        ("r(c=2.5e1)", "r(c=2.5e1)"),
    ],
)
def test_descriptor_round_trip(text, canon):
    d = parse_descriptor(text)
    assert str(d) == canon
    assert parse_descriptor(str(d)) == d


def test_descriptor_keywords():
    d = parse_descriptor("r(prelim=fastica,steps=2)")
    assert d.name == "r"
    assert d.kw("prelim") == Descriptor("fastica")
    assert d.kw("missing", 7) == 7


@pytest.mark.parametrize("bad", ["", "r(", "r(steps=)", "fobi fastica", "r(prelim=fobi", "r(,)", "%"])
def test_descriptor_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_descriptor(bad)


@pytest.mark.parametrize(
    "bad",
    [
        "nope",
        "fobi(1)",
        "twoscatter(tyler)",
        "twoscatter(tyler,bogus)",
        "r(prelim=r(prelim=fobi))",
        "r(steps=-1)",
        "r(scores=laplace)",
        "r(foo=1)",
        "r(steps=two)",
    ],
)
def test_build_estimator_rejects(bad):
    with pytest.raises(ParseError):
        build_estimator(bad)


def test_r_label_is_canonical_and_steps_override():
    assert build_estimator("r").label == "r(prelim=fobi,steps=1,scores=skewt)"
    assert build_estimator("r(prelim=fastica,steps=4)", steps=2).label == "r(prelim=fastica,steps=2,scores=skewt)"


def test_estimators_agree_with_direct_calls():
    rng = np.random.default_rng(0)
    Z = np.column_stack([rng.uniform(-1, 1, 800), rng.laplace(size=800), rng.exponential(size=800)])
    X = Z @ L_BENCH.T
    np.testing.assert_array_equal(build_estimator("fobi").fit(X).estimate, preliminary.fobi(X))
    np.testing.assert_array_equal(build_estimator("fastica").fit(X, 3).estimate, preliminary.fastica_symmetric(X, seed=3))
    ts = build_estimator("twoscatter(cov,cov4)").fit(X).estimate
    np.testing.assert_allclose(ts, preliminary.fobi(X), atol=1e-12)


def test_r_estimator_records_iterates():
    rng = np.random.default_rng(1)
    Z = np.column_stack([rng.uniform(-1, 1, 1000), rng.laplace(size=1000), rng.exponential(size=1000)])
    res = build_estimator("r(prelim=fobi,steps=2)").fit(Z @ L_BENCH.T, 0)
    assert len(res.estimates) == 3
    np.testing.assert_array_equal(res.estimates[-1], res.estimate)
    assert algebra.is_canonical(res.estimate)
    assert len(res.diagnostics) == 2
