import itertools

import numpy as np
import pytest

from cesysid.errors import EvaluationError, TermParseError
from cesysid.terms import build_terms, evaluate_terms, parse_term

XYZ = ("x", "y", "z")


def names(terms):
    return [t.display for t in terms]


def test_paper_mode():
    assert names(build_terms(XYZ, "paper")) == ["x", "y", "z", "xy", "xz", "yz"]


def test_degree_one():
    assert names(build_terms(XYZ, "degree:1")) == ["x", "y", "z"]


def test_degree_two_count():
    terms = build_terms(XYZ, ("degree", 2))
    assert len(terms) == 9
    assert set(names(terms)) == {"x", "y", "z", "xy", "xz", "yz", "x^2", "y^2", "z^2"}


@pytest.mark.parametrize("n,dim", [(1, 2), (2, 4), (3, 3), (4, 2)])
def test_degree_counts_match_binomial(n, dim):
    from math import comb

    terms = build_terms(tuple("abcd"[:dim]), f"degree:{n}")
    assert len(terms) == comb(dim + n, n) - 1
    assert len({t.exponents for t in terms}) == len(terms)


def test_explicit_list():
    terms = build_terms(XYZ, "x,y,xz")
    assert [t.exponents for t in terms] == [(1, 0, 0), (0, 1, 0), (1, 0, 1)]
    assert names(build_terms(XYZ, ["x^2*y", "z"])) == ["x^2y", "z"]


@pytest.mark.parametrize("bad", ["w", "xw", "x*q", "", "x,x", "x^"])
def test_explicit_errors(bad):
    with pytest.raises(TermParseError):
        build_terms(XYZ, bad if bad else [""])


def test_multichar_names_round_trip():
    vars_ = ("u1", "u2")
    for t in build_terms(vars_, "degree:2"):
        assert parse_term(t.display, vars_) == t
    assert parse_term("u1", vars_).exponents == (1, 0)


def test_ordering_deterministic():
    assert build_terms(XYZ, "degree:3") == build_terms(XYZ, "degree:3")


def test_evaluate_identity_and_products():
    states = np.array([[2.0, 3.0, 5.0], [-1.5, 0.25, 4.0]])
    cols = evaluate_terms(states, build_terms(XYZ, "paper"))
    np.testing.assert_array_equal(cols[:, 0], states[:, 0])
    assert cols[0, 3] == 6.0
    assert cols[0, 4] == 10.0
    assert cols[0, 5] == 15.0


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_evaluate_matches_scalar(dim):
    vars_ = tuple("abcd"[:dim])
    rng = np.random.default_rng(dim)
    row = rng.normal(size=dim)
    modes = ["paper", "degree:1", "degree:2", "degree:3"]
    for mode in modes:
        terms = build_terms(vars_, mode)
        got = evaluate_terms(row[None, :], terms)[0]
        for j, t in enumerate(terms):
            expect = 1.0
            for v, e in zip(row, t.exponents):
                for _ in range(e):
                    expect *= v
            assert got[j] == pytest.approx(expect, rel=1e-14, abs=0)


def test_evaluate_overflow_names_term():
    with pytest.raises(EvaluationError, match="x\\^2"):
        evaluate_terms(np.array([[1e200, 1.0, 1.0]]), build_terms(XYZ, "x^2"))
