"""The rational-matching construction and the |x| identity."""

import itertools
from fractions import Fraction

import pytest

from smoothsum.expr import eval_exact
from smoothsum.franklin import (
    RationalityLink,
    abs_identity_expr,
    build_franklin,
    certify_rationality_link,
    enumerate_unit_rationals,
    parse_grid,
    simplest_in_interval,
    target_rationals,
    verify_abs_identity,
    w_inverse,
    w_value,
)
from smoothsum.intervals import Interval, certify_positive
from smoothsum.numbers import INV_SQRT2, QSqrt2, parse_qsqrt2


def test_enumerations():
    first = list(itertools.islice(enumerate_unit_rationals(), 3))
    assert first == [Fraction(1, 2), Fraction(1, 3), Fraction(2, 3)]
    targets = list(itertools.islice(target_rationals(), 4))
    assert targets == [Fraction(3, 4), Fraction(4, 5), Fraction(5, 6), Fraction(5, 7)]


def test_w_inverse_examples():
    assert w_inverse(Fraction(3, 4)) == parse_qsqrt2("1/2-1/4*sqrt2")
    # w_inverse is a two-sided inverse of w on Q(sqrt2)
    for q in (Fraction(3, 4), Fraction(5, 6), Fraction(7, 9)):
        assert w_value(w_inverse(q)) == QSqrt2.coerce(q)
    assert w_value(QSqrt2()) == INV_SQRT2


def test_simplest_in_interval():
    assert simplest_in_interval(QSqrt2.coerce(Fraction(1, 3)), QSqrt2.coerce(Fraction(2, 3))) == Fraction(1, 2)
    assert simplest_in_interval(QSqrt2.coerce(Fraction(3, 2)), QSqrt2.coerce(3)) == Fraction(2)
    # irrational endpoints
    lo = parse_qsqrt2("1/2-1/4*sqrt2")  # about 0.146
    hi = parse_qsqrt2("1/4*sqrt2")  # about 0.354
    q = simplest_in_interval(lo, hi)
    assert lo < QSqrt2.coerce(q) < hi
    assert q == Fraction(1, 3)
    # integer lower endpoint (regression: inverse of zero)
    q2 = simplest_in_interval(QSqrt2.coerce(0), QSqrt2.coerce(Fraction(1, 7)))
    assert QSqrt2.coerce(0) < QSqrt2.coerce(q2) < QSqrt2.coerce(Fraction(1, 7))


def test_matches_exact(fm16):
    assert len(fm16.steps) == 16
    assert fm16.check_matches()
    # interpolation oracle: re-evaluate each matched point from the raw
    # step data, independently of eval_exact's accumulation order
    for s in fm16.steps:
        total = QSqrt2.coerce(s.a)
        for step in fm16.steps:
            p = QSqrt2.coerce(1)
            for r in reversed(step.roots):
                p = p * (QSqrt2.coerce(s.a) - QSqrt2.coerce(r))
            total = total + step.c * p
        assert total == s.b
        assert w_value(s.b) == QSqrt2.coerce(s.q)


def test_back_and_forth_alternation(fm16):
    directions = [s.direction for s in fm16.steps]
    assert directions[::2] == ["forward"] * 8
    assert directions[1::2] == ["backward"] * 8


def test_order_isomorphism_and_decay(fm16):
    assert fm16.check_order_isomorphism()
    assert fm16.check_decay()
    for s in fm16.steps:
        assert abs(s.c) <= QSqrt2.coerce(Fraction(1, 2**s.index))


def test_endpoints_fixed(fm16):
    assert fm16.eval_exact(0) == QSqrt2.coerce(0)
    assert fm16.eval_exact(1) == QSqrt2.coerce(1)


def test_monotonicity_certificates(fm16):
    assert fm16.derivative_budget().sign() > 0
    assert fm16.certify_monotonic()
    inner = Interval(QSqrt2.coerce(Fraction(1, 100)), QSqrt2.coerce(Fraction(99, 100)))
    assert certify_positive(fm16.derivative_interval, inner)


def test_targets_in_range(fm16):
    one = QSqrt2.coerce(1)
    for s in fm16.steps:
        assert QSqrt2.coerce(0) < QSqrt2.coerce(s.a) < one
        assert INV_SQRT2 < QSqrt2.coerce(s.q) < one
        assert QSqrt2.coerce(0) < s.b < one


def test_rationality_link(fm8):
    link = RationalityLink(fm8)
    cert = certify_rationality_link(link)
    assert cert["ok"] and cert["monotone"] and cert["decay"] and cert["order_isomorphism"]
    assert cert["failures"] == []
    assert cert["axioms_used"] == ["exp-transcendence"]


def test_parse_grid_deterministic():
    g1 = parse_grid("zero,rationals:10,negatives:5,quadratic:3", seed=0)
    g2 = parse_grid("zero,rationals:10,negatives:5,quadratic:3", seed=0)
    assert g1 == g2
    assert len(g1) == 19
    assert QSqrt2.coerce(0) in g1
    assert sum(1 for x in g1 if x.sign() < 0) >= 5
    assert any(not x.is_rational for x in g1)
    with pytest.raises(ValueError):
        parse_grid("bogus:3")


def test_abs_identity_exact(fm8):
    link = RationalityLink(fm8)
    result = verify_abs_identity(link, grid="zero,rationals:100,negatives:50,quadratic:20")
    assert result["ok"]
    assert result["failures"] == []
    assert result["checked"] >= 171
    # also directly: the identity expression evaluates to |x| at matched points
    e = abs_identity_expr(link)
    for s in fm8.steps[:4]:
        assert eval_exact(e, s.a) == QSqrt2.coerce(abs(s.a))
        assert eval_exact(e, -s.a) == QSqrt2.coerce(abs(s.a))
