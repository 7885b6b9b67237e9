"""Constructive back-and-forth matching of rational points.

Builds a strictly increasing smooth-by-certificate polynomial-series map
f: [0,1] -> [0,1] with f(0) = 0, f(1) = 1 that matches an initial
segment of the rationals in (0,1) with points b = w^{-1}(q), where
w(t) = ((sqrt2-1)/sqrt2) t + 1/sqrt2 and q ranges over the rationals in
(1/sqrt2, 1).  Matching a to b makes w(f(a)) = q exactly rational, which
is what the rationality link between the bump function H1 and its
composite H2 = w(f(H1)) needs.

Everything is exact: corrections live in Q(sqrt2), monotonicity is
certified both by an a-priori derivative budget and by interval
arithmetic, and every matched pair is replayable as a field identity.

    f_n = f_{n-1} + c_n * p_n,   p_n(t) = t (t-1) prod (t - a_k)

where the roots are 0, 1 and all previously matched rational points, so
earlier matches are never disturbed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

from .expr import (
    App,
    Const,
    Expr,
    ONE_E,
    W_OFFSET,
    W_SLOPE,
    X,
    eval_tagged,
    make_prod,
    make_sum,
    make_neg,
    to_text,
)
from .intervals import Interval, certify_positive, poly_product_derivative
from .numbers import INV_SQRT2, QSqrt2, Tag, TaggedReal, floor_qsqrt2

# ---------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------


def enumerate_unit_rationals() -> Iterator[Fraction]:
    """The rationals in (0,1), breadth-first by denominator then numerator."""
    den = 2
    while True:
        for num in range(1, den):
            if math.gcd(num, den) == 1:
                yield Fraction(num, den)
        den += 1


def w_value(t: QSqrt2) -> QSqrt2:
    return W_SLOPE * QSqrt2.coerce(t) + W_OFFSET


def w_inverse(q) -> QSqrt2:
    """Exact inverse of w at a rational: w^{-1}(q) = (2q-1) + (q-1) sqrt2."""
    q = Fraction(q)
    return QSqrt2(2 * q - 1, q - 1)


def target_rationals() -> Iterator[Fraction]:
    """The rationals q in (1/sqrt2, 1), in the same breadth-first order."""
    one = QSqrt2.coerce(1)
    for q in enumerate_unit_rationals():
        qq = QSqrt2.coerce(q)
        if INV_SQRT2 < qq < one:
            yield q


# ---------------------------------------------------------------------
# Simplest rational in an open interval (Stern-Brocot descent)
# ---------------------------------------------------------------------


def simplest_in_interval(lo: QSqrt2, hi: QSqrt2) -> Fraction:
    """The rational with the smallest denominator (then smallest absolute
    numerator) in the open interval (lo, hi) with exact endpoints."""
    lo = QSqrt2.coerce(lo)
    hi = QSqrt2.coerce(hi)
    if not lo < hi:
        raise ValueError("empty open interval")
    if lo.sign() < 0 and hi.sign() > 0:
        return Fraction(0)
    if hi.sign() <= 0:
        return -simplest_in_interval(-hi, -lo)
    # now 0 <= lo < hi
    fl = floor_qsqrt2(lo)
    candidate = QSqrt2.coerce(fl + 1)
    if candidate < hi:
        return Fraction(fl + 1)
    # both endpoints in [fl, fl+1): x = fl + 1/y with y in (1/(hi-fl), 1/(lo-fl))
    flq = QSqrt2.coerce(fl)
    if lo == flq:
        # lower endpoint is the integer itself: y ranges over (1/(hi-fl), inf)
        inner = Fraction(floor_qsqrt2((hi - flq).inverse()) + 1)
    else:
        inner = simplest_in_interval((hi - flq).inverse(), (lo - flq).inverse())
    return fl + 1 / inner


# ---------------------------------------------------------------------
# The matching map
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class MatchStep:
    index: int
    a: Fraction
    q: Fraction
    b: QSqrt2  # w^{-1}(q), the exact matched value f(a)
    c: QSqrt2  # correction coefficient
    roots: tuple  # roots of the correction polynomial, all rational
    direction: str  # "forward" (a chosen first) or "backward" (q chosen first)


@dataclass(eq=False)
class FranklinMap:
    """f(t) = t + sum_n c_n * prod_k (t - r_{n,k}), with exact data."""

    steps: tuple = ()
    _float_cache: Optional[list] = field(default=None, repr=False)

    # -- evaluation ----------------------------------------------------

    def eval_exact(self, t) -> QSqrt2:
        t = QSqrt2.coerce(t)
        out = t
        for s in self.steps:
            p = QSqrt2.coerce(1)
            for r in s.roots:
                p = p * (t - QSqrt2.coerce(r))
            out = out + s.c * p
        return out

    def eval_float(self, t: float) -> float:
        if self._float_cache is None:
            self._float_cache = [
                (float(s.c), [float(r) for r in s.roots]) for s in self.steps
            ]
        out = t
        for c, roots in self._float_cache:
            p = 1.0
            for r in roots:
                p *= t - r
            out += c * p
        return out

    def derivative_interval(self, iv: Interval) -> Interval:
        out = Interval.point(1)
        for s in self.steps:
            roots = [QSqrt2.coerce(r) for r in s.roots]
            out = out + poly_product_derivative(roots, iv).scale(s.c)
        return out

    def derivative_expr(self, arg: Expr) -> Expr:
        """f'(arg) as an expression tree (for chain-rule use)."""
        terms = [ONE_E]
        for s in self.steps:
            for k in range(len(s.roots)):
                factors = [Const(s.c)]
                for j, r in enumerate(s.roots):
                    if j != k:
                        factors.append(make_sum([arg, Const(-QSqrt2.coerce(r))]))
                terms.append(make_prod(factors))
        return make_sum(terms)

    # -- certified properties -------------------------------------------

    @property
    def matched(self) -> list:
        return [(s.a, s.q, s.b) for s in self.steps]

    def matched_rationals(self) -> list:
        return [s.a for s in self.steps]

    def matched_targets(self) -> list:
        return [s.q for s in self.steps]

    def check_matches(self) -> bool:
        """Replay every match as a field identity: f(a) = w^{-1}(q)."""
        for s in self.steps:
            if self.eval_exact(s.a) != s.b:
                return False
            if w_value(s.b) != QSqrt2.coerce(s.q):
                return False
        return True

    def check_decay(self) -> bool:
        """|c_n| <= 2^{-n} for every step."""
        for s in self.steps:
            if abs(s.c) > QSqrt2.coerce(Fraction(1, 2 ** s.index)):
                return False
        return True

    def derivative_budget(self) -> QSqrt2:
        """Exact lower bound for f' on [0,1]: 1 - sum |c_n| * deg(p_n).

        On [0,1] every factor |t - r| is at most 1, so |p_n'| is at most
        the number of roots of p_n.
        """
        out = QSqrt2.coerce(1)
        for s in self.steps:
            out = out - abs(s.c) * QSqrt2.coerce(len(s.roots))
        return out

    def certify_monotonic(self, max_depth: int = 40) -> bool:
        """Strict monotonicity on [0,1], certified twice over: by the
        exact derivative budget and by adaptive interval bisection."""
        if self.derivative_budget().sign() <= 0:
            return False
        iv = Interval(QSqrt2.coerce(0), QSqrt2.coerce(1))
        return certify_positive(self.derivative_interval, iv, max_depth)

    def check_order_isomorphism(self) -> bool:
        """Matched pairs in the same order on both sides."""
        pairs = sorted((s.a, s.b) for s in self.steps)
        bs = [b for _, b in pairs]
        return all(bs[i] < bs[i + 1] for i in range(len(bs) - 1))

    def to_dict(self) -> dict:
        return {
            "steps": [
                {
                    "index": s.index,
                    "direction": s.direction,
                    "a": str(s.a),
                    "q": str(s.q),
                    "b": str(s.b),
                    "c": str(s.c),
                    "degree": len(s.roots),
                }
                for s in self.steps
            ],
            "derivative_lower_bound": str(self.derivative_budget()),
        }


class ConstructionError(RuntimeError):
    pass


def _current_roots(steps) -> list:
    roots = [Fraction(0), Fraction(1)]
    roots.extend(s.a for s in steps)
    return roots


def _neighbors(steps, a: Fraction) -> tuple:
    """The matched/anchor points bracketing a, with their exact images."""
    pts = [(Fraction(0), QSqrt2.coerce(0)), (Fraction(1), QSqrt2.coerce(1))]
    pts.extend((s.a, s.b) for s in steps)
    left = max((p for p in pts if p[0] < a), key=lambda p: p[0])
    right = min((p for p in pts if p[0] > a), key=lambda p: p[0])
    return left, right


def build_franklin(n_steps: int) -> FranklinMap:
    """Run ``n_steps`` rounds of the back-and-forth construction.

    Odd rounds match the next unmatched rational a (breadth-first order)
    to the simplest admissible target; even rounds take the next
    unmatched target q and locate a rational preimage by exact bisection.
    Every round keeps |c_n| <= 2^{-n} and spends at most half of the
    remaining derivative budget, so f stays certifiably increasing.
    """
    steps: list = []
    fm = FranklinMap(())
    budget = QSqrt2.coerce(1)  # certified lower bound for f' so far
    a_stream = enumerate_unit_rationals()
    q_stream = target_rationals()
    two = QSqrt2.coerce(2)

    for n in range(1, n_steps + 1):
        fm = FranklinMap(tuple(steps))
        roots = _current_roots(steps)
        deg = len(roots)
        matched_a = set(fm.matched_rationals())
        matched_q = set(fm.matched_targets())
        cap = QSqrt2.coerce(Fraction(1, 2 ** n))
        spend = budget * (two * QSqrt2.coerce(deg)).inverse()
        bound = cap if cap < spend else spend

        if n % 2 == 1:
            a = next(x for x in a_stream if x not in matched_a)
            v = fm.eval_exact(a)
            pa = QSqrt2.coerce(1)
            for r in roots:
                pa = pa * QSqrt2.coerce(a - r)
            delta = abs(pa) * bound
            (aL, bL), (aR, bR) = _neighbors(steps, a)
            lo = max(bL, v - delta)
            hi = min(bR, v + delta)
            q_lo = max(w_value(lo), INV_SQRT2)
            q_hi = min(w_value(hi), QSqrt2.coerce(1))
            if not q_lo < q_hi:
                raise ConstructionError(f"step {n}: empty target window")
            q = simplest_in_interval(q_lo, q_hi)
            while q in matched_q:
                q = simplest_in_interval(q_lo, QSqrt2.coerce(q))
            b = w_inverse(q)
            c = (b - v) * pa.inverse()
            direction = "forward"
        else:
            q = next(x for x in q_stream if x not in matched_q)
            b = w_inverse(q)
            # locate the bracket of the preimage among matched points
            pts = sorted(
                [(Fraction(0), QSqrt2.coerce(0)), (Fraction(1), QSqrt2.coerce(1))]
                + [(s.a, s.b) for s in steps],
                key=lambda p: p[0],
            )
            lo_a = hi_a = None
            for (u, fu), (v_, fv) in zip(pts, pts[1:]):
                if fu < b < fv:
                    lo_a, hi_a = u, v_
                    break
            if lo_a is None:
                raise ConstructionError(f"step {n}: target {q} outside the matched range")
            a = None
            lo_f, hi_f = Fraction(lo_a), Fraction(hi_a)
            for _ in range(200):
                cand = simplest_in_interval(QSqrt2.coerce(lo_f), QSqrt2.coerce(hi_f))
                if cand not in matched_a:
                    pa = QSqrt2.coerce(1)
                    for r in roots:
                        pa = pa * QSqrt2.coerce(cand - r)
                    if abs(b - fm.eval_exact(cand)) <= abs(pa) * bound:
                        a = cand
                        break
                mid = (lo_f + hi_f) / 2
                if fm.eval_exact(mid) < b:
                    lo_f = mid
                else:
                    hi_f = mid
            if a is None:
                raise ConstructionError(f"step {n}: no admissible preimage found")
            c = (b - fm.eval_exact(a)) * pa.inverse()
            direction = "backward"

        if abs(c) > bound:
            raise ConstructionError(f"step {n}: correction exceeds its bound")
        budget = budget - abs(c) * QSqrt2.coerce(deg)
        if budget.sign() <= 0:
            raise ConstructionError(f"step {n}: derivative budget exhausted")
        steps.append(MatchStep(n, a, q, b, c, tuple(roots), direction))

    return FranklinMap(tuple(steps))


# ---------------------------------------------------------------------
# The rationality link and the |x| identity
# ---------------------------------------------------------------------

AXIOM_EXP_TRANSCENDENCE = "exp-transcendence"


def h1_expr() -> Expr:
    return App("H1", X)


def h2_expr(fm: FranklinMap) -> Expr:
    return App("barGamma", App("H1", X), fm)


@dataclass(eq=False)
class RationalityLink:
    """Certificate that deltaQ(H1(x)) = deltaQ(H2(x)) for x > 0, with
    both inner maps constant (0 and 1/sqrt2) for x <= 0."""

    franklin: FranklinMap
    expr_a: Expr = field(init=False)
    expr_b: Expr = field(init=False)
    region: str = "x>0"
    complement_region: str = "x<=0"
    axioms_used: tuple = (AXIOM_EXP_TRANSCENDENCE,)

    def __post_init__(self):
        self.expr_a = h1_expr()
        self.expr_b = h2_expr(self.franklin)

    @property
    def constant_branch(self) -> dict:
        return {self.expr_a: QSqrt2.coerce(0), self.expr_b: INV_SQRT2}


def certify_rationality_link(link: RationalityLink, n_rational_samples: int = 25) -> dict:
    """Replay the three clauses of the link with exact arithmetic.

    (i) on x <= 0 both inner maps are the stated constants;
    (ii) at every matched point a the composite w(f(a)) is exactly the
         rational target, so both indicator values are 0 there;
    (iii) at rational x > 0 the value H1(x) = exp(-1/x^2) is
          transcendental (exponential of a nonzero rational), and a
          nonconstant polynomial-then-affine image of a transcendental
          number is transcendental, so both indicator values are 1.
    """
    fm = link.franklin
    failures = []

    # (i) constants on the complement region
    for x in (Fraction(0), Fraction(-1), Fraction(-7, 3), QSqrt2(Fraction(-1), Fraction(-1))):
        va = eval_tagged(link.expr_a, TaggedReal.exact(x))
        vb = eval_tagged(link.expr_b, TaggedReal.exact(x))
        if not (va.is_exact and va.value.is_zero):
            failures.append(f"H1({x}) != 0")
        if not (vb.is_exact and vb.value == INV_SQRT2):
            failures.append(f"H2-composite({x}) != 1/sqrt2")

    # (ii) matched points: exact field identities
    matched_ok = fm.check_matches()
    if not matched_ok:
        failures.append("matched-pair replay failed")
    for a, q, b in fm.matched:
        g = eval_tagged(App("barGamma", Const(QSqrt2.coerce(a)), fm), TaggedReal.exact(0))
        if not (g.is_exact and g.value == QSqrt2.coerce(q)):
            failures.append(f"w(f({a})) != {q}")

    # (iii) transcendence clause on rational x > 0
    rng = random.Random(0)
    for _ in range(n_rational_samples):
        x = Fraction(rng.randint(1, 50), rng.randint(1, 50))
        va = eval_tagged(link.expr_a, TaggedReal.exact(x))
        vb = eval_tagged(link.expr_b, TaggedReal.exact(x))
        if not (va.tag == Tag.IRRATIONAL and va.transcendental):
            failures.append(f"H1({x}) not certified transcendental")
        if not (vb.tag == Tag.IRRATIONAL and vb.transcendental):
            failures.append(f"H2-composite({x}) not certified transcendental")

    return {
        "ok": not failures,
        "failures": failures,
        "matched_pairs": [(str(a), str(q)) for a, q, _ in fm.matched],
        "monotone": fm.certify_monotonic(),
        "decay": fm.check_decay(),
        "order_isomorphism": fm.check_order_isomorphism(),
        "axioms_used": list(link.axioms_used),
    }


def abs_identity_expr(link: RationalityLink) -> Expr:
    """2x deltaQ(H1(x)) - 2x deltaQ(H2(x)) + x, pointwise equal to |x|."""
    da = App("deltaQ", link.expr_a)
    db = App("deltaQ", link.expr_b)
    two_x = make_prod([Const(QSqrt2.coerce(2)), X])
    return make_sum([make_prod([two_x, da]), make_neg(make_prod([two_x, db])), X])


def parse_grid(spec: str, seed: int = 0) -> list:
    """Grid specification "rationals:N,negatives:M,quadratic:K" -> exact
    sample points, deterministic for a fixed seed."""
    rng = random.Random(seed)
    pts: list = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, count = part.partition(":")
        count = int(count) if count else 10
        if name == "rationals":
            for _ in range(count):
                pts.append(QSqrt2.coerce(Fraction(rng.randint(1, 1000), rng.randint(1, 1000))))
        elif name == "negatives":
            for _ in range(count):
                pts.append(QSqrt2.coerce(Fraction(-rng.randint(1, 1000), rng.randint(1, 1000))))
        elif name == "quadratic":
            for _ in range(count):
                # sqrt2-multiples: x = m*sqrt2/k has rational square
                pts.append(QSqrt2(Fraction(0), Fraction(rng.randint(1, 30), rng.randint(1, 30))))
        elif name == "zero":
            pts.append(QSqrt2.coerce(0))
        else:
            raise ValueError(f"unknown grid family {name!r}")
    return pts


def verify_abs_identity(link: RationalityLink, grid: str = "zero,rationals:200,negatives:100,quadratic:50") -> dict:
    """Check 2x dQ(H1) - 2x dQ(H2) + x = |x| exactly on the whole grid.

    Every grid point has a decided rationality pattern, so each side
    evaluates to a single exact value and the comparison is equality in
    Q(sqrt2), not a tolerance.
    """
    expr = abs_identity_expr(link)
    failures = []
    checked = 0
    for x in parse_grid(grid):
        lhs = eval_tagged(expr, TaggedReal.exact(x))
        if isinstance(lhs, tuple) or not lhs.is_exact:
            failures.append(f"indeterminate at {x}")
            continue
        if lhs.value != abs(x):
            failures.append(f"mismatch at {x}: {lhs.value} != {abs(x)}")
        checked += 1
    # symbolic check at matched points: if H1 took a matched value a at
    # some x > 0, both indicators would be 0 and the identity would read
    # x = |x|, which holds on the region.
    symbolic = all(
        eval_tagged(App("deltaQ", Const(QSqrt2.coerce(a))), TaggedReal.exact(0)).value.is_zero
        and eval_tagged(App("deltaQ", Const(QSqrt2.coerce(q))), TaggedReal.exact(0)).value.is_zero
        for a, q, _ in link.franklin.matched
    )
    return {
        "ok": not failures and symbolic,
        "checked": checked,
        "failures": failures[:10],
        "matched_branch_consistent": symbolic,
        "expression": to_text(expr),
    }
