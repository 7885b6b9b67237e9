"""Expression trees for real functions of one variable.

The tree language has the smooth primitives (constants from Q(sqrt2), the
variable, sums, products, integer powers, exp, the affine map w, the
analytic extension barGamma of a constructed matching map) and the exotic
primitives abs, deltaQ (indicator of the irrationals) and the formal axiom
function gamma.  Trees are canonical: constants fold, sums and products
flatten, and negation is absorbed into rational coefficients, so that
printing and re-parsing is the identity on trees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .numbers import (
    INV_SQRT2,
    DomainError,
    QSqrt2,
    Tag,
    TaggedReal,
    add_tagged,
    exp_tagged,
    mul_tagged,
    neg_tagged,
    sqrt_tagged,
)

# The affine map w(t) = ((sqrt2-1)/sqrt2) t + 1/sqrt2 used throughout the
# matching construction; its slope and offset are exact field elements.
W_SLOPE = QSqrt2(Fraction(1), Fraction(-1, 2))
W_OFFSET = INV_SQRT2


class ExprError(ValueError):
    pass


class NotDifferentiableError(ExprError):
    """A non-smooth primitive met outside a one-sided derivative request."""


# ---------------------------------------------------------------------
# Nodes
# ---------------------------------------------------------------------


class Expr:
    """Base class; all nodes are immutable and hashable."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: QSqrt2

    def __post_init__(self):
        if not isinstance(self.value, QSqrt2):
            object.__setattr__(self, "value", QSqrt2.coerce(self.value))


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple


@dataclass(frozen=True)
class Prod(Expr):
    factors: tuple


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class App(Expr):
    name: str
    arg: Expr
    ref: object = field(default=None, compare=True)


FUNCTION_NAMES = ("abs", "exp", "sqrt", "deltaQ", "H1", "w", "barGamma", "gamma")

X = Var()
ZERO_E = Const(QSqrt2())
ONE_E = Const(QSqrt2.coerce(1))


def const(v) -> Const:
    return Const(QSqrt2.coerce(v))


# ---------------------------------------------------------------------
# Canonicalizing constructors
# ---------------------------------------------------------------------


def make_sum(terms: Iterable[Expr]) -> Expr:
    flat: list[Expr] = []
    acc = QSqrt2()
    for t in terms:
        if isinstance(t, Sum):
            inner = list(t.terms)
        else:
            inner = [t]
        for u in inner:
            if isinstance(u, Const):
                acc = acc + u.value
            else:
                flat.append(u)
    # merge syntactically equal non-const parts: c1*S + c2*S -> (c1+c2)*S
    merged: list[tuple[QSqrt2, Expr]] = []
    for u in flat:
        c, core = _split_coefficient(u)
        for i, (c0, core0) in enumerate(merged):
            if core0 == core:
                merged[i] = (c0 + c, core0)
                break
        else:
            merged.append((c, core))
    out = [make_prod([Const(c), core]) for c, core in merged if not c.is_zero]
    if not acc.is_zero or not out:
        out.append(Const(acc))
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def make_prod(factors: Iterable[Expr]) -> Expr:
    flat: list[Expr] = []
    coef = QSqrt2.coerce(1)
    for f in factors:
        if isinstance(f, Prod):
            inner = list(f.factors)
        else:
            inner = [f]
        for u in inner:
            if isinstance(u, Const):
                coef = coef * u.value
            else:
                flat.append(u)
    if coef.is_zero:
        return ZERO_E
    if not flat:
        return Const(coef)
    if coef == QSqrt2.coerce(1):
        return flat[0] if len(flat) == 1 else Prod(tuple(flat))
    return Prod(tuple([Const(coef)] + flat))


def make_neg(e: Expr) -> Expr:
    return make_prod([Const(QSqrt2.coerce(-1)), e])


def make_pow(base: Expr, k: int) -> Expr:
    if k < 1:
        raise ExprError("powers must be positive integers")
    if k == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value ** k)
    if isinstance(base, Pow):
        return Pow(base.base, base.exponent * k)
    return Pow(base, k)


def make_app(name: str, arg: Expr, ref: object = None) -> Expr:
    if name not in FUNCTION_NAMES:
        raise ExprError(f"unknown function {name!r}")
    return App(name, arg, ref)


def _split_coefficient(e: Expr) -> tuple[QSqrt2, Expr]:
    """Split e as coefficient * core, with a Const-free core."""
    if isinstance(e, Const):
        return e.value, ONE_E
    if isinstance(e, Prod) and isinstance(e.factors[0], Const):
        rest = e.factors[1:]
        core = rest[0] if len(rest) == 1 else Prod(rest)
        return e.factors[0].value, core
    return QSqrt2.coerce(1), e


def expr_sub(a: Expr, b: Expr) -> Expr:
    return make_sum([a, make_neg(b)])


def substitute(e: Expr, mapping: dict) -> Expr:
    """Structural substitution (applied pre-order), re-canonicalized."""
    if e in mapping:
        return mapping[e]
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Sum):
        return make_sum([substitute(t, mapping) for t in e.terms])
    if isinstance(e, Prod):
        return make_prod([substitute(f, mapping) for f in e.factors])
    if isinstance(e, Pow):
        return make_pow(substitute(e.base, mapping), e.exponent)
    if isinstance(e, App):
        return App(e.name, substitute(e.arg, mapping), e.ref)
    raise ExprError(f"unknown node {e!r}")


def compose(e: Expr, inner: Expr) -> Expr:
    return substitute(e, {X: inner})


# ---------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------
#
# Grammar (ASCII):
#   expr   := term (('+'|'-') term)*
#   term   := factor ('*' factor)*
#   factor := ['-'] atom ['^' posint]
#   atom   := rational | 'sqrt2' | 'x' | fn '(' expr ')' | '(' expr ')'
# Rationals are written p/q or p.


class ParseError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if c.isalpha():
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        if c in "+-*/^()":
            tokens.append((c, c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens, bar_gamma_ref=None):
        self.tokens = tokens
        self.pos = 0
        self.bar_gamma_ref = bar_gamma_ref

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.pos += 1
        return tok

    def parse_expr(self) -> Expr:
        terms = [self.parse_term()]
        while self.peek()[0] in "+-":
            op = self.take()[0]
            t = self.parse_term()
            terms.append(t if op == "+" else make_neg(t))
        return make_sum(terms)

    def parse_term(self) -> Expr:
        factors = [self.parse_factor()]
        while self.peek()[0] == "*":
            self.take()
            factors.append(self.parse_factor())
        return make_prod(factors)

    def parse_factor(self) -> Expr:
        neg = False
        if self.peek()[0] == "-":
            self.take()
            neg = True
        e = self.parse_atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.take("int")
            k = int(tok[1])
            if k < 1:
                raise ParseError("exponent must be a positive integer", tok[2])
            e = make_pow(e, k)
        return make_neg(e) if neg else e

    def parse_atom(self) -> Expr:
        kind, text, at = self.peek()
        if kind == "int":
            self.take()
            num = int(text)
            if self.peek()[0] == "/":
                self.take()
                den = int(self.take("int")[1])
                if den == 0:
                    raise ParseError("zero denominator", at)
                return const(Fraction(num, den))
            return const(num)
        if kind == "name":
            self.take()
            if text == "x":
                return X
            if text == "sqrt2":
                return Const(QSqrt2.sqrt2())
            if text in FUNCTION_NAMES:
                self.take("(")
                arg = self.parse_expr()
                self.take(")")
                ref = self.bar_gamma_ref if text == "barGamma" else None
                return make_app(text, arg, ref)
            raise ParseError(f"unknown name {text!r}", at)
        if kind == "(":
            self.take()
            e = self.parse_expr()
            self.take(")")
            return e
        raise ParseError(f"unexpected token {text!r}", at)


def parse_expr(text: str, bar_gamma_ref=None) -> Expr:
    parser = _Parser(_tokenize(text), bar_gamma_ref)
    e = parser.parse_expr()
    parser.take("end")
    return e


# ---------------------------------------------------------------------
# Printer (inverse of the parser on canonical trees)
# ---------------------------------------------------------------------


def _const_text(v: QSqrt2, atomic: bool) -> str:
    s = str(v)
    if v.is_rational:
        return s
    if v.a == 0 and v.b == 1:
        return s  # bare sqrt2 is an atom
    return f"({s})" if atomic else s


def _factor_text(e: Expr) -> str:
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Const):
        return _const_text(e.value, atomic=True)
    if isinstance(e, App):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Pow):
        base = e.base
        if isinstance(base, (Var, App)):
            return f"{_factor_text(base)}^{e.exponent}"
        return f"({to_text(base)})^{e.exponent}"
    return f"({to_text(e)})"


def _term_text(e: Expr) -> tuple[bool, str]:
    """Return (negative, body) for use at sum positions."""
    coef, core = _split_coefficient(e)
    negative = coef.sign() < 0
    if negative:
        coef = -coef
    parts = []
    if core == ONE_E:
        # parenthesize mixed constants so a leading '-' binds to the whole
        return negative, _const_text(coef, atomic=True)
    if coef != QSqrt2.coerce(1):
        parts.append(_const_text(coef, atomic=True))
    if isinstance(core, Prod):
        parts.extend(_factor_text(f) for f in core.factors)
    else:
        parts.append(_factor_text(core))
    return negative, "*".join(parts)


def to_text(e: Expr) -> str:
    terms = e.terms if isinstance(e, Sum) else (e,)
    out = []
    for i, t in enumerate(terms):
        negative, body = _term_text(t)
        if i == 0:
            out.append(("-" if negative else "") + body)
        else:
            out.append(("-" if negative else "+") + body)
    return "".join(out)


# ---------------------------------------------------------------------
# Tagged evaluation
# ---------------------------------------------------------------------
#
# Evaluation returns a tuple of candidate values.  A singleton means the
# value is determined; deltaQ at an Unknown tag yields the indeterminate
# pair {0, 1}, which propagates as a small candidate set.

_MAX_CANDIDATES = 4

Candidates = tuple


def _dedupe(cands: Sequence[TaggedReal]) -> Candidates:
    seen = []
    for c in cands:
        if not any(_same(c, s) for s in seen):
            seen.append(c)
    if len(seen) > _MAX_CANDIDATES:
        return (TaggedReal.opaque(),)
    return tuple(seen)


def _same(a: TaggedReal, b: TaggedReal) -> bool:
    if a.is_exact and b.is_exact:
        return a.value == b.value
    return a.value == b.value and a.tag == b.tag and a.transcendental == b.transcendental


def _combine(xs: Candidates, ys: Candidates, op) -> Candidates:
    return _dedupe([op(x, y) for x in xs for y in ys])


def _map(xs: Candidates, fn) -> Candidates:
    out = []
    for x in xs:
        r = fn(x)
        out.extend(r if isinstance(r, tuple) else (r,))
    return _dedupe(out)


def _abs_tagged(x: TaggedReal) -> TaggedReal:
    if x.is_exact:
        return TaggedReal.exact(abs(x.value))
    value = None if x.value is None else abs(x.value)
    return TaggedReal(value, x.tag, x.transcendental)


def _delta_tagged(x: TaggedReal) -> Candidates:
    if x.tag == Tag.RATIONAL:
        return (TaggedReal.exact(0),)
    if x.tag == Tag.IRRATIONAL:
        return (TaggedReal.exact(1),)
    return (TaggedReal.exact(0), TaggedReal.exact(1))


def _h1_tagged(x: TaggedReal) -> TaggedReal:
    s = x.sign()
    if s is not None and s <= 0:
        return TaggedReal.exact(0)
    if s is not None:  # exact positive
        sq = x.value * x.value
        if sq.is_rational:
            return exp_tagged(TaggedReal.exact(-sq.inverse()))
        fx = x.float_value()
        import math

        return TaggedReal.approx(math.exp(-1.0 / (fx * fx)))
    if x.value is None:
        return TaggedReal.opaque()
    import math

    fx = float(x.value)
    if fx <= 0:
        return TaggedReal.approx(0.0)
    return TaggedReal.approx(math.exp(-1.0 / (fx * fx)))


def _w_tagged(x: TaggedReal) -> TaggedReal:
    return add_tagged(mul_tagged(TaggedReal.exact(W_SLOPE), x), TaggedReal.exact(W_OFFSET))


def _bar_gamma_tagged(x: TaggedReal, ref) -> TaggedReal:
    if ref is None:
        return TaggedReal.opaque()
    if x.is_exact:
        if x.value.is_zero:
            return TaggedReal.exact(INV_SQRT2)
        return TaggedReal.exact(W_SLOPE * ref.eval_exact(x.value) + W_OFFSET)
    if x.transcendental:
        # A nonconstant polynomial with coefficients in Q(sqrt2) maps a
        # transcendental number to a transcendental number, and the affine
        # map w preserves that.
        fv = x.float_value()
        approx = None if fv is None else float(W_SLOPE) * ref.eval_float(fv) + float(W_OFFSET)
        return TaggedReal(approx, Tag.IRRATIONAL, transcendental=True)
    fv = x.float_value()
    if fv is None:
        return TaggedReal.opaque()
    return TaggedReal.approx(float(W_SLOPE) * ref.eval_float(fv) + float(W_OFFSET))


def eval_candidates(e: Expr, x: TaggedReal) -> Candidates:
    if isinstance(e, Const):
        return (TaggedReal.exact(e.value),)
    if isinstance(e, Var):
        return (x,)
    if isinstance(e, Sum):
        out = (TaggedReal.exact(0),)
        for t in e.terms:
            out = _combine(out, eval_candidates(t, x), add_tagged)
        return out
    if isinstance(e, Prod):
        out = (TaggedReal.exact(1),)
        for f in e.factors:
            out = _combine(out, eval_candidates(f, x), mul_tagged)
        return out
    if isinstance(e, Pow):
        base = eval_candidates(e.base, x)
        out = (TaggedReal.exact(1),)
        for _ in range(e.exponent):
            out = _combine(out, base, mul_tagged)
        return out
    if isinstance(e, App):
        arg = eval_candidates(e.arg, x)
        if e.name == "abs":
            return _map(arg, _abs_tagged)
        if e.name == "exp":
            return _map(arg, exp_tagged)
        if e.name == "sqrt":
            return _map(arg, sqrt_tagged)
        if e.name == "deltaQ":
            return _map(arg, _delta_tagged)
        if e.name == "H1":
            return _map(arg, _h1_tagged)
        if e.name == "w":
            return _map(arg, _w_tagged)
        if e.name == "barGamma":
            return _map(arg, lambda t: _bar_gamma_tagged(t, e.ref))
        if e.name == "gamma":
            return (TaggedReal.opaque(),)
    raise ExprError(f"cannot evaluate {e!r}")


def eval_tagged(e: Expr, x: TaggedReal):
    """Evaluate; returns a TaggedReal, or a tuple of candidates when the
    value is indeterminate (deltaQ at an Unknown tag)."""
    cands = eval_candidates(e, x)
    return cands[0] if len(cands) == 1 else cands


def eval_exact(e: Expr, x) -> QSqrt2:
    """Evaluate at an exact point, demanding an exact single value."""
    r = eval_tagged(e, TaggedReal.exact(x))
    if isinstance(r, tuple) or not r.is_exact:
        raise ExprError(f"no exact value for {to_text(e)} at {x}")
    return r.value


# ---------------------------------------------------------------------
# Differentiation (smooth fragment) and one-sided derivatives
# ---------------------------------------------------------------------

NONSMOOTH_PRIMITIVES = ("abs", "deltaQ", "gamma")


def is_smooth_expr(e: Expr) -> bool:
    """True when the tree uses smooth primitives only.

    sqrt is not counted smooth: it fails to be so at the boundary of its
    domain and is only ever certified inside recognized patterns.
    """
    if isinstance(e, (Const, Var)):
        return True
    if isinstance(e, Sum):
        return all(is_smooth_expr(t) for t in e.terms)
    if isinstance(e, Prod):
        return all(is_smooth_expr(f) for f in e.factors)
    if isinstance(e, Pow):
        return is_smooth_expr(e.base)
    if isinstance(e, App):
        if e.name in NONSMOOTH_PRIMITIVES or e.name == "sqrt":
            return False
        return is_smooth_expr(e.arg)
    return False


def differentiate(e: Expr) -> Expr:
    """Exact symbolic derivative on the smooth fragment."""
    if isinstance(e, Const):
        return ZERO_E
    if isinstance(e, Var):
        return ONE_E
    if isinstance(e, Sum):
        return make_sum([differentiate(t) for t in e.terms])
    if isinstance(e, Prod):
        terms = []
        for i in range(len(e.factors)):
            fs = list(e.factors)
            fs[i] = differentiate(fs[i])
            terms.append(make_prod(fs))
        return make_sum(terms)
    if isinstance(e, Pow):
        return make_prod(
            [const(e.exponent), make_pow(e.base, e.exponent - 1) if e.exponent > 1 else ONE_E,
             differentiate(e.base)]
        )
    if isinstance(e, App):
        inner = differentiate(e.arg)
        if e.name == "exp":
            return make_prod([e, inner])
        if e.name == "w":
            return make_prod([Const(W_SLOPE), inner])
        if e.name == "barGamma":
            if e.ref is None:
                raise NotDifferentiableError("barGamma without a constructed map")
            dpoly = e.ref.derivative_expr(e.arg)
            return make_prod([Const(W_SLOPE), dpoly, inner])
        if e.name == "H1":
            raise NotDifferentiableError(
                "H1 is smooth but its derivative leaves the expression language; "
                "use one_sided_derivative at specific points"
            )
        if e.name == "sqrt":
            raise NotDifferentiableError("sqrt derivative leaves the expression language")
        raise NotDifferentiableError(f"{e.name} is not a smooth primitive")
    raise ExprError(f"cannot differentiate {e!r}")


def one_sided_derivative(e: Expr, x0, side: int) -> TaggedReal:
    """One-sided derivative at an exact point (side +1 right, -1 left).

    Supports the smooth fragment plus abs/H1 at points where their
    argument vanishes; that is all the witness machinery needs.
    """
    x0 = QSqrt2.coerce(x0)
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    if is_smooth_expr(e):
        try:
            d = differentiate(e)
        except NotDifferentiableError:
            d = None  # smooth but outside the differentiable fragment (H1)
        if d is not None:
            r = eval_tagged(d, TaggedReal.exact(x0))
            if isinstance(r, tuple):
                raise NotDifferentiableError("indeterminate derivative value")
            return r
    if isinstance(e, Sum):
        total = TaggedReal.exact(0)
        for t in e.terms:
            total = add_tagged(total, one_sided_derivative(t, x0, side))
        return total
    coef, core = _split_coefficient(e)
    if coef != QSqrt2.coerce(1):
        return mul_tagged(TaggedReal.exact(coef), one_sided_derivative(core, x0, side))
    if isinstance(e, App) and e.name == "abs" and is_smooth_expr(e.arg):
        v = eval_exact(e.arg, x0)
        du = one_sided_derivative(e.arg, x0, side)
        if v.sign() != 0:
            return mul_tagged(TaggedReal.exact(v.sign()), du)
        # |u| near a zero of u: the sign of u on the chosen side is the
        # sign of side * u'(x0) when u'(x0) != 0.
        if du.is_exact and du.value.sign() != 0:
            return mul_tagged(TaggedReal.exact(side * du.value.sign()), du)
        if du.is_exact and du.value.is_zero:
            return TaggedReal.exact(0)
        raise NotDifferentiableError("cannot decide the sign of the inner map")
    if isinstance(e, App) and e.name == "H1":
        v = eval_exact(e.arg, x0) if is_smooth_expr(e.arg) else None
        if v is not None and v.sign() < 0:
            return TaggedReal.exact(0)
        if v is not None and v.sign() == 0:
            # e^{-1/t^2} is flat at 0: both one-sided derivatives vanish.
            return TaggedReal.exact(0)
        raise NotDifferentiableError("H1 derivative away from the seam is not exact")
    raise NotDifferentiableError(f"one-sided derivative unsupported for {to_text(e)}")


# ---------------------------------------------------------------------
# Exotic-part decomposition
# ---------------------------------------------------------------------

ABS_KIND = "abs"
DELTA_KIND = "delta"
DELTA_SQRT_KIND = "delta_sqrt"
GAMMA_KIND = "gamma"

ATOM_EXPRS = {
    ABS_KIND: App("abs", X),
    DELTA_KIND: App("deltaQ", X),
    DELTA_SQRT_KIND: App("deltaQ", App("sqrt", App("abs", X))),
    GAMMA_KIND: App("gamma", X),
}
_ATOM_BY_EXPR = {v: k for k, v in ATOM_EXPRS.items()}


@dataclass
class ExoticDecomposition:
    """e = sum of coeffs[kind] * atom(kind) + smooth part (+ leftovers)."""

    coeffs: dict
    smooth_terms: list
    leftovers: list

    @property
    def ok(self) -> bool:
        return not self.leftovers

    def coefficient(self, kind: str) -> QSqrt2:
        return self.coeffs.get(kind, QSqrt2())

    @property
    def kinds_present(self) -> frozenset:
        return frozenset(k for k, c in self.coeffs.items() if not c.is_zero)


def decompose_exotic(e: Expr) -> ExoticDecomposition:
    terms = e.terms if isinstance(e, Sum) else (e,)
    coeffs: dict = {}
    smooth_terms: list = []
    leftovers: list = []
    for t in terms:
        c, core = _split_coefficient(t)
        if core in _ATOM_BY_EXPR:
            kind = _ATOM_BY_EXPR[core]
            coeffs[kind] = coeffs.get(kind, QSqrt2()) + c
        elif core == ONE_E or is_smooth_expr(core):
            smooth_terms.append(t)
        else:
            leftovers.append(t)
    return ExoticDecomposition(coeffs, smooth_terms, leftovers)


# ---------------------------------------------------------------------
# Smoothness classification
# ---------------------------------------------------------------------


class Smoothness(str, Enum):
    SMOOTH = "Smooth"
    NONSMOOTH = "NonSmooth"
    UNKNOWN = "Unknown"


@dataclass
class SmoothnessVerdict:
    status: Smoothness
    witness: Optional[dict] = None
    derivation: tuple = ()
    axioms_used: tuple = ()

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "witness": self.witness,
            "derivation": list(self.derivation),
            "axioms_used": list(self.axioms_used),
        }


AXIOM_A = "A"
AXIOM_SQRT_IMPLICATION = "sqrt-implication"


def _delta_factor_split(term: Expr):
    """Split a term into (cofactor expr, deltaQ argument) when the term is
    a product with exactly one deltaQ factor; None otherwise."""
    factors = term.factors if isinstance(term, Prod) else (term,)
    delta_args = [f.arg for f in factors if isinstance(f, App) and f.name == "deltaQ"]
    if len(delta_args) != 1:
        return None
    rest = [f for f in factors if not (isinstance(f, App) and f.name == "deltaQ")]
    cofactor = make_prod(rest) if rest else ONE_E
    if not is_smooth_expr(cofactor):
        return None
    return cofactor, delta_args[0]


@dataclass
class PiecewiseRewrite:
    """Result of cancelling a matched pair of deltaQ terms.

    ``branches`` maps a region label to the expression the input is
    pointwise equal to on that region.
    """

    branches: dict
    axioms_used: tuple
    derivation: tuple


def rewrite_delta_cancellation(e: Expr, link) -> PiecewiseRewrite:
    """Cancel h*deltaQ(A) - h*deltaQ(B) against a certified rationality
    link between A and B.

    On the link region the matched pair contributes zero; on the
    complement both inner maps are constant and the deltaQ factors
    evaluate to exact constants.
    """
    terms = list(e.terms) if isinstance(e, Sum) else [e]
    splits = [(_delta_factor_split(t), i) for i, t in enumerate(terms)]
    pair = None
    exprs = {link.expr_a, link.expr_b}
    for si, i in splits:
        if si is None:
            continue
        for sj, j in splits:
            if sj is None or j <= i:
                continue
            if {si[1], sj[1]} == exprs and si[0] == make_neg(sj[0]):
                pair = (i, j)
                break
        if pair:
            break
    if pair is None:
        # unconditional syntactic cancellation h*d(A) - h*d(A)
        for si, i in splits:
            if si is None:
                continue
            for sj, j in splits:
                if sj is None or j <= i:
                    continue
                if si[1] == sj[1] and si[0] == make_neg(sj[0]):
                    rest = [t for k, t in enumerate(terms) if k not in (i, j)]
                    out = make_sum(rest) if rest else ZERO_E
                    return PiecewiseRewrite(
                        {"all": out}, (), ("syntactic cancellation of identical deltaQ terms",)
                    )
        raise ExprError("no matched deltaQ pair covered by the link")
    i, j = pair
    rest = [t for k, t in enumerate(terms) if k not in (i, j)]
    on_region = make_sum(rest) if rest else ZERO_E
    # complement: each inner map is constant there, so its deltaQ factor
    # is the exact indicator value of that constant
    mapping = {}
    for arg_expr, value in link.constant_branch.items():
        indicator = 0 if QSqrt2.coerce(value).is_rational else 1
        mapping[App("deltaQ", arg_expr)] = const(indicator)
    off_region = make_sum([substitute(t, mapping) for t in terms])
    return PiecewiseRewrite(
        {link.region: on_region, link.complement_region: off_region},
        tuple(link.axioms_used),
        (
            f"matched deltaQ pair cancelled on {link.region} via the rationality link",
            f"constant branch values substituted on {link.complement_region}",
        ),
    )


def classify_smoothness(e: Expr, links=(), axioms: frozenset = frozenset()) -> SmoothnessVerdict:
    """Sound, incomplete three-valued smoothness classification.

    Smooth verdicts carry a derivation; NonSmooth verdicts carry a
    machine-checkable witness; everything else is Unknown.
    """
    if is_smooth_expr(e):
        return SmoothnessVerdict(Smoothness.SMOOTH, derivation=("built from smooth primitives",))

    for link in links:
        try:
            rw = rewrite_delta_cancellation(e, link)
        except ExprError:
            continue
        branch_verdicts = {
            region: classify_smoothness(be, links=(), axioms=axioms)
            for region, be in rw.branches.items()
        }
        if all(v.status == Smoothness.SMOOTH for v in branch_verdicts.values()):
            deriv = rw.derivation + tuple(
                f"branch {region}: {to_text(be)}" for region, be in rw.branches.items()
            )
            return SmoothnessVerdict(
                Smoothness.SMOOTH,
                derivation=deriv,
                axioms_used=tuple(sorted(set(rw.axioms_used))),
            )

    d = decompose_exotic(e)
    if not d.ok:
        return SmoothnessVerdict(
            Smoothness.UNKNOWN,
            derivation=tuple(f"unrecognized exotic term: {to_text(t)}" for t in d.leftovers),
        )
    kinds = d.kinds_present
    if not kinds:
        return SmoothnessVerdict(Smoothness.SMOOTH, derivation=("exotic coefficients all vanish",))

    if GAMMA_KIND in kinds:
        if AXIOM_A not in axioms:
            return SmoothnessVerdict(
                Smoothness.UNKNOWN,
                derivation=("gamma term present and axiom A not assumed",),
            )
        return SmoothnessVerdict(
            Smoothness.NONSMOOTH,
            witness={
                "kind": "axiom-nonsmooth-generator",
                "gamma_coefficient": str(d.coefficient(GAMMA_KIND)),
                "abs_coefficient": str(d.coefficient(ABS_KIND)),
            },
            derivation=(
                "under axiom A the abs- and gamma-parts must separately be smooth, "
                "and gamma itself is not smooth",
            ),
            axioms_used=(AXIOM_A,),
        )

    if DELTA_KIND in kinds or DELTA_SQRT_KIND in kinds:
        cd = d.coefficient(DELTA_KIND)
        cs = d.coefficient(DELTA_SQRT_KIND)
        # Dense-family discontinuity: on rationals with rational square
        # root the delta part is 0; on rationals with irrational root it
        # is cs; on irrationals it is cd + cs.  A smooth function minus a
        # continuous part cannot take different constants on dense sets.
        pts = {
            "rational, rational sqrt (x=4)": QSqrt2.coerce(4),
            "rational, irrational sqrt (x=2)": QSqrt2.coerce(2),
            "irrational (x=sqrt2)": QSqrt2.sqrt2(),
        }
        delta_part = make_sum(
            [make_prod([Const(cd), ATOM_EXPRS[DELTA_KIND]]),
             make_prod([Const(cs), ATOM_EXPRS[DELTA_SQRT_KIND]])]
        )
        values = {label: eval_exact(delta_part, p) for label, p in pts.items()}
        return SmoothnessVerdict(
            Smoothness.NONSMOOTH,
            witness={
                "kind": "dense-discontinuity",
                "delta_part": to_text(delta_part),
                "points": {label: str(p) for label, p in pts.items()},
                "values": {label: str(v) for label, v in values.items()},
            },
            derivation=(
                "the indicator part takes different constant values on dense families",
            ),
        )

    # pure abs obstruction: one-sided derivative mismatch at the kink
    c = d.coefficient(ABS_KIND)
    left = one_sided_derivative(e, QSqrt2(), -1)
    right = one_sided_derivative(e, QSqrt2(), +1)
    return SmoothnessVerdict(
        Smoothness.NONSMOOTH,
        witness={
            "kind": "one-sided-derivative-mismatch",
            "point": "0",
            "left": str(left.value),
            "right": str(right.value),
            "gap": str(right.value - left.value) if left.is_exact and right.is_exact else None,
        },
        derivation=(f"abs coefficient {c} produces a derivative jump of {2 * c} at 0",),
    )


def verify_nonsmooth_witness(e: Expr, verdict: SmoothnessVerdict, axioms: frozenset = frozenset()) -> bool:
    """Replay a NonSmooth witness from its stored data alone."""
    if verdict.status != Smoothness.NONSMOOTH or verdict.witness is None:
        return False
    w = verdict.witness
    if w["kind"] == "one-sided-derivative-mismatch":
        left = one_sided_derivative(e, QSqrt2(), -1)
        right = one_sided_derivative(e, QSqrt2(), +1)
        return (
            left.is_exact
            and right.is_exact
            and str(left.value) == w["left"]
            and str(right.value) == w["right"]
            and left.value != right.value
        )
    if w["kind"] == "dense-discontinuity":
        d = decompose_exotic(e)
        if not d.ok:
            return False
        delta_part = make_sum(
            [make_prod([Const(d.coefficient(DELTA_KIND)), ATOM_EXPRS[DELTA_KIND]]),
             make_prod([Const(d.coefficient(DELTA_SQRT_KIND)), ATOM_EXPRS[DELTA_SQRT_KIND]])]
        )
        from .numbers import parse_qsqrt2

        values = {label: eval_exact(delta_part, parse_qsqrt2(p)) for label, p in w["points"].items()}
        if {label: str(v) for label, v in values.items()} != w["values"]:
            return False
        return len({str(v) for v in values.values()}) > 1
    if w["kind"] == "axiom-nonsmooth-generator":
        if AXIOM_A not in axioms and AXIOM_A not in verdict.axioms_used:
            return False
        d = decompose_exotic(e)
        return d.ok and not d.coefficient(GAMMA_KIND).is_zero or not d.coefficient(ABS_KIND).is_zero
    return False
