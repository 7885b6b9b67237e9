"""Finite-dimensional vector spaces with finitely generated diffeologies.

A space is R^n together with finitely many generator curves g_k: R -> R^n
given componentwise by expression trees.  The plots of the generated
vector-space diffeology that the toolkit manipulates are kept in the
closed normal form

    p(x) = sum_i  h_i(x) * g_{k_i}(H_i(x))  +  tail(x)

with h_i, H_i and the tail componentwise smooth.  The normal form is
closed under addition, scaling by smooth functions and precomposition
with smooth maps, which is exactly what generated diffeologies require.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import linalg
from .expr import (
    Expr,
    ExprError,
    ONE_E,
    X,
    ZERO_E,
    compose,
    const,
    eval_tagged,
    is_smooth_expr,
    make_prod,
    make_sum,
    parse_expr,
    to_text,
)
from .numbers import QSqrt2, TaggedReal, Tag, add_tagged, mul_tagged


@dataclass(frozen=True)
class Subspace:
    """A rational linear subspace of R^n, stored as a canonical basis."""

    ambient_dim: int
    basis: tuple  # tuple of tuples of Fraction, in reduced row echelon form

    @staticmethod
    def from_vectors(ambient_dim: int, vectors: Sequence[Sequence]) -> "Subspace":
        rows = [[Fraction(x) for x in v] for v in vectors]
        for row in rows:
            if len(row) != ambient_dim:
                raise ValueError("vector length does not match ambient dimension")
        basis = linalg.span_basis(rows)
        return Subspace(ambient_dim, tuple(tuple(r) for r in basis))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence) -> bool:
        return linalg.in_span([list(r) for r in self.basis], [Fraction(x) for x in v])

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimensions differ")
        inter = linalg.intersect_spans(
            [list(r) for r in self.basis], [list(r) for r in other.basis], self.ambient_dim
        )
        return Subspace(self.ambient_dim, tuple(tuple(r) for r in inter))

    def to_dict(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "dim": self.dim,
            "basis": [[str(x) for x in row] for row in self.basis],
        }


@dataclass(frozen=True)
class LinearMap:
    """A linear map R^m -> R^n with rational entries (rows of length m)."""

    matrix: tuple  # tuple of n rows, each a tuple of m Fractions

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> "LinearMap":
        return LinearMap(tuple(tuple(Fraction(x) for x in row) for row in rows))

    @property
    def codomain_dim(self) -> int:
        return len(self.matrix)

    @property
    def domain_dim(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    def apply(self, v: Sequence) -> list:
        return linalg.mat_vec([list(r) for r in self.matrix], list(v))

    def kernel(self) -> Subspace:
        ns = linalg.nullspace([list(r) for r in self.matrix])
        return Subspace.from_vectors(self.domain_dim, ns)

    def image_basis(self) -> list:
        cols = [[self.matrix[i][j] for i in range(self.codomain_dim)] for j in range(self.domain_dim)]
        return linalg.span_basis(cols)


@dataclass(frozen=True)
class DVSpace:
    """R^dim with the vector-space diffeology generated by ``generators``.

    Each generator is a curve R -> R^dim given componentwise by
    expressions in the single variable x.
    """

    name: str
    dim: int
    generators: tuple  # tuple of generators; each generator a tuple of dim Exprs
    axioms: frozenset = frozenset()

    def __post_init__(self):
        for g in self.generators:
            if len(g) != self.dim:
                raise ValueError("generator component count does not match dim")

    def generator_component(self, k: int, j: int) -> Expr:
        return self.generators[k][j]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "generators": [[to_text(c) for c in g] for g in self.generators],
            "axioms": sorted(self.axioms),
        }


# ---------------------------------------------------------------------
# Plots in normal form
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class Plot:
    """sum_i h_i * (g_{k_i} o H_i) + tail, a plot of the generated diffeology."""

    space: DVSpace
    terms: tuple  # tuple of (h: Expr, gen_index: int, H: Expr)
    tail: tuple  # tuple of dim Exprs

    def __post_init__(self):
        for h, k, H in self.terms:
            if not (0 <= k < len(self.space.generators)):
                raise ValueError("generator index out of range")
            if not is_smooth_expr(h) or not is_smooth_expr(H):
                raise ValueError("plot scalars and reparametrizations must be smooth")
        if len(self.tail) != self.space.dim:
            raise ValueError("tail length does not match dim")
        for t in self.tail:
            if not is_smooth_expr(t):
                raise ValueError("plot tail must be smooth")

    def component_expr(self, j: int) -> Expr:
        parts = []
        for h, k, H in self.terms:
            parts.append(make_prod([h, compose(self.space.generators[k][j], H)]))
        parts.append(self.tail[j])
        return make_sum(parts)

    def to_dict(self) -> dict:
        return {
            "space": self.space.name,
            "terms": [
                {"scalar": to_text(h), "generator": k, "inner": to_text(H)}
                for h, k, H in self.terms
            ],
            "tail": [to_text(t) for t in self.tail],
            "components": [to_text(self.component_expr(j)) for j in range(self.space.dim)],
        }


def zero_tail(dim: int) -> tuple:
    return tuple(ZERO_E for _ in range(dim))


def smooth_plot(space: DVSpace, components: Sequence[Expr]) -> Plot:
    return Plot(space, (), tuple(components))


def generator_plot(space: DVSpace, k: int, h: Expr = ONE_E, inner: Expr = X) -> Plot:
    return Plot(space, ((h, k, inner),), zero_tail(space.dim))


def plot_add(p: Plot, q: Plot) -> Plot:
    if p.space is not q.space and p.space != q.space:
        raise ValueError("plots live in different spaces")
    tail = tuple(make_sum([a, b]) for a, b in zip(p.tail, q.tail))
    return Plot(p.space, p.terms + q.terms, tail)


def plot_scale(p: Plot, scalar: Expr) -> Plot:
    if not is_smooth_expr(scalar):
        raise ValueError("scaling function must be smooth")
    terms = tuple((make_prod([scalar, h]), k, H) for h, k, H in p.terms)
    tail = tuple(make_prod([scalar, t]) for t in p.tail)
    return Plot(p.space, terms, tail)


def plot_precompose(p: Plot, s: Expr) -> Plot:
    if not is_smooth_expr(s):
        raise ValueError("precomposition map must be smooth")
    terms = tuple((compose(h, s), k, compose(H, s)) for h, k, H in p.terms)
    tail = tuple(compose(t, s) for t in p.tail)
    return Plot(p.space, terms, tail)


def plot_eval(p: Plot, x: TaggedReal) -> list:
    """Evaluate each component; entries may be indeterminate tuples."""
    return [eval_tagged(p.component_expr(j), x) for j in range(p.space.dim)]


# ---------------------------------------------------------------------
# Pushforwards and products
# ---------------------------------------------------------------------


def pushforward(L: LinearMap, space: DVSpace, name: Optional[str] = None) -> DVSpace:
    """The image space R^n with the diffeology generated by L o g_k."""
    if L.domain_dim != space.dim:
        raise ValueError("map domain does not match space dimension")
    gens = []
    for g in space.generators:
        comp = []
        for i in range(L.codomain_dim):
            comp.append(make_sum([make_prod([const(L.matrix[i][j]), g[j]]) for j in range(space.dim)]))
        gens.append(tuple(comp))
    return DVSpace(name or f"{space.name}-pushforward", L.codomain_dim, tuple(gens), space.axioms)


def pushforward_plot(L: LinearMap, p: Plot, target: DVSpace) -> Plot:
    """Carry a normal-form plot through L into the pushforward space."""
    tail = []
    for i in range(L.codomain_dim):
        tail.append(
            make_sum([make_prod([const(L.matrix[i][j]), p.tail[j]]) for j in range(p.space.dim)])
        )
    return Plot(target, p.terms, tuple(tail))


def product_space(a: DVSpace, b: DVSpace, name: Optional[str] = None) -> DVSpace:
    """Direct product with the product (sum) diffeology."""
    dim = a.dim + b.dim
    gens = []
    for g in a.generators:
        gens.append(tuple(list(g) + [ZERO_E] * b.dim))
    for g in b.generators:
        gens.append(tuple([ZERO_E] * a.dim + list(g)))
    return DVSpace(name or f"{a.name}x{b.name}", dim, tuple(gens), a.axioms | b.axioms)


# ---------------------------------------------------------------------
# Declaration format
# ---------------------------------------------------------------------
#
#   space <name> dim <n>
#   gen <expr>, <expr>, ...        (one line per generator, n components)
#   axiom <name>                   (optional, repeatable)


def parse_space(text: str, bar_gamma_ref=None) -> DVSpace:
    name = None
    dim = None
    gens = []
    axioms = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        head = parts[0]
        rest = parts[1] if len(parts) > 1 else ""
        if head == "space":
            fields = rest.split()
            if len(fields) != 3 or fields[1] != "dim":
                raise ExprError(f"line {lineno}: expected 'space <name> dim <n>'")
            name, dim = fields[0], int(fields[2])
        elif head == "gen":
            comps = [parse_expr(c, bar_gamma_ref) for c in rest.split(",")]
            gens.append(tuple(comps))
        elif head == "axiom":
            axioms.add(rest.strip())
        else:
            raise ExprError(f"line {lineno}: unknown directive {head!r}")
    if name is None or dim is None:
        raise ExprError("missing 'space <name> dim <n>' header")
    return DVSpace(name, dim, tuple(gens), frozenset(axioms))


def print_space(space: DVSpace) -> str:
    lines = [f"space {space.name} dim {space.dim}"]
    for g in space.generators:
        lines.append("gen " + ", ".join(to_text(c) for c in g))
    for a in sorted(space.axioms):
        lines.append(f"axiom {a}")
    return "\n".join(lines) + "\n"
