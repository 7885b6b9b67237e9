"""Linear constraints carried by finitely generated diffeologies.

Two engines live here.

* The functional engine: a linear functional is smooth for the generated
  diffeology iff its composite with every generator curve is a smooth
  function.  Each composite decomposes into canonical exotic atoms, and a
  small auditable fact base turns the atom pattern into exact linear
  equations on the functional's coefficients.  The diffeological dual,
  the maximal isotropic subspace and the characteristic splitting all
  fall out of exact nullspace computations.

* The subset engine: a formal plot with values in a rational subspace is
  tracked through symbols T[k, kind], one per (generator, atom kind)
  pair, standing for the exotic content that generator can contribute.
  Annihilator equations seed a span of provably smooth symbol
  combinations; separation rules grow the span; the subset diffeology is
  certified standard when every ambient coordinate's symbol vector lies
  in the span.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import linalg
from .diffeology import DVSpace, Subspace
from .expr import (
    ABS_KIND,
    AXIOM_A,
    AXIOM_SQRT_IMPLICATION,
    DELTA_KIND,
    DELTA_SQRT_KIND,
    GAMMA_KIND,
    decompose_exotic,
    to_text,
)
from .numbers import QSqrt2

ALL_KINDS = (ABS_KIND, DELTA_KIND, DELTA_SQRT_KIND, GAMMA_KIND)

# ---------------------------------------------------------------------
# Fact base
# ---------------------------------------------------------------------
#
# Each entry states which atom coefficient vectors of a generator
# composite must vanish for the composite to be smooth, under which
# axioms, with a self-contained justification.

FACT_BASE = [
    {
        "id": "abs-kink",
        "kinds": [ABS_KIND],
        "requires_axioms": [],
        "forces_zero": [ABS_KIND],
        "justification": (
            "c*|u| + smooth has a one-sided derivative jump of 2c at a simple "
            "zero of u, so smoothness forces c = 0"
        ),
    },
    {
        "id": "delta-discontinuity",
        "kinds": [DELTA_KIND],
        "requires_axioms": [],
        "forces_zero": [DELTA_KIND],
        "justification": (
            "c*deltaQ takes the value 0 on the dense set of rationals and c on "
            "the dense set of irrationals; continuity forces c = 0"
        ),
    },
    {
        "id": "delta-sqrt-discontinuity",
        "kinds": [DELTA_SQRT_KIND],
        "requires_axioms": [],
        "forces_zero": [DELTA_SQRT_KIND],
        "justification": (
            "c*deltaQ(sqrt|x|) is 0 on rationals with rational square root and "
            "c on rationals with irrational square root; both families are "
            "dense, so continuity forces c = 0"
        ),
    },
    {
        "id": "delta-pair-density",
        "kinds": [DELTA_KIND, DELTA_SQRT_KIND],
        "requires_axioms": [],
        "forces_zero": [DELTA_KIND, DELTA_SQRT_KIND],
        "justification": (
            "c1*deltaQ(x) + c2*deltaQ(sqrt|x|) takes the constants 0, c2 and "
            "c1+c2 on three dense families (rationals with rational root, "
            "rationals with irrational root, irrationals); continuity forces "
            "c1 = c2 = 0"
        ),
    },
    {
        "id": "gamma-under-A",
        "kinds": [GAMMA_KIND],
        "requires_axioms": [AXIOM_A],
        "forces_zero": [GAMMA_KIND, ABS_KIND],
        "justification": (
            "axiom A: a combination c1*|x| + c2*gamma(x) is smooth only when "
            "its abs part and gamma part are separately smooth, and gamma "
            "itself is not smooth; hence c1 = c2 = 0"
        ),
    },
]


def _facts_for(kinds: frozenset, axioms: frozenset):
    """Pick the fact-base rules matching an atom-kind pattern.

    Returns (list of facts, list of kinds forced to zero, complete flag);
    ``complete`` is False when some present kind is not covered by any
    applicable rule.
    """
    facts = []
    forced: set = set()
    if GAMMA_KIND in kinds:
        rule = next(f for f in FACT_BASE if f["id"] == "gamma-under-A")
        if AXIOM_A in axioms:
            facts.append(rule)
            forced.update(k for k in rule["forces_zero"] if k in kinds)
        # without axiom A neither the gamma nor the abs part is decidable
    elif ABS_KIND in kinds:
        rule = next(f for f in FACT_BASE if f["id"] == "abs-kink")
        facts.append(rule)
        forced.add(ABS_KIND)
    if DELTA_KIND in kinds and DELTA_SQRT_KIND in kinds:
        rule = next(f for f in FACT_BASE if f["id"] == "delta-pair-density")
        facts.append(rule)
        forced.update((DELTA_KIND, DELTA_SQRT_KIND))
    elif DELTA_KIND in kinds:
        facts.append(next(f for f in FACT_BASE if f["id"] == "delta-discontinuity"))
        forced.add(DELTA_KIND)
    elif DELTA_SQRT_KIND in kinds:
        facts.append(next(f for f in FACT_BASE if f["id"] == "delta-sqrt-discontinuity"))
        forced.add(DELTA_SQRT_KIND)
    complete = forced == set(kinds)
    return facts, sorted(forced), complete


# ---------------------------------------------------------------------
# Atom coefficient tables
# ---------------------------------------------------------------------


@dataclass
class AtomTable:
    """Per-generator atom coefficient vectors c[k][kind] in Q(sqrt2)^dim."""

    space: DVSpace
    coefvecs: list  # coefvecs[k][kind] -> list of QSqrt2, or missing
    complete: bool
    notes: tuple


def atom_table(space: DVSpace) -> AtomTable:
    table = []
    complete = True
    notes = []
    for k, gen in enumerate(space.generators):
        vecs: dict = {}
        for j, comp in enumerate(gen):
            d = decompose_exotic(comp)
            if not d.ok:
                complete = False
                notes.append(
                    f"generator {k} component {j} has unrecognized exotic terms: "
                    + ", ".join(to_text(t) for t in d.leftovers)
                )
                continue
            for kind in ALL_KINDS:
                c = d.coefficient(kind)
                if not c.is_zero:
                    vecs.setdefault(kind, [QSqrt2() for _ in range(space.dim)])[j] = c
        table.append(vecs)
    return AtomTable(space, table, complete, tuple(notes))


# ---------------------------------------------------------------------
# Functional engine
# ---------------------------------------------------------------------


@dataclass
class DualResult:
    status: str  # "exact" | "upper-bound"
    basis: list  # rows (lists of Fraction or QSqrt2)
    dim: Optional[int]
    equations: list
    facts_used: tuple
    axioms_used: tuple
    notes: tuple

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "dim": self.dim,
            "basis": [[str(x) for x in row] for row in self.basis],
            "equations": [[str(x) for x in row] for row in self.equations],
            "facts_used": list(self.facts_used),
            "axioms_used": list(self.axioms_used),
            "notes": list(self.notes),
        }


def _rationalize(rows):
    """Convert QSqrt2 rows to Fractions when every entry is rational."""
    out = []
    for row in rows:
        if all(isinstance(x, QSqrt2) and x.is_rational for x in row):
            out.append([x.as_rational() for x in row])
        else:
            out.append(list(row))
    return out


def dual_basis(space: DVSpace) -> DualResult:
    """The diffeological dual: smooth linear functionals on the space.

    A functional f(v) = sum a_j v_j is smooth iff f composed with every
    generator curve is smooth; the fact base converts each composite's
    atom pattern into equations sum_j a_j c[kind][j] = 0.
    """
    table = atom_table(space)
    equations = []
    facts_used: list = []
    axioms_used: set = set()
    complete = table.complete
    notes = list(table.notes)
    for k, vecs in enumerate(table.coefvecs):
        kinds = frozenset(vecs.keys())
        if not kinds:
            continue
        facts, forced, rule_complete = _facts_for(kinds, space.axioms)
        for f in facts:
            if f["id"] not in facts_used:
                facts_used.append(f["id"])
            axioms_used.update(f["requires_axioms"])
        for kind in forced:
            equations.append(list(vecs[kind]))
        if not rule_complete:
            complete = False
            missing = sorted(set(kinds) - set(forced))
            notes.append(
                f"generator {k}: atom kinds {missing} not decidable under axioms "
                f"{sorted(space.axioms)}"
            )
    if equations:
        basis = _rationalize(linalg.nullspace(equations))
    else:
        one = Fraction(1)
        basis = [[one if j == i else Fraction(0) for j in range(space.dim)] for i in range(space.dim)]
    status = "exact" if complete else "upper-bound"
    return DualResult(
        status=status,
        basis=basis,
        dim=len(basis) if complete else None,
        equations=_rationalize(equations),
        facts_used=tuple(facts_used),
        axioms_used=tuple(sorted(axioms_used)),
        notes=tuple(notes),
    )


@dataclass
class IsotropicResult:
    status: str  # "exact" | "lower-bound"
    subspace: Subspace
    dual: DualResult

    def to_dict(self) -> dict:
        return {"status": self.status, "subspace": self.subspace.to_dict(), "dual": self.dual.to_dict()}


def maximal_isotropic(space: DVSpace) -> IsotropicResult:
    """The common kernel of all smooth functionals.

    When the dual is only an upper bound, the computed kernel is a lower
    bound for the true isotropic subspace.
    """
    dual = dual_basis(space)
    rows = [list(r) for r in dual.basis]
    if not rows:
        sub = Subspace.from_vectors(
            space.dim, [[1 if j == i else 0 for j in range(space.dim)] for i in range(space.dim)]
        )
    else:
        if any(isinstance(x, QSqrt2) and not x.is_rational for row in rows for x in row):
            ker = linalg.nullspace(rows)
            ker = _rationalize(ker)
        else:
            ker = linalg.nullspace(rows)
        sub = Subspace.from_vectors(space.dim, ker) if ker else Subspace(space.dim, ())
    status = "exact" if dual.status == "exact" else "lower-bound"
    return IsotropicResult(status, sub, dual)


CHARACTERISTIC_CERT = "external:dual-dimension-theorem"


@dataclass
class CharacteristicResult:
    status: str
    isotropic: Subspace
    complement: Subspace
    certificate: str
    dual: DualResult

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "isotropic": self.isotropic.to_dict(),
            "complement": self.complement.to_dict(),
            "certificate": self.certificate,
            "dual": self.dual.to_dict(),
        }


def characteristic_decomposition(space: DVSpace) -> CharacteristicResult:
    """Split R^n as (lowest-index coordinate complement) + isotropic part.

    The certificate records the external fact that the dual dimension
    plus the isotropic dimension equals the ambient dimension for these
    finitely generated diffeologies.
    """
    iso = maximal_isotropic(space)
    comp_rows = linalg.pivot_complement([list(r) for r in iso.subspace.basis], space.dim)
    comp = Subspace.from_vectors(space.dim, comp_rows) if comp_rows else Subspace(space.dim, ())
    return CharacteristicResult(iso.status, iso.subspace, comp, CHARACTERISTIC_CERT, iso.dual)


# ---------------------------------------------------------------------
# Subset engine
# ---------------------------------------------------------------------

SEPARATION_RULES = [
    # NOTE: there is deliberately no unconditional "delta-part separation"
    # rule.  The rational-matching identity shows that an indicator
    # combination plus a smooth tail can equal |x|, so the deltaQ-part of
    # a smooth combination need not itself be smooth.
    {
        "id": "abs-gamma-splitting",
        "requires_axioms": [AXIOM_A],
        "justification": (
            "axiom A: a smooth combination with mixed abs- and gamma-content "
            "splits into a smooth abs-part and a smooth gamma-part"
        ),
    },
    {
        "id": "abs-gamma-sibling",
        "requires_axioms": [AXIOM_A],
        "justification": (
            "axiom A: for a generator carrying both |.| and gamma content the "
            "gamma-part is smooth iff the matching abs-part is smooth"
        ),
    },
    {
        "id": "sqrt-delta-implication",
        "requires_axioms": [AXIOM_SQRT_IMPLICATION],
        "justification": (
            "optional axiom: smoothness of a generator's deltaQ(sqrt|x|)-part "
            "forces smoothness of its deltaQ(x)-part"
        ),
    },
]


@dataclass
class StandardnessVerdict:
    status: str  # "Standard" | "NonStandard" | "Unknown"
    subspace: Subspace
    derivation: tuple
    axioms_used: tuple
    smooth_span: list

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "subspace": self.subspace.to_dict(),
            "derivation": list(self.derivation),
            "axioms_used": list(self.axioms_used),
        }


def _span_add(span: list, v: list) -> bool:
    if linalg.in_span(span, v):
        return False
    span.append(list(v))
    return True


def subset_standard(space: DVSpace, subspace: Subspace) -> StandardnessVerdict:
    """Certify that the subset diffeology a subspace inherits is standard.

    Symbols are (generator, atom kind) pairs.  The annihilator of the
    subspace turns "the plot stays inside the subspace" into smooth
    symbol combinations; separation rules close the smooth span; the
    verdict is Standard when every coordinate's symbol vector is smooth.
    """
    table = atom_table(space)
    if not table.complete:
        return StandardnessVerdict("Unknown", subspace, table.notes, (), [])
    symbols = []
    for k, vecs in enumerate(table.coefvecs):
        for kind in ALL_KINDS:
            if kind in vecs:
                symbols.append((k, kind))
    if not symbols:
        return StandardnessVerdict(
            "Standard", subspace, ("no exotic content: every plot is already smooth",), (), []
        )
    sym_index = {s: i for i, s in enumerate(symbols)}
    n_sym = len(symbols)

    def coefvec(sym):
        k, kind = sym
        return table.coefvecs[k][kind]

    # coordinate vectors: coordinate j receives sum_s M[j][s] * T_s
    coord_vecs = []
    for j in range(space.dim):
        coord_vecs.append([coefvec(s)[j] for s in symbols])

    derivation = []
    axioms_used: set = set()
    span: list = []

    # seed: annihilator functionals of the subspace
    ann = linalg.annihilator([list(r) for r in subspace.basis], space.dim)
    for phi in ann:
        v = []
        for s in symbols:
            cv = coefvec(s)
            v.append(sum((QSqrt2.coerce(phi[j]) * cv[j] for j in range(space.dim)), QSqrt2()))
        if any(not x.is_zero for x in v) and _span_add(span, v):
            derivation.append(
                "annihilator " + str([str(x) for x in phi]) + " forces the smooth combination "
                + str([str(x) for x in v])
            )

    # close under separation rules
    changed = True
    while changed:
        changed = False
        for v in list(span):
            if AXIOM_A in space.axioms:
                for kind in (ABS_KIND, GAMMA_KIND):
                    proj = [v[i] if symbols[i][1] == kind else QSqrt2() for i in range(n_sym)]
                    rest = [v[i] - proj[i] for i in range(n_sym)]
                    if (
                        any(not x.is_zero for x in proj)
                        and any(not x.is_zero for x in rest)
                        and _span_add(span, proj)
                    ):
                        derivation.append(f"abs-gamma-splitting (axiom A) extracts the {kind}-part")
                        axioms_used.add(AXIOM_A)
                        changed = True
        if AXIOM_A in space.axioms:
            for k, vecs in enumerate(table.coefvecs):
                if ABS_KIND in vecs and GAMMA_KIND in vecs:
                    ia, ig = sym_index[(k, ABS_KIND)], sym_index[(k, GAMMA_KIND)]
                    for src, dst in ((ig, ia), (ia, ig)):
                        unit_src = [QSqrt2.coerce(1) if i == src else QSqrt2() for i in range(n_sym)]
                        unit_dst = [QSqrt2.coerce(1) if i == dst else QSqrt2() for i in range(n_sym)]
                        if linalg.in_span(span, unit_src) and _span_add(span, unit_dst):
                            derivation.append(
                                f"abs-gamma-sibling (axiom A) on generator {k}"
                            )
                            axioms_used.add(AXIOM_A)
                            changed = True
        if AXIOM_SQRT_IMPLICATION in space.axioms:
            for k, vecs in enumerate(table.coefvecs):
                if DELTA_SQRT_KIND in vecs and DELTA_KIND in vecs:
                    isq = sym_index[(k, DELTA_SQRT_KIND)]
                    idl = sym_index[(k, DELTA_KIND)]
                    unit_src = [QSqrt2.coerce(1) if i == isq else QSqrt2() for i in range(n_sym)]
                    unit_dst = [QSqrt2.coerce(1) if i == idl else QSqrt2() for i in range(n_sym)]
                    if linalg.in_span(span, unit_src) and _span_add(span, unit_dst):
                        derivation.append(f"sqrt-delta-implication on generator {k}")
                        axioms_used.add(AXIOM_SQRT_IMPLICATION)
                        changed = True

    if all(linalg.in_span(span, cv) for cv in coord_vecs):
        derivation.append("every coordinate's exotic content is a smooth combination")
        return StandardnessVerdict(
            "Standard", subspace, tuple(derivation), tuple(sorted(axioms_used)), span
        )
    return StandardnessVerdict("Unknown", subspace, tuple(derivation), tuple(sorted(axioms_used)), span)


def _critical_directions(space: DVSpace) -> list:
    """Rational directions spanned by single atom coefficient vectors."""
    table = atom_table(space)
    dirs = []
    for vecs in table.coefvecs:
        for kind in ALL_KINDS:
            if kind in vecs:
                v = vecs[kind]
                if all(x.is_rational for x in v):
                    rv = [x.as_rational() for x in v]
                    if any(rv) and not any(
                        linalg.in_span([d], rv) and linalg.in_span([rv], d) for d in dirs
                    ):
                        dirs.append(rv)
    return dirs


@dataclass
class AllLinesResult:
    status: str
    checked: list
    verdicts: list

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "checked": [[str(x) for x in d] for d in self.checked],
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


def all_lines_standard(space: DVSpace) -> AllLinesResult:
    """Certify that every line through 0 is standard (dimension 2 only).

    The subset verdict for a line only depends on which atom coefficient
    vectors it meets, so the axes, the finitely many critical directions
    and one generic representative cover all cases.
    """
    if space.dim != 2:
        raise ValueError("line enumeration is implemented for dimension 2")
    directions = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    for d in _critical_directions(space):
        if not any(linalg.in_span([d0], d) and linalg.in_span([d], d0) for d0 in directions):
            directions.append(d)
    t = 1
    while True:
        cand = [Fraction(1), Fraction(t)]
        if not any(linalg.in_span([d0], cand) and linalg.in_span([cand], d0) for d0 in directions):
            directions.append(cand)
            break
        t += 1
    verdicts = [subset_standard(space, Subspace.from_vectors(2, [d])) for d in directions]
    ok = all(v.status == "Standard" for v in verdicts)
    return AllLinesResult("Standard" if ok else "Unknown", directions, verdicts)
