"""Prebuilt spaces, named axioms, and reproducible scenarios.

Every scenario is deterministic and timing-free, so repeated runs emit
byte-identical JSON.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

from .constraints import (
    AXIOM_A,
    AXIOM_SQRT_IMPLICATION,
    all_lines_standard,
    characteristic_decomposition,
    dual_basis,
    maximal_isotropic,
    subset_standard,
)
from .decompose import (
    KernelImageVerdict,
    certify_smooth_sum,
    complementedness_report,
    decomposability_report,
    kernel_image_check,
    nonstandard_subspace_witness,
    refute_smooth_sum_standard,
)
from .diffeology import DVSpace, LinearMap, Plot, Subspace, parse_space, zero_tail
from .expr import Const, X, make_neg, make_prod, parse_expr, to_text
from .franklin import (
    AXIOM_EXP_TRANSCENDENCE,
    FranklinMap,
    RationalityLink,
    build_franklin,
    certify_rationality_link,
    h1_expr,
    h2_expr,
    verify_abs_identity,
)
from .numbers import QSqrt2

AXIOMS = {
    AXIOM_A: (
        "There exists a non-smooth function gamma such that the diffeology "
        "generated by |x| and gamma splits: a combination of |x|- and "
        "gamma-composites is smooth only when the two parts are separately "
        "smooth, and a smooth gamma-part forces the matching abs-part smooth."
    ),
    AXIOM_SQRT_IMPLICATION: (
        "Conjectural: smoothness of a combination of deltaQ(sqrt|.|)-"
        "composites forces smoothness of the matching deltaQ-composites."
    ),
    AXIOM_EXP_TRANSCENDENCE: (
        "exp(q) is transcendental for every nonzero rational q (classical; "
        "kept in the explicit axiom table of the numbers module)."
    ),
}

_SPACE_DECLS = {
    "V2-delta": "space V2-delta dim 2\ngen abs(x), abs(x)\ngen 0, deltaQ(x)\n",
    "R3-abs": "space R3-abs dim 3\ngen 0, abs(x), abs(x)\n",
    "gamma-pair": "space gamma-pair dim 2\ngen gamma(x), gamma(x)\ngen 0, abs(x)\n",
    "sqrt-delta": "space sqrt-delta dim 2\ngen deltaQ(x), deltaQ(sqrt(abs(x)))\n",
    "W-nondecomposable": "space W-nondecomposable dim 2\ngen abs(x), gamma(x)\n",
}

SPACE_NAMES = tuple(_SPACE_DECLS)


def gallery_space(name: str, axioms: frozenset = frozenset()) -> DVSpace:
    if name not in _SPACE_DECLS:
        raise KeyError(f"unknown gallery space {name!r}; known: {', '.join(SPACE_NAMES)}")
    sp = parse_space(_SPACE_DECLS[name])
    if axioms:
        sp = DVSpace(sp.name, sp.dim, sp.generators, sp.axioms | frozenset(axioms))
    return sp


# ---------------------------------------------------------------------
# The stored witness bundle for V2-delta
# ---------------------------------------------------------------------


@lru_cache(maxsize=4)
def franklin_map(n: int = 16) -> FranklinMap:
    return build_franklin(n)


def v2_delta_witnesses(space: DVSpace, fm: FranklinMap) -> dict:
    """Witness plots realizing (|x|, 0) and (0, |x|) as plots of V2-delta.

    Both rest on the identity |x| = 2x dQ(H1) - 2x dQ(H2) + x: the first
    cancels the second component of the abs generator, the second builds
    |x| in the second slot from the indicator generator alone.
    """
    h1 = h1_expr()
    h2 = h2_expr(fm)
    two_x = make_prod([Const(QSqrt2.coerce(2)), X])
    neg_two_x = make_neg(two_x)
    d1 = Plot(
        space,
        ((Const(QSqrt2.coerce(1)), 0, X), (neg_two_x, 1, h1), (two_x, 1, h2)),
        (parse_expr("0"), make_neg(X)),
    )
    d2 = Plot(
        space,
        ((two_x, 1, h1), (neg_two_x, 1, h2)),
        (parse_expr("0"), X),
    )
    return {(0, 0): d1, (0, 1): d2}


def v2_delta_axis_plots(space: DVSpace, fm: FranklinMap):
    ws = v2_delta_witnesses(space, fm)

    def provider(j: int) -> Plot:
        return ws[(0, 0)] if j == 0 else ws[(0, 1)]

    return provider


def gallery_witnesses(space: DVSpace, n: int = 16):
    if space.name == "V2-delta":
        return v2_delta_witnesses(space, franklin_map(n))
    return None


# ---------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------

SCENARIOS = (
    "lemma-2.2",
    "thm-2.3",
    "cor-2.5",
    "nonsmooth-R3",
    "gamma-pair",
    "w-nondecomposable",
    "sqrt-delta",
    "ker-im-R3",
)


def _analysis(space: DVSpace) -> dict:
    dual = dual_basis(space)
    iso = maximal_isotropic(space)
    return {
        "space": space.to_dict(),
        "dual": dual.to_dict(),
        "isotropic": iso.to_dict(),
    }


def run_scenario(name: str, n: int = 16) -> dict:
    """Reproduce one of the recorded claims; deterministic output."""
    if name == "lemma-2.2":
        sp = gallery_space("V2-delta")
        out = _analysis(sp)
        out["claim"] = "the diffeological dual is zero and the isotropic subspace is everything"
        out["axioms_used"] = []
        return {"scenario": name, **out}

    if name == "thm-2.3":
        sp = gallery_space("V2-delta")
        fm = franklin_map(n)
        link = RationalityLink(fm)
        link_cert = certify_rationality_link(link)
        verdict = certify_smooth_sum(
            sp,
            Subspace.from_vectors(2, [[1, 0]]),
            Subspace.from_vectors(2, [[0, 1]]),
            witnesses=v2_delta_witnesses(sp, fm),
        )
        identity = verify_abs_identity(link, grid="zero,rationals:1000,negatives:100")
        return {
            "scenario": name,
            "claim": "the two axes form a smooth direct sum, via the |x| identity",
            "franklin": fm.to_dict(),
            "rationality_link": link_cert,
            "decomposition": verdict.to_dict(),
            "identity": identity,
            "axioms_used": sorted(link.axioms_used),
        }

    if name == "cor-2.5":
        sp = gallery_space("V2-delta")
        fm = franklin_map(n)
        provider = v2_delta_axis_plots(sp, fm)
        rng = random.Random(0)
        results = []
        for _ in range(20):
            a = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            b = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            if a == 0 and b == 0:
                a = Fraction(1)
            plot, verdict, w = nonstandard_subspace_witness(sp, [a, b], provider)
            results.append(
                {
                    "direction": [str(a), str(b)],
                    "witness_components": [to_text(plot.component_expr(j)) for j in range(2)],
                    "classification": verdict.to_dict(),
                }
            )
        ok = all(r["classification"]["status"] == "NonSmooth" for r in results)
        return {
            "scenario": name,
            "claim": "every nonzero line inherits a non-standard subset diffeology",
            "all_nonsmooth": ok,
            "directions": results,
            "axioms_used": [],
        }

    if name == "nonsmooth-R3":
        sp = gallery_space("R3-abs")
        refut = refute_smooth_sum_standard(
            sp,
            Subspace.from_vectors(3, [[1, 0, 0], [0, 1, 0]]),
            Subspace.from_vectors(3, [[0, 0, 1]]),
        )
        return {
            "scenario": name,
            "claim": "Span(e1,e2) and Span(e3) are standard but do not give a smooth sum",
            **_analysis(sp),
            "refutation": refut.to_dict(),
            "characteristic": characteristic_decomposition(sp).to_dict(),
            "axioms_used": [],
        }

    if name == "gamma-pair":
        sp = gallery_space("gamma-pair", frozenset({AXIOM_A}))
        comp = complementedness_report(sp, Subspace.from_vectors(2, [[1, 0]]))
        sum_cert = certify_smooth_sum(
            sp,
            Subspace.from_vectors(2, [[1, 1]]),
            Subspace.from_vectors(2, [[0, 1]]),
        )
        return {
            "scenario": name,
            "claim": "Span(e1) is not complemented although an obvious smooth sum exists",
            **_analysis(sp),
            "complementedness_e1": comp.to_dict(),
            "smooth_sum_diag": sum_cert.to_dict(),
            "axioms_used": [AXIOM_A],
        }

    if name == "w-nondecomposable":
        sp = gallery_space("W-nondecomposable", frozenset({AXIOM_A}))
        dec = decomposability_report(sp)
        return {
            "scenario": name,
            "claim": "the (|x|, gamma) space admits no nontrivial smooth splitting",
            **_analysis(sp),
            "decomposability": dec.to_dict(),
            "axioms_used": [AXIOM_A],
        }

    if name == "sqrt-delta":
        sp = gallery_space("sqrt-delta")
        base = _analysis(sp)
        sp_cond = gallery_space("sqrt-delta", frozenset({AXIOM_SQRT_IMPLICATION}))
        standard_e1 = subset_standard(sp_cond, Subspace.from_vectors(2, [[1, 0]]))
        comp = complementedness_report(sp_cond, Subspace.from_vectors(2, [[1, 0]]))
        return {
            "scenario": name,
            "claim": (
                "the double-indicator space has zero dual unconditionally; under "
                "the conjectural square-root implication Span(e1) is standard "
                "and not complemented"
            ),
            **base,
            "conditional_standard_e1": standard_e1.to_dict(),
            "conditional_complementedness_e1": comp.to_dict(),
            "axioms_used": [AXIOM_SQRT_IMPLICATION],
        }

    if name == "ker-im-R3":
        sp = gallery_space("R3-abs")
        f = LinearMap.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 0]])
        verdict = kernel_image_check(sp, f)
        return {
            "scenario": name,
            "claim": "for the rank-two coordinate projection the space is Ker (+) Im",
            "map": [[str(x) for x in row] for row in f.matrix],
            "verdict": verdict.to_dict(),
            "axioms_used": list(verdict.axioms_used),
        }

    raise KeyError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}")
