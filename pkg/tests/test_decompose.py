"""Direct-sum certification, refutation, and ker/im diffeomorphism search."""

import random
from fractions import Fraction

from smoothsum.constraints import maximal_isotropic
from smoothsum.decompose import (
    certify_smooth_sum,
    check_algebraic_sum,
    complementedness_report,
    decomposability_report,
    kernel_image_check,
    kernel_image_space,
    nonstandard_subspace_witness,
    projection_pair,
    refute_smooth_sum_standard,
    verify_kernel_image_witness,
)
from smoothsum.diffeology import LinearMap, Subspace
from smoothsum.expr import AXIOM_A, Smoothness, to_text
from smoothsum.gallery import (
    franklin_map,
    gallery_space,
    gallery_witnesses,
    v2_delta_axis_plots,
)

E1 = Subspace.from_vectors(2, [[1, 0]])
E2 = Subspace.from_vectors(2, [[0, 1]])


def test_check_algebraic_sum():
    assert check_algebraic_sum(2, E1, E2)
    assert not check_algebraic_sum(2, E1, E1)
    assert not check_algebraic_sum(2, E1, Subspace.from_vectors(2, []))


def test_projection_pair():
    p0, p1 = projection_pair(E1, E2)
    for v in ([1, 0], [0, 1], [3, -2]):
        a = p0.apply([Fraction(x) for x in v])
        b = p1.apply([Fraction(x) for x in v])
        assert [x + y for x, y in zip(a, b)] == [Fraction(x) for x in v]
        assert E1.contains(a) and E2.contains(b)


def test_certify_v2_delta_axes():
    sp = gallery_space("V2-delta")
    verdict = certify_smooth_sum(sp, E1, E2, witnesses=gallery_witnesses(sp, 8))
    assert verdict.status == "SmoothCertified"
    assert verdict.axioms_used == ()
    rules = {w["rule"] for w in verdict.forward_witnesses}
    assert "replayed-witness" in rules


def test_certify_deterministic():
    sp = gallery_space("V2-delta")
    w = gallery_witnesses(sp, 8)
    a = certify_smooth_sum(sp, E1, E2, witnesses=w).to_dict()
    b = certify_smooth_sum(sp, E1, E2, witnesses=w).to_dict()
    assert a == b


def test_refute_r3_abs():
    sp = gallery_space("R3-abs")
    verdict = refute_smooth_sum_standard(
        sp,
        Subspace.from_vectors(3, [[1, 0, 0], [0, 1, 0]]),
        Subspace.from_vectors(3, [[0, 0, 1]]),
    )
    assert verdict.status == "NonSmooth"
    assert verdict.axioms_used == ()


def test_nonstandard_witness_twenty_directions():
    sp = gallery_space("V2-delta")
    provider = v2_delta_axis_plots(sp, franklin_map(8))
    rng = random.Random(0)
    for _ in range(20):
        a = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        b = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        if a == 0 and b == 0:
            a = Fraction(1)
        plot, verdict, w = nonstandard_subspace_witness(sp, [a, b], provider)
        assert verdict.status == Smoothness.NONSMOOTH
        # the witness plot really is the curve x -> (a|x|, b|x|)
        assert to_text(plot.component_expr(0)) is not None
        assert w.contains([a, b])


def test_complementedness_gamma_pair():
    cond = gallery_space("gamma-pair", frozenset({AXIOM_A}))
    rep = complementedness_report(cond, E1)
    assert rep.status == "NotComplemented"
    assert rep.axioms_used == ("A",)
    plain = complementedness_report(gallery_space("gamma-pair"), E1)
    assert plain.status == "Unknown"


def test_decomposability_characteristic_split():
    sp = gallery_space("R3-abs")
    rep = decomposability_report(sp)
    assert rep.status == "Decomposable"
    # Certified characteristic decompositions have the isotropic subspace
    # as one summand: replay that property
    iso = maximal_isotropic(sp).subspace
    split = rep.detail.get("characteristic")
    assert split is not None
    assert split["isotropic"]["basis"] == [[str(x) for x in r] for r in iso.basis]


def test_decomposability_w_space():
    cond = gallery_space("W-nondecomposable", frozenset({AXIOM_A}))
    rep = decomposability_report(cond)
    assert rep.status == "NonDecomposable"
    assert rep.axioms_used == ("A",)
    plain = decomposability_report(gallery_space("W-nondecomposable"))
    assert plain.status == "Unknown"


def test_decomposability_v2_delta_with_witness():
    sp = gallery_space("V2-delta")
    rep = decomposability_report(sp, witnesses=gallery_witnesses(sp, 8), witness_split=(E1, E2))
    assert rep.status == "Decomposable"


def test_kernel_image_space():
    sp = gallery_space("R3-abs")
    f = LinearMap.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 0]])
    prod, parts = kernel_image_space(sp, f)
    assert prod.dim == 3


def test_kernel_image_check_r3():
    sp = gallery_space("R3-abs")
    f = LinearMap.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 0]])
    verdict = kernel_image_check(sp, f)
    assert verdict.status == "Diffeomorphic"
    assert verdict.witness_matrix is not None
    assert verify_kernel_image_witness(sp, f, verdict.witness_matrix)
    # determinism of the bounded search
    again = kernel_image_check(sp, f)
    assert again.witness_matrix == verdict.witness_matrix


def test_kernel_image_check_w_rank_one():
    sp = gallery_space("W-nondecomposable", frozenset({AXIOM_A}))
    for rows in ([[1, 0], [0, 0]], [[0, 1], [0, 0]], [[1, 1], [1, 1]]):
        f = LinearMap.from_rows(rows)
        verdict = kernel_image_check(sp, f)
        assert verdict.status == "NoDiffeomorphism"
        assert verdict.axioms_used == ("A",)


def test_kernel_image_invertible_trivial():
    sp = gallery_space("R3-abs")
    f = LinearMap.from_rows([[1, 0, 0], [0, 2, 0], [0, 0, 1]])
    verdict = kernel_image_check(sp, f)
    assert verdict.status == "Diffeomorphic"
