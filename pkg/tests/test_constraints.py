"""Constraint engine: duals, isotropic subspaces, standardness.

Includes an independent brute-force oracle for the three-dimensional
space generated by (0, |x|, |x|): functionals are enumerated on an
integer grid and classified by float one-sided finite differences, with
no shared code path with the solver under test.
"""

import itertools
from fractions import Fraction

from smoothsum.constraints import (
    CHARACTERISTIC_CERT,
    all_lines_standard,
    characteristic_decomposition,
    dual_basis,
    maximal_isotropic,
    subset_standard,
)
from smoothsum.diffeology import Subspace
from smoothsum.expr import AXIOM_A, AXIOM_SQRT_IMPLICATION
from smoothsum.gallery import gallery_space


def test_v2_delta_dual_zero():
    sp = gallery_space("V2-delta")
    dual = dual_basis(sp)
    assert dual.status == "exact" and dual.dim == 0
    iso = maximal_isotropic(sp)
    assert iso.status == "exact" and iso.subspace.dim == 2


def test_r3_abs_dual_and_isotropic():
    sp = gallery_space("R3-abs")
    dual = dual_basis(sp)
    assert dual.status == "exact" and dual.dim == 2
    iso = maximal_isotropic(sp)
    assert iso.subspace.dim == 1
    assert iso.subspace.contains([0, 1, 1])


# ---------------------------------------------------------------------
# Independent brute-force oracle for R3-abs
# ---------------------------------------------------------------------


def _r3_generator(x: float):
    return (0.0, abs(x), abs(x))


def _functional_smooth_bruteforce(a) -> bool:
    """One-sided finite differences of t -> a . g(t) at 0, pure floats."""
    def f(t):
        g = _r3_generator(t)
        return sum(float(ai) * gi for ai, gi in zip(a, g))

    h = 1e-7
    right = (f(h) - f(0.0)) / h
    left = (f(0.0) - f(-h)) / h
    return abs(right - left) < 1e-9


def _span_rank_fraction(rows):
    rows = [list(map(Fraction, r)) for r in rows]
    rank, col = 0, 0
    n = 3
    while rows and col < n:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                c = rows[i][col]
                rows[i] = [x - c * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def test_r3_abs_bruteforce_oracle_agrees():
    sp = gallery_space("R3-abs")
    dual = dual_basis(sp)
    grid = list(itertools.product(range(-2, 3), repeat=3))
    smooth = [a for a in grid if _functional_smooth_bruteforce(a)]
    # the brute-force smooth functionals span a space of the same dimension
    assert _span_rank_fraction(smooth) == dual.dim == 2
    # every solver dual basis row is brute-force smooth (scaled to integers)
    for row in dual.basis:
        denom = 1
        for x in row:
            denom = denom * Fraction(x).denominator
        scaled = [float(Fraction(x) * denom) for x in row]
        assert _functional_smooth_bruteforce(scaled)
    # the isotropic subspace is exactly the vectors killed by all
    # brute-force smooth functionals
    iso = maximal_isotropic(sp).subspace
    killed = [
        v
        for v in itertools.product(range(-2, 3), repeat=3)
        if all(sum(a[i] * v[i] for i in range(3)) == 0 for a in smooth)
    ]
    assert _span_rank_fraction(killed) == iso.dim == 1
    for v in killed:
        assert iso.contains(list(v))


# ---------------------------------------------------------------------
# Conditional spaces
# ---------------------------------------------------------------------


def test_gamma_pair_dual_depends_on_axiom():
    plain = dual_basis(gallery_space("gamma-pair"))
    assert plain.status == "upper-bound" or plain.dim is None or plain.dim > 0
    with_a = dual_basis(gallery_space("gamma-pair", frozenset({AXIOM_A})))
    assert with_a.status == "exact"
    assert with_a.axioms_used == ("A",)


def test_w_space_dual_zero():
    sp = gallery_space("W-nondecomposable", frozenset({AXIOM_A}))
    dual = dual_basis(sp)
    assert dual.status == "exact" and dual.dim == 0
    iso = maximal_isotropic(sp)
    assert iso.subspace.dim == 2


def test_characteristic_decomposition_r3():
    sp = gallery_space("R3-abs")
    ch = characteristic_decomposition(sp)
    assert ch.certificate == CHARACTERISTIC_CERT
    assert ch.isotropic.dim == 1 and ch.complement.dim == 2
    assert ch.isotropic.intersect(ch.complement).dim == 0


def test_subset_standard_r3_spans():
    sp = gallery_space("R3-abs")
    top = subset_standard(sp, Subspace.from_vectors(3, [[1, 0, 0], [0, 1, 0]]))
    assert top.status == "Standard"
    e3 = subset_standard(sp, Subspace.from_vectors(3, [[0, 0, 1]]))
    assert e3.status == "Standard"


def test_subset_standard_never_certifies_nonstandard_lines():
    # every line of the double-absolute-value space carries a
    # non-standard subset diffeology (the matched-pair witnesses realize
    # |x| inside each axis), so a Standard verdict here would be unsound
    sp = gallery_space("V2-delta")
    for v in ([1, 0], [0, 1], [1, 1]):
        verdict = subset_standard(sp, Subspace.from_vectors(2, [v]))
        assert verdict.status == "Unknown"


def test_subset_standard_sqrt_delta_conditional():
    plain = gallery_space("sqrt-delta")
    e1 = Subspace.from_vectors(2, [[1, 0]])
    assert subset_standard(plain, e1).status == "Unknown"
    cond = gallery_space("sqrt-delta", frozenset({AXIOM_SQRT_IMPLICATION}))
    verdict = subset_standard(cond, e1)
    assert verdict.status == "Standard"
    assert AXIOM_SQRT_IMPLICATION in verdict.axioms_used


def test_all_lines_standard_w_space():
    sp = gallery_space("W-nondecomposable", frozenset({AXIOM_A}))
    res = all_lines_standard(sp)
    assert res.status == "Standard"
    plain = all_lines_standard(gallery_space("W-nondecomposable"))
    assert plain.status == "Unknown"
