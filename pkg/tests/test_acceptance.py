"""End-to-end acceptance suite.

Each test replays one headline claim at its stated parameters and
tolerance (exact arithmetic means zero tolerance).  The constraint-solver
results are cross-checked against an independent brute-force oracle, the
determinism check is byte-level across separate processes, and the tag
soundness sweep runs ten thousand randomized DAGs.
"""

import itertools
import json
import random
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from smoothsum.constraints import dual_basis, maximal_isotropic
from smoothsum.decompose import (
    certify_smooth_sum,
    complementedness_report,
    decomposability_report,
    kernel_image_check,
    nonstandard_subspace_witness,
    refute_smooth_sum_standard,
    verify_kernel_image_witness,
)
from smoothsum.diffeology import LinearMap, Subspace
from smoothsum.expr import AXIOM_A, Smoothness
from smoothsum.franklin import RationalityLink, parse_grid, verify_abs_identity
from smoothsum.gallery import (
    SCENARIOS,
    franklin_map,
    gallery_space,
    gallery_witnesses,
    v2_delta_axis_plots,
)
from smoothsum.intervals import Interval, certify_positive
from smoothsum.numbers import QSqrt2, Tag, TaggedReal, add_tagged, mul_tagged, neg_tagged, sqrt_tagged


# -- 1. dual and isotropic subspace of the double-absolute-value space --


def test_criterion_1_analyze_v2_delta_under_one_second():
    start = time.monotonic()
    sp = gallery_space("V2-delta")
    dual = dual_basis(sp)
    iso = maximal_isotropic(sp)
    elapsed = time.monotonic() - start
    assert dual.status == "exact" and dual.dim == 0
    assert iso.status == "exact"
    assert iso.subspace.dim == 2 and iso.subspace.ambient_dim == 2
    assert elapsed < 1.0


# -- 2. smooth axis decomposition via the |x| identity, N=16 ------------


def test_criterion_2_smooth_sum_and_identity(fm16):
    start = time.monotonic()
    sp = gallery_space("V2-delta")
    verdict = certify_smooth_sum(
        sp,
        Subspace.from_vectors(2, [[1, 0]]),
        Subspace.from_vectors(2, [[0, 1]]),
        witnesses=gallery_witnesses(sp, 16),
    )
    assert verdict.status == "SmoothCertified"

    link = RationalityLink(fm16)
    grid = "zero,rationals:1000,negatives:100"
    points = parse_grid(grid, seed=0)
    # required coverage: >= 1000 points, a 100-point x<=0 set, and x=0
    assert len(points) >= 1000
    assert sum(1 for x in points if x.sign() < 0) >= 100
    assert any(x.is_zero for x in points)
    result = verify_abs_identity(link, grid=grid)
    assert result["ok"] and result["failures"] == []
    assert result["checked"] >= 1000
    # matched points are also covered, exactly
    from smoothsum.expr import eval_exact
    from smoothsum.franklin import abs_identity_expr

    e = abs_identity_expr(link)
    for s in fm16.steps:
        assert eval_exact(e, s.a) == QSqrt2.coerce(abs(s.a))
    assert time.monotonic() - start < 60.0


# -- 3. the matching construction itself --------------------------------


def test_criterion_3_franklin_certificates(fm16):
    assert len(fm16.steps) == 16
    assert fm16.check_matches()  # all matches exact in Q(sqrt2)
    assert fm16.check_order_isomorphism()
    assert fm16.check_decay()  # |c_n| * sup|p_n| <= |c_n| <= 2^-n on [0,1]
    inner = Interval(QSqrt2.coerce(Fraction(1, 100)), QSqrt2.coerce(Fraction(99, 100)))
    assert certify_positive(fm16.derivative_interval, inner)


# -- 4. the non-smooth sum in dimension three ---------------------------


def _bruteforce_r3_dual_and_isotropic():
    """Independent float-based constraint enumeration for (0,|x|,|x|)."""

    def functional_smooth(a):
        def f(t):
            return a[1] * abs(t) + a[2] * abs(t)

        h = 1e-7
        return abs((f(h) - f(0.0)) / h - (f(0.0) - f(-h)) / h) < 1e-9

    grid = list(itertools.product(range(-2, 3), repeat=3))
    smooth = [a for a in grid if functional_smooth(a)]
    killed = [
        v for v in grid if all(sum(a[i] * v[i] for i in range(3)) == 0 for a in smooth)
    ]

    def rank(rows):
        rows = [list(map(Fraction, r)) for r in rows]
        rk = 0
        for col in range(3):
            piv = next((i for i in range(rk, len(rows)) if rows[i][col] != 0), None)
            if piv is None:
                continue
            rows[rk], rows[piv] = rows[piv], rows[rk]
            rows[rk] = [x / rows[rk][col] for x in rows[rk]]
            for i in range(len(rows)):
                if i != rk and rows[i][col] != 0:
                    c = rows[i][col]
                    rows[i] = [x - c * y for x, y in zip(rows[i], rows[rk])]
            rk += 1
        return rk

    return rank(smooth), rank(killed), smooth, killed


def test_criterion_4_r3_nonsmooth_and_analysis():
    sp = gallery_space("R3-abs")
    verdict = refute_smooth_sum_standard(
        sp,
        Subspace.from_vectors(3, [[1, 0, 0], [0, 1, 0]]),
        Subspace.from_vectors(3, [[0, 0, 1]]),
    )
    assert verdict.status == "NonSmooth"

    dual = dual_basis(sp)
    iso = maximal_isotropic(sp)
    assert dual.dim == 2
    assert iso.subspace.dim == 1 and iso.subspace.contains([0, 1, 1])

    # independent brute-force cross-check
    dual_rank, iso_rank, smooth, killed = _bruteforce_r3_dual_and_isotropic()
    assert dual_rank == dual.dim
    assert iso_rank == iso.subspace.dim
    for v in killed:
        assert iso.subspace.contains(list(v))


# -- 5. twenty random non-standard lines --------------------------------


def test_criterion_5_twenty_random_directions(fm16):
    sp = gallery_space("V2-delta")
    provider = v2_delta_axis_plots(sp, fm16)
    rng = random.Random(0)
    successes = 0
    for _ in range(20):
        a = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        b = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        if a == 0 and b == 0:
            a = Fraction(1)
        plot, verdict, w = nonstandard_subspace_witness(sp, [a, b], provider)
        assert w.contains([a, b])  # membership derivation replays
        assert verdict.status == Smoothness.NONSMOOTH
        successes += 1
    assert successes == 20


# -- 6. conditional claims under axiom A --------------------------------


def test_criterion_6_conditional_claims():
    e1 = Subspace.from_vectors(2, [[1, 0]])
    diag = Subspace.from_vectors(2, [[1, 1]])
    e2 = Subspace.from_vectors(2, [[0, 1]])

    gp = gallery_space("gamma-pair", frozenset({AXIOM_A}))
    comp = complementedness_report(gp, e1)
    assert comp.status == "NotComplemented"
    assert tuple(comp.axioms_used) == ("A",)  # exactly {A}
    sum_cert = certify_smooth_sum(gp, diag, e2)
    assert sum_cert.status == "SmoothCertified"

    w = gallery_space("W-nondecomposable", frozenset({AXIOM_A}))
    assert dual_basis(w).dim == 0
    dec = decomposability_report(w)
    assert dec.status == "NonDecomposable"
    assert tuple(dec.axioms_used) == ("A",)  # exactly {A}

    # without the axiom, both conditional claims degrade to Unknown
    assert complementedness_report(gallery_space("gamma-pair"), e1).status == "Unknown"
    assert decomposability_report(gallery_space("W-nondecomposable")).status == "Unknown"


# -- 7. kernel-image diffeomorphism checks ------------------------------


def test_criterion_7_kernel_image():
    sp = gallery_space("R3-abs")
    f = LinearMap.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 0]])
    verdict = kernel_image_check(sp, f)
    assert verdict.status == "Diffeomorphic"
    assert verdict.witness_matrix is not None
    assert verify_kernel_image_witness(sp, f, verdict.witness_matrix)

    w = gallery_space("W-nondecomposable", frozenset({AXIOM_A}))
    for rows in ([[1, 0], [0, 0]], [[0, 0], [0, 1]], [[1, 2], [2, 4]]):
        g = LinearMap.from_rows(rows)
        v = kernel_image_check(w, g)
        assert v.status == "NoDiffeomorphism"
        assert "A" in v.axioms_used


# -- 8. tag soundness on randomized arithmetic DAGs ---------------------


def test_criterion_8_tag_soundness_ten_thousand_dags():
    rng = random.Random(20260826)
    unsound = 0
    for _ in range(10_000):
        nodes = [
            TaggedReal.exact(Fraction(rng.randint(-9, 9), rng.randint(1, 9))),
            TaggedReal.exact(QSqrt2(Fraction(rng.randint(-3, 3)), Fraction(rng.randint(-3, 3)))),
        ]
        for _ in range(rng.randint(1, 10)):
            op = rng.choice(("add", "mul", "neg", "sqrt"))
            x = rng.choice(nodes)
            if op == "add":
                nodes.append(add_tagged(x, rng.choice(nodes)))
            elif op == "mul":
                nodes.append(mul_tagged(x, rng.choice(nodes)))
            elif op == "neg":
                nodes.append(neg_tagged(x))
            elif x.is_exact and x.value.sign() >= 0:
                nodes.append(sqrt_tagged(x))
        for t in nodes:
            if t.is_exact and t.tag != Tag.UNKNOWN:
                if (t.tag == Tag.RATIONAL) != t.value.is_rational:
                    unsound += 1
    assert unsound == 0


# -- 9. byte-level determinism of every scenario ------------------------


@pytest.mark.parametrize("name", SCENARIOS)
def test_criterion_9_scenario_determinism(name):
    outputs = []
    for _ in range(3):
        proc = subprocess.run(
            [sys.executable, "-m", "smoothsum.cli", "scenario", name, "--json", "--n", "8"],
            capture_output=True,
            check=True,
        )
        outputs.append(proc.stdout)
    assert outputs[0] == outputs[1] == outputs[2]
    json.loads(outputs[0])  # well-formed
