import math
import random

import mpmath as mp
import pytest

from liyorke import algebra, kneading
from liyorke.errors import PrecisionError


def test_quintic_factorization_exact():
    prod = algebra.poly_mul([1, -1, 1], [1, 0, -1, -1])
    assert prod == [1, -1, 0, 0, 0, -1]


def test_poly_divmod_quintic():
    q, r = algebra.poly_divmod([1, -1, 0, 0, 0, -1], [1, -1, 1])
    assert q == [1, 0, -1, -1] and r == []


def test_degree11_divisible_by_unit_circle_factor():
    poly11 = algebra.recursion_poly(11)
    q, r = algebra.poly_divmod(poly11, [1, -1, 1])
    assert r == []
    assert q == [1, 0, -1, -1, 0, 1, 1, 0, -1, -1]


def test_leading_root_digits():
    # independently verified against mpmath.polyroots below
    assert float(algebra.leading_root(2, 1e-11)) == pytest.approx(
        1.6180339887, abs=1e-9)
    assert float(algebra.leading_root(3, 1e-11)) == pytest.approx(
        1.4655712319, abs=1e-9)
    assert float(algebra.leading_root(5, 1e-11)) == pytest.approx(
        1.3247179572, abs=1e-9)


def test_leading_root_matches_polyroots_oracle():
    for d in (2, 3, 4, 5, 6):
        encl = algebra.leading_root(d, 1e-30)
        with mp.workprec(150):
            roots = mp.polyroots([mp.mpf(c) for c in algebra.recursion_poly(d)])
            lead = max((r.real for r in roots if abs(r.imag) < 1e-20 and r.real > 1))
        assert abs(float(encl) - float(lead)) < 1e-25
        assert float(encl.width) <= 1e-30


def test_leading_root_residual_bound():
    for d in (2, 3, 4, 5):
        encl = algebra.leading_root(d, 1e-20)
        val = algebra.poly_eval(tuple(algebra.recursion_poly(d)), encl.mid)
        # |p(mid)| <= max|p'| on [1,2] * width; crude bound max|p'| <= d 2^d
        assert abs(float(val)) <= d * 2 ** d * float(encl.width)


def test_quintic_leading_equals_plastic_cubic_root():
    quintic = algebra.leading_root(5, 1e-30)
    from fractions import Fraction
    cubic = algebra.PolyRoot((1, 0, -1, -1), Fraction(1), Fraction(2)).refined(
        Fraction(1, 10 ** 30))
    assert abs(float(quintic) - float(cubic)) < 1e-28


def test_pisot_driven_quadratic():
    rep = algebra.is_pisot_driven([1, -1, -1])
    assert rep.pisot
    assert rep.moduli[0][0] == pytest.approx(0.6180339887, abs=1e-8)


def test_pisot_driven_cubic():
    rep = algebra.is_pisot_driven(algebra.recursion_poly(3))
    assert rep.pisot
    for m, _ in rep.moduli:
        assert m == pytest.approx(0.826031, abs=1e-5)


def test_pisot_driven_quartic():
    rep = algebra.is_pisot_driven(algebra.recursion_poly(4))
    assert rep.pisot


def test_not_pisot_driven_quintic():
    rep = algebra.is_pisot_driven(algebra.recursion_poly(5))
    assert not rep.pisot
    unit = [m for m, _ in rep.moduli if abs(m - 1.0) < 1e-12]
    assert len(unit) == 2  # the unit-circle factor's pair


def test_fp_examples():
    assert algebra.fp(2.0) == 0.0
    assert algebra.fp(0.5) == -0.5  # half-integer convention
    assert algebra.fp(-0.5) == -0.5
    golden = float(algebra.leading_root(2, 1e-15))
    assert algebra.fp(golden) == pytest.approx(-0.3819660113, abs=1e-9)


def test_fp_periodicity():
    rng = random.Random(3)
    for _ in range(10_000):
        x = rng.uniform(-50, 50)
        assert algebra.fp(x + 1) == pytest.approx(algebra.fp(x), abs=1e-12)


def test_fp_range_mpf():
    with mp.workprec(80):
        for x in (mp.mpf("3.5"), mp.mpf("-2.5"), mp.mpf("0.49999"), mp.mpf(7)):
            v = algebra.fp(x)
            assert -mp.mpf(1) / 2 <= v < mp.mpf(1) / 2


def test_fp_of_multiple_consistency():
    golden = algebra.leading_root(2, 1e-12)
    kd = kneading.cutting_times(kneading.fibonacci_rule(), 100)
    v = algebra.fp_of_multiple(golden, kd.S(100))
    # fp(rho S_k) ~ +-rho^-k: far below double precision range but well
    # within the guarded mantissa
    assert abs(float(v)) < 1e-20


def test_decay_summable_d2():
    kd = kneading.cutting_times(kneading.fibonacci_rule(), 60)
    rep = algebra.decay_diagnostics(kd, algebra.leading_root(2, 1e-30), B=2, k_max=60)
    assert rep.verdict == "summable-looking"
    assert rep.rate <= 0.95
    assert rep.rate == pytest.approx(1 / 1.6180339887, abs=0.05)


def test_decay_summable_d3_d4():
    for d, B in ((3, 3), (4, 3)):
        kd = kneading.cutting_times(kneading.gap_rule(d), 60)
        rep = algebra.decay_diagnostics(kd, algebra.leading_root(d, 1e-30), B=B, k_max=60)
        assert rep.verdict == "summable-looking", (d, rep.rate)


def test_decay_not_summable_gap5():
    kd = kneading.cutting_times(kneading.gap_rule(5), 60)
    rep = algebra.decay_diagnostics(kd, algebra.leading_root(5, 1e-30), B=5, k_max=60)
    assert rep.verdict == "not-summable-looking"
    assert rep.test_window_max >= 0.02


def test_decay_lines_format():
    kd = kneading.cutting_times(kneading.fibonacci_rule(), 20)
    rep = algebra.decay_diagnostics(kd, algebra.leading_root(2, 1e-30), B=2, k_max=20)
    lines = rep.lines()
    assert len(lines) == 20
    k, term, partial = lines[4].split()
    assert int(k) == 5
    assert math.isclose(float(partial), sum(rep.terms[:5]), rel_tol=1e-12)


def test_six_periodic_relation_via_division():
    """The corrected relation for gap (6m-1) rules comes from dividing the
    recursion polynomial by the unit-circle factor; residuals vanish."""
    for m in (1, 2):
        d = 6 * m - 1
        kd = kneading.cutting_times(kneading.gap_rule(d), 200)
        quot, rem = algebra.poly_divmod(algebra.recursion_poly(d), [1, -1, 1])
        assert rem == []
        deg = len(quot) - 1
        for k in range(deg + d, 201):
            acc = sum(quot[i] * kd.S(k - i) for i in range(len(quot)))
            assert acc == kneading.six_periodic_correction(k), (m, k)
