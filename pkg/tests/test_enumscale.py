import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from liyorke import algebra, enumscale, kneading
from liyorke.errors import AdmissibilityError, OdometerOverflowError


def test_encode_zero(fib_kd):
    e = enumscale.encode(0, fib_kd)
    assert set(e.bits) == {0}
    assert enumscale.decode(e) == 0


def test_encode_four_is_zeckendorf(fib_kd):
    e = enumscale.encode(4, fib_kd)
    assert e.bits[0] == 1 and e.bits[2] == 1
    assert sum(e.bits) == 2  # 4 = 1 + 3


def test_encode_cutting_time_is_unit(fib_kd, example_kd):
    for kd in (fib_kd, example_kd):
        for k in range(kd.depth):
            e = enumscale.encode(kd.S(k), kd)
            assert sum(e.bits) == 1 and e.bits[k] == 1


def test_decode_rejects_inadmissible(fib_kd):
    with pytest.raises(AdmissibilityError):
        enumscale.EnumSequence((1, 1), fib_kd)  # S_0 + S_1 = 3 = S_2: forbidden


def test_small_range_bijection_exhaustive(fib_kd, example_kd, kd5):
    """All admissible vectors of length m biject onto [0, S_m): an
    enumeration oracle independent of the greedy encoder."""
    for kd in (fib_kd, example_kd, kd5):
        m = 7
        values = []
        for bits in itertools.product((0, 1), repeat=m):
            if enumscale.admissibility_violation(bits, kd) is None:
                values.append(sum(b * kd.S(j) for j, b in enumerate(bits)))
        values.sort()
        assert values == list(range(kd.S(m)))
        # and the greedy encoder picks exactly the admissible representative
        for n in range(kd.S(m)):
            e = enumscale.encode(n, kd, length=m)
            assert enumscale.decode(e) == n


def test_add_one_examples(fib_kd):
    z = enumscale.encode(0, fib_kd)
    assert enumscale.decode(enumscale.add_one(z)) == 1
    e4 = enumscale.encode(4, fib_kd)
    e5 = enumscale.add_one(e4)
    assert sum(e5.bits) == 1 and e5.bits[3] == 1  # 5 = S_3
    for k in range(1, 21):
        e = enumscale.encode(fib_kd.S(k) - 1, fib_kd)
        up = enumscale.add_one(e)
        assert sum(up.bits) == 1 and up.bits[k] == 1


def test_add_one_chain_three_scales(fib_kd, example_kd, kd5):
    for kd in (fib_kd, example_kd, kd5):
        e = enumscale.encode(0, kd, length=12)
        for n in range(kd.S(12) - 1):
            e = enumscale.add_one(e)  # cross-checked against encode internally
            assert enumscale.decode(e) == n + 1


def test_add_one_overflow(fib_kd):
    top = enumscale.encode(fib_kd.S(5) - 1, fib_kd, length=5)
    with pytest.raises(OdometerOverflowError):
        enumscale.add_one(top)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0), st.integers(min_value=0, max_value=10 ** 6))
def test_admissibility_closure(seed, n0):
    kd = kneading.cutting_times(kneading.fibonacci_rule(), 40)
    n = n0
    e = enumscale.encode(n, kd)
    e2 = enumscale.add_one(e, cross_check=False)
    assert enumscale.admissibility_violation(e2.bits, kd) is None
    assert enumscale.decode(e2) == n + 1


def test_partial_sum_bound(fib_kd, kd5):
    rng = random.Random(7)
    for kd in (fib_kd, kd5):
        for _ in range(200):
            e = enumscale.random_admissible(kd, 20, rng)
            acc = 0
            for j in range(len(e.bits)):
                acc += e.bits[j] * kd.S(j)
                assert acc < kd.S(j + 1)


def test_order_compatibility(fib_kd):
    # decode is strictly monotone along the odometer orbit of <0>
    e = enumscale.encode(0, fib_kd, length=10)
    prev = 0
    for _ in range(80):
        e = enumscale.add_one(e)
        v = enumscale.decode(e)
        assert v == prev + 1
        prev = v


GOLDEN = algebra.leading_root(2, 1e-40)


def test_project_zero(fib_kd):
    z = enumscale.encode(0, fib_kd)
    assert enumscale.project(z, GOLDEN.to_mpf(120)).value == 0.0


def test_project_single_term(fib_kd):
    one = enumscale.encode(1, fib_kd)
    res = enumscale.project(one, GOLDEN.to_mpf(120))
    # fp(golden) = golden - 2 = -0.381966...; mod 1 -> 0.618033...
    assert res.value == pytest.approx(0.6180339887, abs=1e-9)


def test_project_tail_bound(fib_kd):
    e = enumscale.encode(4, fib_kd)
    res = enumscale.project(e, GOLDEN.to_mpf(120), trunc=10, decay=(1.0, 0.619))
    assert res.tail_bound == pytest.approx(0.619 ** 10 / (1 - 0.619), rel=1e-12)


def test_semiconjugacy_residual():
    """Rotation intertwining: project(add_one(e)) = project(e) + rho mod 1,
    up to the geometric tail of the truncation."""
    kd = kneading.cutting_times(kneading.fibonacci_rule(), 62, name="fib")
    prec = kd.S(60).bit_length() + 64
    rho = GOLDEN.to_mpf(prec)
    rho_frac = float(GOLDEN.to_mpf(120) % 1)
    rng = random.Random(42)
    worst = 0.0
    for _ in range(300):
        e = enumscale.random_admissible(kd, 55, rng)
        p1 = enumscale.project(e, rho, trunc=60).value
        p2 = enumscale.project(enumscale.add_one(e), rho, trunc=60).value
        d = abs((p2 - p1 - rho_frac) % 1.0)
        worst = max(worst, min(d, 1.0 - d))
    assert worst < 1e-8


def test_text_round_trip(fib_kd):
    e = enumscale.encode(12, fib_kd)
    line = enumscale.to_text(e)
    back = enumscale.from_text(line, fib_kd)
    assert back.bits == e.bits
