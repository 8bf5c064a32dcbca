import pytest
from hypothesis import given, settings, strategies as st

from liyorke import kneading
from liyorke.errors import DepthError, InputError


# hand-evaluated recursions, frozen
FIB_S = [1, 2, 3, 5, 8, 13]
FEIG_S = [1, 2, 4, 8, 16]
GAP5_S = [1, 2, 3, 4, 5, 6, 8, 11, 15, 20, 26, 34]
EXAMPLE_S = [1, 2, 3, 4, 6, 8, 10, 12, 16, 22, 30]


def test_cutting_times_fibonacci():
    kd = kneading.cutting_times(kneading.gap_rule(2), 5)
    assert list(kd.cutting_times) == FIB_S


def test_cutting_times_feigenbaum():
    kd = kneading.cutting_times(kneading.gap_rule(1), 4)
    assert list(kd.cutting_times) == FEIG_S


def test_cutting_times_gap5():
    kd = kneading.cutting_times(kneading.gap_rule(5), 11)
    assert list(kd.cutting_times) == GAP5_S


def test_cutting_times_doubled_example():
    kd = kneading.cutting_times(kneading.doubled_example_rule(), 10)
    assert list(kd.cutting_times) == EXAMPLE_S
    # the rule takes over with S_k = S_{k-1} + S_{k-5} from k = 8
    for k in range(8, 11):
        assert kd.S(k) == kd.S(k - 1) + kd.S(k - 5)


def test_rejects_bad_rule():
    with pytest.raises(InputError):
        kneading.cutting_times(kneading.QRule(table=(1,), name="bad"), 1)  # Q(1) >= 1
    with pytest.raises(InputError):
        kneading.cutting_times(kneading.QRule(table=(0, 2)), 2)  # Q(2) >= 2
    with pytest.raises(InputError):
        kneading.cutting_times(kneading.QRule(table=(0,)), 5)  # undefined past table


def test_recursion_exactness_large():
    # no overflow: exact integers far past 64-bit range
    kd = kneading.cutting_times(kneading.fibonacci_rule(), 300)
    for k in range(1, 301):
        assert kd.S(k) - kd.S(k - 1) == kd.S(kd.Q(k))
    assert kd.S(300) > 2 ** 200


def test_beta_examples(fib_kd):
    assert kneading.beta(4, fib_kd) == 1          # largest S below 4 is 3
    assert kneading.beta(2, fib_kd) == 1          # only S_0 = 1 below 2
    for k in range(1, fib_kd.depth + 1):          # beta(S_k) = S_{Q(k)}
        assert kneading.beta(fib_kd.S(k), fib_kd) == fib_kd.S(fib_kd.Q(k))


def test_beta_range_errors(fib_kd):
    with pytest.raises(InputError):
        kneading.beta(1, fib_kd)
    with pytest.raises(DepthError):
        kneading.beta(fib_kd.S(fib_kd.depth) + 1, fib_kd)


def test_q_from_cutting_times_examples():
    kd = kneading.q_from_cutting_times([1, 2, 4, 8])
    assert [kd.Q(k) for k in (1, 2, 3)] == [0, 1, 2]
    kd = kneading.q_from_cutting_times([1, 2, 3, 5, 8])
    assert [kd.Q(k) for k in (1, 2, 3, 4)] == [0, 0, 1, 2]
    kd = kneading.q_from_cutting_times([1, 2, 3, 4, 6, 8, 10, 12, 16])
    assert kd.Q(8) == 3


def test_q_from_cutting_times_rejects():
    with pytest.raises(InputError, match="S_3"):
        kneading.q_from_cutting_times([1, 2, 4, 11])  # 7 is not a cutting time
    with pytest.raises(InputError):
        kneading.q_from_cutting_times([2, 3])


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_round_trip_random_rules(data):
    n = data.draw(st.integers(min_value=1, max_value=40))
    table = tuple(
        data.draw(st.integers(min_value=0, max_value=k - 1), label=f"Q({k})")
        for k in range(1, n + 1)
    )
    kd = kneading.cutting_times(kneading.QRule(table=table), n)
    back = kneading.q_from_cutting_times(list(kd.cutting_times))
    assert [back.Q(k) for k in range(1, n + 1)] == list(table)


def test_renormalizable_feigenbaum(feig_kd):
    v = kneading.is_renormalizable(feig_kd, 20)
    assert v.renormalizable and v.k == 1 and v.period == 2
    # every k witnesses for the doubling rule
    for k in range(1, 10):
        assert feig_kd.Q(k + 1) == k


def test_renormalizable_fibonacci(fib_kd):
    v = kneading.is_renormalizable(fib_kd, 30)
    assert not v.renormalizable
    assert "no-within-horizon" in str(v)


def test_renormalizable_doubled_example(example_kd):
    v = kneading.is_renormalizable(example_kd, 50)
    assert not v.renormalizable


def test_relation_5fib_spec_rows(kd5):
    rows = {k: r for k, *_, r in kneading.check_relation_5fib(kd5, range(3, 12))}
    assert kd5.S(8) == 15 and kd5.S(6) + kd5.S(5) == 14
    assert kneading.six_periodic_correction(8) == 1
    assert kd5.S(10) == 26 and kd5.S(8) + kd5.S(7) == 26
    assert kd5.S(11) == 34 and kd5.S(9) + kd5.S(8) == 35
    assert kneading.six_periodic_correction(11) == -1
    assert all(r == 0 for r in rows.values())


def test_relation_5fib_full_range(kd5):
    rows = kneading.check_relation_5fib(kd5, range(3, 201))
    assert all(res == 0 for _, _, _, res in rows)


def test_max_gap_detector():
    for d in (2, 3, 4, 5, 7):
        kd = kneading.cutting_times(kneading.gap_rule(d), 40)
        assert kneading.max_gap(kd) == d


def test_serialization_round_trip(fib_kd, example_kd):
    for kd in (fib_kd, example_kd):
        text = kneading.to_text(kd)
        assert text.startswith("#kneading v1")
        back = kneading.from_text(text)
        assert back.cutting_times == kd.cutting_times
        assert [back.Q(k) for k in range(1, kd.depth + 1)] == [
            kd.Q(k) for k in range(1, kd.depth + 1)
        ]


def test_from_text_rejects_garbage():
    with pytest.raises(InputError):
        kneading.from_text("no header\n1 2 3\n")
