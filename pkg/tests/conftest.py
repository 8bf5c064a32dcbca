import pytest

from liyorke import kneading, dynamics, tower


@pytest.fixture(scope="session")
def fib_kd():
    return kneading.cutting_times(kneading.fibonacci_rule(), 30, name="fib")


@pytest.fixture(scope="session")
def feig_kd():
    return kneading.cutting_times(kneading.feigenbaum_rule(), 25, name="feigenbaum")


@pytest.fixture(scope="session")
def kd5():
    return kneading.cutting_times(kneading.gap_rule(5), 220, name="gap5")


@pytest.fixture(scope="session")
def example_kd():
    return kneading.cutting_times(kneading.doubled_example_rule(), 60,
                                  name="doubled-example")


@pytest.fixture(scope="session")
def fib2_map():
    """Logistic ell=2 realizing the golden-ratio cutting times through S_12 = 377."""
    kd = kneading.cutting_times(kneading.fibonacci_rule(), 12)
    return dynamics.tune_parameter("logistic", 2, kd, 12, 256)


@pytest.fixture(scope="session")
def fib2_levels(fib2_map):
    return tower.build_levels(fib2_map.map, 10_100)


@pytest.fixture(scope="session")
def fib8_map():
    """Symmetric ell=8 with golden-ratio cutting times through S_18 = 6765.

    Large critical order puts the induced walk in the positive-drift regime,
    which the circle-factor stabilization tests rely on.
    """
    kd = kneading.cutting_times(kneading.fibonacci_rule(), 18)
    return dynamics.tune_parameter("symmetric", 8, kd, 18, 1024)


@pytest.fixture(scope="session")
def fib8_levels(fib8_map):
    return tower.build_levels(fib8_map.map, 7_500)


@pytest.fixture(scope="session")
def feig_map():
    """Logistic at the period-doubling accumulation, matched through S_10 = 1024."""
    kd = kneading.cutting_times(kneading.feigenbaum_rule(), 10)
    return dynamics.tune_parameter("logistic", 2, kd, 10, 256)
