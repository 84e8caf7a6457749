"""The thirteen acceptance criteria at their stated tolerances and time limits.

Each criterion runs once per session; the terminal summary prints one
PASS/FAIL line per criterion.  Criterion 9 is additionally split into its
(gamma, b) cases so the failing combinations are visible individually.
"""

import pytest

from discrete_hardy.experiments import criteria as cr

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="session")
def criterion(acceptance_results):
    def get(cid):
        if cid not in acceptance_results:
            acceptance_results[cid] = cr.ALL[cid]()
        return acceptance_results[cid]

    return get


def _assert_ok(result):
    assert result.passed, result.line()
    assert result.within_time, f"runtime {result.runtime:.2f}s over {result.runtime_limit}s"


def test_01_extremizer_residual(criterion):
    _assert_ok(criterion(1))


def test_02_propagator_equivalence(criterion):
    _assert_ok(criterion(2))


def test_03_sharpness_constant(criterion):
    _assert_ok(criterion(3))


def test_04_heat_kernel_normalisation(criterion):
    _assert_ok(criterion(4))


def test_05_norm_conservation(criterion):
    _assert_ok(criterion(5))


def test_06_scattering_sanity(criterion):
    _assert_ok(criterion(6))


def test_07_type_estimator(criterion):
    _assert_ok(criterion(7))


def test_08_multiplier_relation(criterion):
    _assert_ok(criterion(8))


@pytest.mark.parametrize("gamma", cr.BRIDGE_GAMMAS)
@pytest.mark.parametrize("b", cr.BRIDGE_BS)
def test_09_bridge_inequalities(criterion, gamma, b):
    result = criterion(9)
    assert result.within_time
    case = next(c for c in result.cases if (c["gamma"], c["b"]) == (gamma, b))
    assert case["passed"], case


def test_10_quadratic_form(criterion):
    _assert_ok(criterion(10))


def test_11_energy_estimate(criterion):
    _assert_ok(criterion(11))


def test_12_measured_log_convexity(criterion):
    _assert_ok(criterion(12))


def test_13_divergence_mechanism(criterion):
    _assert_ok(criterion(13))
