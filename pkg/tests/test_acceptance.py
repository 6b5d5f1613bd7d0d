"""Every acceptance criterion at its stated scale, one pass/fail line each.

The lines are printed as each test runs (visible with ``-s``) and repeated in
an "acceptance criteria" section of the terminal summary.
"""

from math import pi

import pytest

from nodal3d.harness import acceptance
from nodal3d.harness.ensemble import EnsembleCache


@pytest.fixture(scope="module")
def cache():
    return EnsembleCache()


@pytest.fixture
def check(criterion_lines):
    def run(res):
        line = res.line()
        criterion_lines.append(line)
        print(line)
        assert res.passed, line
    return run


def test_criterion_01_isotropic_expectation(cache, check):
    check(acceptance.criterion_1(cache=cache))


def test_criterion_02_vorticity_moment(check):
    check(acceptance.criterion_2())


def test_criterion_03_anisotropic_expectation(cache, check):
    check(acceptance.criterion_3(cache=cache))


def test_criterion_04_plancherel_identity(check):
    check(acceptance.criterion_4())


def test_criterion_05_second_chaos_coefficients(check):
    check(acceptance.criterion_5())


def test_criterion_06_monochromatic_decay(check):
    check(acceptance.criterion_6())


def test_criterion_07_power_law_scaling(check):
    check(acceptance.criterion_7())


def test_criterion_08_clt_diagnostics(cache, check):
    check(acceptance.criterion_8(cache=cache))


def test_criterion_09_nodal_extractor_oracles(check):
    check(acceptance.criterion_9())


def test_criterion_10_mehler_engine(check):
    check(acceptance.criterion_10())


def test_criterion_11_perturbation_audit(check):
    res = acceptance.criterion_11()
    check(res)
    for key in ("paper_value", "oracle_value", "fd_partials"):
        assert key in res.details


def test_wrong_expectation_law_is_caught(cache):
    # a factor-of-two error in the law must not slip through; reuses the cached ensembles
    res = acceptance.criterion_1(cache=cache, expected_fn=lambda lam, vol: lam * vol / (2 * pi))
    assert not res.passed
    for name in ("bargmann_fock", "monochromatic"):
        assert res.details[name]["relative_error"] > 0.5
