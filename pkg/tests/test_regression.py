from fractions import Fraction

import pytest

from fairpool import fit_linear, load_fixture


def test_exact_line():
    fit = fit_linear([(1, 2), (2, 4), (3, 6)])
    assert fit.slope == 2
    assert fit.intercept == 0
    assert fit.r_squared == 1


def test_constant_data_convention():
    fit = fit_linear([(1, 5), (2, 5)])
    assert fit.slope == 0
    assert fit.intercept == 5
    assert fit.r_squared == 1


def test_all_x_equal_rejected():
    with pytest.raises(ValueError):
        fit_linear([(3, 1), (3, 2), (3, 3)])
    with pytest.raises(ValueError):
        fit_linear([(3, 1)])


def test_exact_rational_arithmetic():
    fit = fit_linear([(0, "0.5"), (1, "1.5"), (2, "2.5")])
    assert fit.slope == 1
    assert fit.intercept == Fraction(1, 2)
    assert fit.r_squared == 1


def test_predict():
    fit = fit_linear([(1, 3), (2, 5)])
    assert fit.predict(10) == 21


def _rel_err(value: Fraction, target: Fraction) -> Fraction:
    return abs(value - target) / target


@pytest.mark.parametrize(
    "name",
    ["reference-gas-claim", "reference-gas-demand", "reference-gas-update"],
)
def test_benchmark_fixture_fits(name):
    case = load_fixture(name)
    fit = fit_linear(case.inputs["points"])
    expected = case.expected
    assert _rel_err(fit.slope, Fraction(expected["slope"])) <= Fraction(
        expected["slope_rel_tol"]
    )
    assert _rel_err(fit.intercept, Fraction(expected["intercept"])) <= Fraction(
        expected["intercept_rel_tol"]
    )
    assert fit.r_squared >= Fraction(expected["min_r_squared"])
