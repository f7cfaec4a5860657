import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schur_order.errors import DomainError, NotAnalyticError, NotDifferentiableError, PreconditionError
from schur_order.scalarfn import (AbsPower, Derivative, Exp, NegLog1m, NegPower, PowerSeries, Reflected,
                                  Scaled, Shifted, SignedPower, Sum, certify_class_by_coeffs,
                                  check_midpoint_convexity, check_phi_class, check_spos2, div_diff1,
                                  div_diff2, even_odd_split, falling, monomial)
from schur_order.verdicts import ClassVerdict, SClass


def test_power_values():
    assert AbsPower(2.5)(-1.0) == pytest.approx(1.0)
    assert SignedPower(1.5)(-4.0) == pytest.approx(-8.0)
    assert AbsPower(0.0)(0.0) == 1.0 and AbsPower(0.0)(-0.3) == 1.0
    assert SignedPower(0.0)(-2.0) == -1.0 and SignedPower(0.0)(0.0) == 0.0


def test_power_derivatives():
    assert AbsPower(2.5).deriv(-1.0, 1) == pytest.approx(-2.5)
    assert SignedPower(2.5).deriv(-1.0, 1) == pytest.approx(2.5)
    assert AbsPower(2.0).deriv(0.0, 2) == 2.0
    assert SignedPower(3.0).deriv(0.0, 3) == 6.0
    assert SignedPower(3.0).deriv(0.0, 2) == 0.0
    assert AbsPower(2.5).deriv(0.0, 2) == 0.0
    with pytest.raises(NotDifferentiableError):
        AbsPower(2.5).deriv(0.0, 3)
    with pytest.raises(NotDifferentiableError):
        AbsPower(1.0).deriv(0.0, 1)
    assert AbsPower(0.0).deriv(0.0, 1) == 0.0


def test_analytic_special_functions():
    # independent oracle: direct series summation
    assert NegLog1m()(0.5) == pytest.approx(sum(0.5 ** k / k for k in range(1, 200)), abs=1e-14)
    assert NegLog1m()(0.5) == pytest.approx(math.log(2.0), abs=1e-15)
    assert NegPower(0.5)(0.75) == pytest.approx(-0.5)
    assert NegPower(0.5).taylor_coeff(0) == -1.0
    assert NegPower(0.5).taylor_coeff(2) == pytest.approx(0.125)
    assert NegPower(0.5).taylor_coeff(1) == pytest.approx(0.5)
    assert Exp().taylor_coeff(5) == pytest.approx(1 / 120)
    assert NegLog1m().taylor_coeff(0) == 0.0 and NegLog1m().taylor_coeff(7) == pytest.approx(1 / 7)


def test_domains():
    with pytest.raises(DomainError):
        NegLog1m()(1.0)
    with pytest.raises(DomainError):
        NegLog1m()(-1.0)
    with pytest.raises(DomainError):
        PowerSeries((1.0, 1.0), radius=2.0)(np.array([0.0, 2.5]))
    assert PowerSeries((1.0, 2.0, 3.0))(2.0) == pytest.approx(17.0)
    assert Shifted(NegLog1m(), 0.25).alpha == 0.75


def test_invalid_parameters():
    for make in (lambda: AbsPower(-1.0), lambda: NegPower(0.0), lambda: NegPower(1.0),
                 lambda: PowerSeries(()), lambda: PowerSeries((1.0,), radius=0.0),
                 lambda: Shifted(NegLog1m(), 1.0), lambda: Derivative(Exp(), 0)):
        with pytest.raises(PreconditionError):
            make()


def test_taylor_needs_analytic():
    with pytest.raises(NotAnalyticError):
        AbsPower(1.5).taylor_coeff(0)
    assert AbsPower(2.0).taylor_coeff(2) == 1.0
    assert SignedPower(3.0).taylor_coeff(3) == 1.0
    assert SignedPower(3.0).taylor_coeff(1) == 0.0


def test_shifted_taylor_is_expansion_at_shift():
    f = Shifted(Exp(), 1.0)
    assert f(0.0) == pytest.approx(math.e)
    assert f.taylor_coeff(3) == pytest.approx(math.e / 6)
    g = Shifted(monomial(3), 2.0)
    assert [g.taylor_coeff(k) for k in range(5)] == pytest.approx([8.0, 12.0, 6.0, 1.0, 0.0])


def test_combinators_and_arithmetic():
    f = Exp() + 2.0 * NegLog1m()
    assert f.alpha == 1.0
    assert f(0.5) == pytest.approx(math.exp(0.5) + 2 * math.log(2))
    assert isinstance(Sum((Sum((Exp(), Exp())), Exp())).terms, tuple)
    assert len(Sum((Sum((Exp(), Exp())), Exp())).terms) == 3
    assert (Exp() - Exp())(0.3) == pytest.approx(0.0)
    assert (-Exp())(0.0) == -1.0
    assert Reflected(monomial(3))(2.0) == -8.0
    assert Reflected(monomial(3)).taylor_coeff(3) == -1.0


def test_falling_factorial():
    assert falling(2.5, 0) == 1.0
    assert falling(2.5, 3) == pytest.approx(2.5 * 1.5 * 0.5)
    assert falling(3, 4) == 0.0


FUNCTIONS = [
    (Exp(), 0.7), (NegLog1m(), 0.4), (NegLog1m(), -0.6), (NegPower(0.5), 0.3),
    (AbsPower(2.5), -0.8), (AbsPower(3.5), 1.3), (SignedPower(2.5), -0.8), (SignedPower(1.5), 0.9),
    (PowerSeries((0.0, -1.0, 1.0, 0.5)), 0.4), (Shifted(NegLog1m(), 0.2), 0.3),
    (Scaled(3.0, Exp()), -0.4), (Reflected(NegLog1m()), 0.2), (Derivative(SignedPower(3.5), 1), -0.6),
    (Derivative(Exp(), 2), 0.1), (Sum((Exp(), AbsPower(2.5))), 0.7),
]


@pytest.mark.parametrize("f,x", FUNCTIONS, ids=lambda v: getattr(v, "describe", lambda: repr(v))())
def test_derivatives_against_finite_differences(f, x):
    # central differences with step 1e-4 have O(h^2) error, relative 1e-6 is ample
    h = 1e-4
    fd1 = (f(x + h) - f(x - h)) / (2 * h)
    fd2 = (f.deriv(x + h, 1) - f.deriv(x - h, 1)) / (2 * h)
    assert f.deriv(x, 1) == pytest.approx(fd1, rel=1e-6, abs=1e-9)
    assert f.deriv(x, 2) == pytest.approx(fd2, rel=1e-6, abs=1e-9)
    d = f.derivative()
    assert d(x) == pytest.approx(f.deriv(x, 1), rel=1e-12)
    assert d.deriv(x, 1) == pytest.approx(f.deriv(x, 2), rel=1e-10)


@pytest.mark.parametrize("f", [Exp(), NegLog1m(), NegPower(0.5), PowerSeries((1.0, -2.0, 0.5)),
                               Shifted(Exp(), -0.3), AbsPower(2.0), SignedPower(3.0)],
                         ids=lambda f: f.describe())
def test_taylor_coefficients_against_derivatives(f):
    for k in range(6):
        assert f.taylor_coeff(k) == pytest.approx(f.deriv(0.0, k) / math.factorial(k), rel=1e-10, abs=1e-14)


def test_certificate_fixtures():
    for cls in SClass:
        assert certify_class_by_coeffs(Exp(), cls).holds
        assert certify_class_by_coeffs(NegLog1m(), cls).holds
        assert certify_class_by_coeffs(monomial(3), cls).holds
    f = PowerSeries((0.0, -1.0, 1.0))
    v = certify_class_by_coeffs(f, "S-pos")
    assert not v.holds and v.witness == {"k": 1, "coefficient": -1.0}
    assert not certify_class_by_coeffs(f, "S-mono").holds
    assert certify_class_by_coeffs(f, "S-conv").holds
    assert not certify_class_by_coeffs(NegPower(0.5) * -1.0, "S-conv").holds
    with pytest.raises(NotAnalyticError):
        certify_class_by_coeffs(AbsPower(1.5), "S-pos")


def test_verdict_invariant():
    with pytest.raises(ValueError):
        ClassVerdict(True, 0.0, witness={"x": 1})


def test_divided_difference_coincident_points():
    assert div_diff1(Exp(), 1.0, 0.0) == pytest.approx(math.e - 1)
    assert div_diff1(Exp(), 0.3, 0.3) == pytest.approx(math.exp(0.3))
    assert div_diff2(Exp(), 1.0, 0.0, 0.0) == pytest.approx(math.e - 2)
    assert div_diff2(Exp(), 0.2, 0.2, 0.2) == pytest.approx(math.exp(0.2) / 2)
    assert div_diff2(monomial(2), 0.1, 0.1 + 1e-9, 7.0) == pytest.approx(1.0, abs=1e-10)


finite = st.floats(-3.0, 3.0, allow_nan=False)


@given(finite, finite, finite)
def test_divided_differences_of_low_degree_monomials(a, b, c):
    x2, x3 = monomial(2), monomial(3)
    assert div_diff1(x2, a, b) == pytest.approx(a + b, abs=1e-10)
    assert div_diff1(x3, a, b) == pytest.approx(a * a + a * b + b * b, abs=1e-10 * 27)
    assert div_diff2(x2, a, b, c) == pytest.approx(1.0, abs=1e-10)
    assert div_diff2(x3, a, b, c) == pytest.approx(a + b + c, abs=1e-9)


@given(finite, finite, finite)
def test_second_divided_difference_is_symmetric(a, b, c):
    f = Exp()
    v = div_diff2(f, a, b, c)
    for args in ((b, a, c), (c, b, a), (a, c, b)):
        assert div_diff2(f, *args) == pytest.approx(v, rel=1e-6, abs=1e-9)


def test_phi_class_fixtures():
    for f in (AbsPower(0.5), AbsPower(2.5), Exp(), NegLog1m(), monomial(3)):
        assert check_phi_class(f).holds, f.describe()
    v = check_phi_class(PowerSeries((0.0,)))
    assert v.holds and v.details.get("identically_zero")
    assert not check_phi_class(PowerSeries((0.0, -1.0))).holds
    assert not check_phi_class(Reflected(Exp())).holds


def test_phi_class_rejects_concave_log_profile():
    # f(x) = x(2-x) on (0,1): log f(e^u) = u + log(2 - e^u) is strictly concave,
    # so the square-root submultiplicativity fails; brute force confirms a grid pair
    f = PowerSeries((0.0, 2.0, -1.0), radius=1.0)
    grid = np.linspace(0.05, 0.95, 40)
    s, t = 0.05, 0.95
    assert f(math.sqrt(s * t)) > math.sqrt(f(s) * f(t))
    v = check_phi_class(f, grid)
    assert not v.holds and v.witness["check"] == "sqrt-submultiplicative"


def test_spos2_fixtures():
    assert check_spos2(AbsPower(0.5)).holds
    assert check_spos2(SignedPower(1.5)).holds
    assert check_spos2(Exp()).holds
    assert not check_spos2(Reflected(Exp())).holds
    assert not check_spos2(PowerSeries((1.0, -1.0))).holds
    assert check_spos2(AbsPower(0.0)).holds


def test_grid_must_be_inside_domain():
    with pytest.raises(PreconditionError):
        check_phi_class(NegLog1m(), [0.5, 1.0])
    with pytest.raises(PreconditionError):
        check_midpoint_convexity(np.exp, [])


def test_midpoint_convexity():
    assert check_midpoint_convexity(np.exp, np.linspace(-2, 2, 30)).holds
    assert not check_midpoint_convexity(np.sin, np.linspace(0, 3, 30)).holds


@pytest.mark.parametrize("f", [Exp(), NegLog1m(), AbsPower(1.5), SignedPower(2.5), PowerSeries((1.0, 2.0, 3.0))],
                         ids=lambda f: f.describe())
def test_even_odd_split_recombines(f):
    even, odd = even_odd_split(f)
    x = np.linspace(-0.9, 0.9, 19)
    assert np.allclose(even(x) + odd(x), f(x), atol=1e-14)
    assert np.allclose(even(-x), even(x), atol=1e-14)
    assert np.allclose(odd(-x), -odd(x), atol=1e-14)
