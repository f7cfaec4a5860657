import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schur_order.entrywise import apply_entrywise, functional_calculus, schur_power, schur_product, series_entrywise
from schur_order.errors import DomainError
from schur_order.linalg import is_psd, ones
from schur_order.scalarfn import AbsPower, Exp, NegLog1m, NegPower, PowerSeries, SignedPower, monomial


def _gram(rng, n, scale=1.0):
    g = rng.standard_normal((n, n))
    return scale * g.T @ g / n


def test_entrywise_versus_spectral_on_ones():
    J = ones(2)
    assert np.allclose(apply_entrywise(monomial(2), J), J)
    assert np.allclose(functional_calculus(monomial(2), J), 2 * J)
    A = 0.5 * J
    assert np.allclose(apply_entrywise(AbsPower(0.5), A), math.sqrt(0.5) * J)
    assert np.allclose(functional_calculus(AbsPower(0.5), A), 0.5 * J, atol=1e-15)


def test_entrywise_domain_error_names_entry():
    A = np.array([[0.1, 0.2], [0.2, 1.0]])
    with pytest.raises(DomainError, match=r"\(1, 1\)"):
        apply_entrywise(NegLog1m(), A)


def test_functional_calculus_domain_uses_eigenvalues():
    A = 0.6 * ones(2)   # entries inside (-1, 1) but eigenvalue 1.2 is not
    apply_entrywise(NegLog1m(), A)
    with pytest.raises(DomainError):
        functional_calculus(NegLog1m(), A)


def test_functional_calculus_matches_matrix_exponential_series(rng):
    A = 0.3 * (rng.standard_normal((4, 4)))
    A = A + A.T
    term, total = np.eye(4), np.eye(4)
    for k in range(1, 40):
        term = term @ A / k
        total = total + term
    assert np.allclose(functional_calculus(Exp(), A), total, atol=1e-12)


def test_schur_helpers():
    A = np.array([[1.0, 2.0], [2.0, 3.0]])
    assert np.array_equal(schur_power(A, 0), ones(2))
    assert np.array_equal(schur_power(A, 3), A ** 3)
    assert np.array_equal(schur_product(A, A), A * A)
    with pytest.raises(DomainError):
        schur_product(A, np.eye(3))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_schur_product_of_psd_is_psd(rng, n):
    for _ in range(100):
        assert is_psd(schur_product(_gram(rng, n), _gram(rng, n)))[0]


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_entrywise_analytic_with_nonnegative_coefficients_keeps_psd(rng, n):
    for _ in range(100):
        A = _gram(rng, n)
        A = 0.9 * A / np.max(np.abs(A))
        for f in (Exp(), NegLog1m(), monomial(3)):
            assert is_psd(apply_entrywise(f, A))[0]


@pytest.mark.parametrize("f", [Exp(), NegLog1m(), NegPower(0.5)], ids=lambda f: f.describe())
def test_series_converges_within_reported_tail(rng, f):
    for _ in range(20):
        A = _gram(rng, 3)
        A = rng.uniform(0.1, 0.9) * A / np.max(np.abs(A))
        approx, tail = series_entrywise(f, A)
        assert np.max(np.abs(approx - apply_entrywise(f, A))) <= tail + 1e-13


def test_series_from_coefficients():
    A = np.array([[0.5, 0.1], [0.1, 0.2]])
    out, tail = series_entrywise([1.0, 2.0, 3.0], A)
    assert np.allclose(out, 1 + 2 * A + 3 * A * A) and tail == 0.0
    with pytest.raises(DomainError):
        series_entrywise([1.0], A, radius=0.4)


@given(st.floats(0.0, 4.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_power_entrywise_is_symmetric(p, a, b):
    A = np.array([[a, b], [b, a]])
    for f in (AbsPower(p), SignedPower(p)):
        out = apply_entrywise(f, A)
        assert np.array_equal(out, out.T)
