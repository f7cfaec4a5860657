import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schur_order.errors import DomainError, PreconditionError
from schur_order.majorization import (dec_rearrange, majorize, norm_inequality_report, verify_diagonal_lipschitz_bound,
                                      verify_diagonal_second_order_bound, verify_divided_difference_bound,
                                      verify_second_order_bound, verify_spectral_domination, weak_majorize)
from schur_order.order_testing import sample_psd_pair, sample_psd_spectral
from schur_order.scalarfn import AbsPower, Exp, NegLog1m, SignedPower, monomial

vectors = st.integers(1, 6).flatmap(lambda n: st.lists(st.floats(-100, 100), min_size=n, max_size=n))


def test_weak_majorization_fixtures():
    assert weak_majorize([1, 1], [2, 0]).holds
    assert majorize([1, 1], [2, 0]).holds
    v = weak_majorize([2, 0], [1, 1])
    assert not v.holds and v.first_violation == 1
    assert np.allclose(v.prefix_margins, [-1, 0])
    m = majorize([1, 0], [2, 0])
    assert weak_majorize([1, 0], [2, 0]).holds and not m.holds
    assert m.details["total_sum_gap"] == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        weak_majorize([1, 2], [1, 2, 3])
    with pytest.raises(DomainError):
        dec_rearrange([1.0, math.nan])


@given(vectors)
def test_majorization_is_reflexive_and_permutation_invariant(a):
    assert majorize(a, a).holds
    assert majorize(a, a[::-1]).holds


@given(vectors)
def test_mean_vector_is_majorized(a):
    mean = [sum(a) / len(a)] * len(a)
    assert majorize(mean, a).holds


@given(vectors, st.floats(0, 10))
def test_weak_majorization_under_increase(a, bump):
    b = [x + bump for x in a]
    assert weak_majorize(a, b).holds


def test_closing_fixture_incomparable():
    f = monomial(2)
    A = np.array([[1.0, 1, 0], [1, 1, 0], [0, 0, 0]])
    B = np.diag([2.0, 0, 0])
    dd = verify_divided_difference_bound(f, A, B)
    lip = verify_diagonal_lipschitz_bound(f, A, B)
    r = math.sqrt(2)
    assert np.allclose(dd.rhs, [4 * r, 0, 0], atol=1e-9)
    assert np.allclose(lip.rhs, [3 * r, 3 * r, 0], atol=1e-9)
    assert not weak_majorize(dd.rhs, lip.rhs).holds
    assert not weak_majorize(lip.rhs, dd.rhs).holds


@pytest.mark.parametrize("p,holds", [(1.2, False), (1.5, True)])
def test_signed_power_two_by_two_fixture(p, holds):
    A = np.ones((2, 2))
    B = np.array([[1.0, -1], [-1, 1]])
    v = verify_divided_difference_bound(SignedPower(p), A, B)
    assert v.holds is holds
    # lhs = s(A - B) = (2, 2); rhs = f'(2) * 2 at the top eigenvalue pair, 0 below
    expected = 2 * p * 2 ** (p - 1)
    assert np.allclose(v.rhs, [expected, 0], atol=1e-9)
    assert v.prefix_margins[1] == pytest.approx(expected - 4, abs=1e-9)


def test_spectral_domination_fails_outside_hypothesis():
    A = 0.5 * np.ones((2, 2))
    v = verify_spectral_domination(AbsPower(0.5), A)
    assert not v.holds
    assert v.lhs[0] == pytest.approx(math.sqrt(2), abs=1e-9) and v.rhs[0] == pytest.approx(1.0, abs=1e-9)


def test_verifier_preconditions():
    with pytest.raises(PreconditionError):
        verify_spectral_domination(Exp(), -np.eye(2))
    with pytest.raises(DomainError, match="boundary"):
        verify_spectral_domination(NegLog1m(), np.diag([1.0, 0.0]))
    with pytest.raises(DomainError):
        verify_diagonal_lipschitz_bound(NegLog1m(), np.eye(2), np.zeros((2, 2)))
    with pytest.raises(DomainError):
        verify_divided_difference_bound(Exp(), np.eye(2), np.eye(3))


def test_second_order_chain_details():
    rng = np.random.default_rng(4)
    pair = sample_psd_pair(3, math.inf, rng, bound="spectral")
    first, second = verify_second_order_bound(Exp(), pair.A, pair.B)
    assert first.holds and second.holds
    assert second.details["remainder_vs_square"]
    first, second = verify_diagonal_second_order_bound(Exp(), pair.A, pair.B)
    assert first.holds and second.holds


@pytest.mark.parametrize("n", [2, 3, 4])
def test_property_suite_for_analytic_functions(n):
    for trial in range(40):
        rng = np.random.default_rng([n, trial])
        A = sample_psd_spectral(n, 1.0, rng)
        pair = sample_psd_pair(n, 1.0, rng, bound="spectral")
        for f in (Exp(), NegLog1m(), monomial(3)):
            assert verify_spectral_domination(f, A).holds
            assert verify_divided_difference_bound(f, pair.A, pair.B).holds
            assert all(v.holds for v in verify_second_order_bound(f, pair.A, pair.B))
            assert verify_diagonal_lipschitz_bound(f, pair.A, pair.B).holds
            assert all(v.holds for v in verify_diagonal_second_order_bound(f, pair.A, pair.B))


def test_divided_difference_bound_with_zero_matches_spectral_domination():
    rng = np.random.default_rng(9)
    for _ in range(30):
        A = sample_psd_spectral(3, math.inf, rng)
        f = monomial(3)
        dd = verify_divided_difference_bound(f, A, np.zeros((3, 3)))
        sd = verify_spectral_domination(f, A)
        assert np.allclose(dd.prefix_margins, sd.prefix_margins, atol=1e-9 * max(1.0, sd.scale))


def test_norm_report():
    A = np.array([[1.0, 1, 0], [1, 1, 0], [0, 0, 0]])
    B = np.diag([2.0, 0, 0])
    rows = norm_inequality_report(monomial(2), A, B, ["operator", "trace", "ky_fan:2", "schatten:2"])
    assert [r["norm"] for r in rows] == ["operator", "trace", "ky_fan:2", "schatten:2"]
    assert all(r["holds"] for r in rows)
    assert rows[0]["rhs"] == pytest.approx(3 * math.sqrt(2))
    assert rows[0]["rhs_coarse"] == pytest.approx(3 * math.sqrt(2))


def test_record_is_json_ready():
    import json
    v = weak_majorize(np.array([1.0, 2.0]), np.array([3.0, 0.0]), name="x", assumptions=("a",))
    json.dumps(v.to_record())
