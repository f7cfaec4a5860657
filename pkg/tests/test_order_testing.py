import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schur_order.errors import PreconditionError
from schur_order.linalg import is_psd
from schur_order.order_testing import (TrialConfig, chain_decompose, check_doubling_inclusion,
                                       cross_check_derivative_relation, doubling_embedding, sample_psd,
                                       sample_psd_pair, sample_psd_spectral, test_class as run_class_test,
                                       trial_rng)
from schur_order.scalarfn import AbsPower, Exp, NegLog1m, PowerSeries, SignedPower, monomial


seeds = st.integers(0, 2 ** 32)


@given(seeds, st.integers(1, 6), st.sampled_from([1.0, 2.5, math.inf]))
def test_sampled_psd_stays_inside_domain(seed, n, alpha):
    rng = np.random.default_rng(seed)
    M = sample_psd(n, alpha, rng)
    assert is_psd(M)[0]
    assert np.max(np.abs(M)) < min(alpha, 10.0)
    S = sample_psd_spectral(n, alpha, rng)
    assert is_psd(S)[0]
    assert np.max(np.abs(np.linalg.eigvalsh(S))) < min(alpha, 10.0)


@given(seeds, st.integers(1, 6), st.sampled_from([1.0, math.inf]), st.sampled_from(["entries", "spectral"]))
def test_sampled_pair_is_ordered(seed, n, alpha, bound):
    pair = sample_psd_pair(n, alpha, np.random.default_rng(seed), bound=bound)
    assert pair.check()
    assert pair.shape in ("full", "rank_one", "zero")
    if pair.shape == "zero":
        assert np.array_equal(pair.A, pair.B)
    if pair.shape == "rank_one" and n > 1:
        assert np.linalg.matrix_rank(np.asarray(pair.A) - np.asarray(pair.B), tol=1e-9 * np.max(pair.A)) == 1


def test_sampler_errors():
    with pytest.raises(PreconditionError):
        sample_psd(0, 1.0, np.random.default_rng(0))
    with pytest.raises(PreconditionError):
        sample_psd_pair(2, 1.0, np.random.default_rng(0), bound="trace")


@given(seeds, st.integers(1, 5))
def test_chain_decomposition_steps(seed, n):
    pair = sample_psd_pair(n, math.inf, np.random.default_rng(seed))
    chain = chain_decompose(pair.A, pair.B)
    assert len(chain) == n + 1
    assert chain[0] is not None and np.array_equal(chain[0], pair.A) and np.array_equal(chain[-1], pair.B)
    for hi, lo in zip(chain, chain[1:]):
        step = np.asarray(hi) - np.asarray(lo)
        assert is_psd(step, 1e-8)[0]
        assert np.linalg.matrix_rank(step, tol=1e-8 * max(1.0, np.max(np.abs(pair.A)))) <= 1


def test_chain_rejects_unordered_pair():
    with pytest.raises(PreconditionError):
        chain_decompose(np.zeros((2, 2)), np.eye(2))


def test_config_validation():
    cfg = TrialConfig(n=3)
    assert cfg.to_dict()["alpha"] == "inf"
    assert TrialConfig.from_mapping({"n": 2, "trials": 5}, seed=4).seed == 4
    assert cfg.replace(trials=7).trials == 7
    for bad in ({"n": 0}, {"n": 2, "trials": 0}, {"n": 2, "lambdas": (1.5,)}, {"n": 2, "weights": (1, 1)},
                {"n": 2, "headroom": 1.0}, {"n": 2, "alpha": 0.0}, {"n": 2, "seed": -1}):
        with pytest.raises(PreconditionError):
            TrialConfig(**bad)
    with pytest.raises(PreconditionError):
        TrialConfig.from_mapping({"n": 2, "colour": "red"})


def test_trial_streams_are_independent_of_order():
    a = trial_rng(5, 3).standard_normal(4)
    trial_rng(5, 2).standard_normal(100)
    assert np.array_equal(a, trial_rng(5, 3).standard_normal(4))
    assert not np.array_equal(a, trial_rng(5, 4).standard_normal(4))


def test_class_fixtures_order_three():
    cfg = TrialConfig(n=3, trials=200, seed=0)
    assert run_class_test(AbsPower(1.0), "S-pos", cfg).holds
    assert not run_class_test(AbsPower(1.0), "S-mono", cfg).holds
    assert not run_class_test(AbsPower(1.0), "S-conv", cfg).holds


def test_negative_linear_function_fails_positivity():
    v = run_class_test(PowerSeries((0.0, -1.0)), "S-pos", TrialConfig(n=2, trials=10))
    assert not v.holds and v.margin < 0
    assert v.witness["trial"] == 0
    assert v.details["trials_run"] == 1


def test_class_reports_are_deterministic():
    cfg = TrialConfig(n=3, trials=60, seed=11)
    one = run_class_test(SignedPower(1.5), "S-mono", cfg).to_dict()
    two = run_class_test(SignedPower(1.5), "S-mono", cfg).to_dict()
    assert one == two


@pytest.mark.parametrize("f", [Exp(), NegLog1m(), monomial(3)], ids=lambda f: f.describe())
def test_absolutely_monotone_functions_pass_everything(f):
    cfg = TrialConfig(n=3, trials=100, seed=2)
    for cls in ("S-pos", "S-mono", "S-conv"):
        assert run_class_test(f, cls, cfg).holds


def test_derivative_relation_agrees():
    cfg = TrialConfig(n=3, trials=100, seed=1)
    for f in (monomial(3), SignedPower(2.5), AbsPower(1.5)):
        assert cross_check_derivative_relation(f, cfg, "conv-mono").holds
        assert cross_check_derivative_relation(f, cfg, "mono-pos").holds
    with pytest.raises(PreconditionError):
        cross_check_derivative_relation(Exp(), TrialConfig(n=2), "mono-pos")
    with pytest.raises(PreconditionError):
        cross_check_derivative_relation(Exp(), cfg, "pos-conv")


def test_doubling_embedding():
    A, B = 2 * np.eye(2), np.eye(2)
    M = doubling_embedding(A, B)
    assert M.shape == (4, 4) and is_psd(M)[0]
    assert not is_psd(doubling_embedding(B, A))[0]
    assert check_doubling_inclusion(Exp(), TrialConfig(n=3, trials=50)).holds
    assert not check_doubling_inclusion(AbsPower(1.0), TrialConfig(n=3, trials=200)).holds
