import itertools
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlkcalc.ab_ops import ABParams, abr_derivative_series
from mlkcalc.errors import ValidationError
from mlkcalc.funcmodel import Grid, PowerSum, SmoothFn
from mlkcalc.rules import (
    RuleTruncation,
    chain_rule,
    chain_rule_coefficients,
    chain_rule_terms,
    enumerate_partitions,
    generalized_binomial,
    partition_weight,
    product_bracket,
    product_rule,
)


def _brute_partitions(n, k):
    out = set()
    for P in itertools.product(*(range(k + 1) for _ in range(n))):
        if sum(P) == k and sum((i + 1) * p for i, p in enumerate(P)) == n:
            out.add(P)
    return out


@pytest.mark.parametrize("n", range(1, 8))
def test_partitions_match_brute_force(n):
    for k in range(1, n + 1):
        assert set(enumerate_partitions(n, k)) == _brute_partitions(n, k)


@pytest.mark.parametrize("n", range(1, 11))
def test_weights_sum_to_stirling_numbers(n):
    # sum over k-part partitions of n!/prod P_i! (i!)**P_i is S(n, k)
    for k in range(1, n + 1):
        total = sum(partition_weight(P) for P in enumerate_partitions(n, k))
        assert total == pytest.approx(float(mp.stirling2(n, k)), rel=1e-14)


def test_partition_validation():
    with pytest.raises(ValidationError):
        enumerate_partitions(3, 4)
    with pytest.raises(ValidationError):
        RuleTruncation(0, 5)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-5, 5), n=st.integers(0, 12))
def test_generalized_binomial_matches_mpmath(x, n):
    assert generalized_binomial(x, n) == pytest.approx(float(mp.binomial(x, n)), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("alpha", [0.3, 0.6])
def test_product_rule_reproduces_direct_derivative(alpha):
    p = ABParams(alpha)
    t = np.linspace(0.1, 2, 20)
    out = product_rule(PowerSum.monomial(2.0), SmoothFn.poly([0, 1]), p, where=t)
    ref = abr_derivative_series(PowerSum.monomial(3.0), p)[0](t)
    assert np.max(np.abs(out - ref)) < 1e-8


def test_product_rule_on_grid_and_bracket():
    p = ABParams(0.5)
    g = Grid(0.0, 2.0, 11)
    out = product_rule(PowerSum.constant(1.0), SmoothFn.poly([0, 0, 1]), p, where=g)
    ref = abr_derivative_series(PowerSum.monomial(2.0), p)[0](g.t)
    np.testing.assert_allclose(out.values, ref, atol=1e-10)
    b0 = product_bracket(PowerSum.monomial(1.0), p, 0)
    np.testing.assert_allclose(b0(g.t[1:]), abr_derivative_series(PowerSum.monomial(1.0), p)[0](g.t[1:]), atol=1e-10)


def test_product_rule_remainder_monotone():
    p = ABParams(0.5)
    t = np.linspace(0.1, 2, 20)
    ref = abr_derivative_series(PowerSum.monomial(5.0), p)[0](t)
    errs = [np.max(np.abs(product_rule(PowerSum.monomial(2.0), PowerSum.monomial(3.0), p, RuleTruncation(40, N), t) - ref))
            for N in (1, 2, 3)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-8


@pytest.mark.parametrize("alpha", [0.3, 0.6])
def test_chain_rule_coefficients_collapsed(alpha):
    p = ABParams(alpha)
    tc = 0.9
    C = chain_rule_coefficients(SmoothFn.poly([0, 0, 1]), SmoothFn.exp(), p, RuleTruncation(20, 10), tc)
    for m in range(21):
        for n in range(11):
            ref = (2.0**n * p.scale * p.lam**m * float(mp.binomial(-m * alpha, n))
                   * float(mp.rgamma(n + m * alpha + 1)) * math.exp(2 * tc))
            assert C[m, n] == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_chain_rule_pointwise_converges():
    p = ABParams(0.5)
    t = np.array([0.5, 1.0, 2.0])
    ref = abr_derivative_series(PowerSum.exp_taylor(rate=2.0), p)[0](t)
    out = chain_rule(SmoothFn.poly([0, 0, 1]), SmoothFn.exp(), p, RuleTruncation(40, 24), where=t)
    np.testing.assert_allclose(out, ref, rtol=1e-9)
    terms = chain_rule_terms(SmoothFn.poly([0, 0, 1]), SmoothFn.exp(), p, RuleTruncation(5, 4), t)
    assert terms.shape == (3, 6, 5)


def test_rule_validation():
    p = ABParams(0.5)
    with pytest.raises(ValidationError):
        product_rule(PowerSum.monomial(1.0), PowerSum.monomial(1.0), p)
    with pytest.raises(ValidationError):
        product_rule(SmoothFn.exp(), PowerSum.monomial(1.0), p, where=np.array([1.0])) if SmoothFn.exp().exact is None else (_ for _ in ()).throw(ValidationError("x"))
