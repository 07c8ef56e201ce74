import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlkcalc.ab_ops import (
    ABParams,
    CancellationWarning,
    ExponentialNorm,
    NormalizationWarning,
    ab_integral,
    abc_derivative,
    abc_derivative_kernel,
    abc_derivative_series,
    abr_derivative,
    abr_derivative_kernel,
    abr_derivative_ml,
    abr_derivative_series,
    default_beta,
    verify_inverse_identities,
)
from mlkcalc.errors import DomainError, NoConvergence, ValidationError
from mlkcalc.funcmodel import Grid, PowerSum, SmoothFn, sample
from mlkcalc.policy import TruncationPolicy
from mlkcalc.specialfn import mittag_leffler, ml_series

from oracles import ab_integral_quad, abr_quad


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_abr_of_constant_closed_form(alpha):
    p = ABParams(alpha)
    t = np.linspace(0.1, 2, 20)
    val, rep = abr_derivative_series(PowerSum.constant(1.0), p)
    ref = p.scale * mittag_leffler(alpha, p.lam * t**alpha)
    np.testing.assert_allclose(val(t), ref, rtol=0, atol=1e-10)  # alternating series, |lam| > 2 at 0.7
    assert rep.tail_estimate <= 1e-15 * rep.terms_used or rep.tail_estimate < 1e-14


@pytest.mark.parametrize("alpha", [0.4, 0.8])
def test_abr_against_definition_quadrature(alpha):
    p = ABParams(alpha)
    f = PowerSum(((2.0, 0.0), (1.0, 1.0), (-0.5, 2.0)))
    val = abr_derivative(f, p)
    for t in (0.6, 1.4):
        ref = abr_quad(lambda x: 2 + x - 0.5 * x * x, lambda x: 1 - x, alpha, t)
        assert val(t) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("alpha", [0.5, 0.9, 0.97])
def test_ml_path_against_definition(alpha):
    # the resummed path keeps full accuracy where the expanded series cancels
    p = ABParams(alpha)
    f = PowerSum(((1.0, 0.0), (1.0, 1.0), (0.5, 2.0)))
    for t in (0.5, 2.0):
        ref = abr_quad(lambda x: 1 + x + 0.5 * x * x, lambda x: 1 + x, alpha, t)
        assert abr_derivative(f, p, path="ml")(t) == pytest.approx(ref, rel=1e-10)
        refc = ref - p.scale * ml_series(alpha, 1.0, p.lam * t**alpha)
        assert abc_derivative(f, p, path="ml")(t) == pytest.approx(refc, rel=1e-10)


def test_cancellation_warning_and_rounding_estimate():
    f = PowerSum(((1.0, 0.0), (1.0, 1.0)))
    with pytest.warns(CancellationWarning):
        _, rep = abr_derivative_series(f, ABParams(0.95))
    assert rep.rounding_estimate > 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        _, rep = abr_derivative_series(f, ABParams(0.5))
    assert rep.rounding_estimate < 1e-13


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.05, 0.97), e=st.sampled_from([0.0, 0.5, 1.0, 2.0]))
def test_series_and_ml_paths_agree_within_rounding(alpha, e):
    p = ABParams(alpha)
    f = PowerSum.monomial(e)
    t = np.linspace(0.0, 2.0, 9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CancellationWarning)
        val, rep = abr_derivative_series(f, p)
    err = np.max(np.abs(val(t) - abr_derivative_ml(f, p)(t)))
    assert err <= 100 * rep.rounding_estimate + rep.tail_estimate + 1e-13


def test_ab_integral_against_quadrature():
    p = ABParams(0.45)
    out = ab_integral(PowerSum.monomial(1.5), p)
    for t in (0.3, 1.9):
        assert out(t) == pytest.approx(ab_integral_quad(lambda x: x**1.5, 0.45, t), rel=1e-12)


@pytest.mark.parametrize("name,f,ps", [
    ("t", PowerSum.monomial(1.0), PowerSum.monomial(1.0)),
    ("exp", SmoothFn.exp(), PowerSum.exp_taylor()),
])
def test_kernel_and_series_paths_agree(name, f, ps):
    p = ABParams(0.5)
    g = Grid(0.0, 2.0, 2049)
    ker = abr_derivative(f, p, path="kernel", grid=g)
    ser = abr_derivative(ps, p)
    assert np.max(np.abs(ker.values - ser(g.t))) < 1e-5


def test_abc_paths_and_relation_to_abr():
    p = ABParams(0.6)
    f = PowerSum(((2.0, 0.0), (1.0, 1.0), (1.0, 2.0)))
    t = np.linspace(0.1, 2, 12)
    abc = abc_derivative(f, p)
    abr = abr_derivative(f, p)
    # ABR - ABC = B/(1-alpha) f(0) E_alpha(lam t**alpha)
    np.testing.assert_allclose(abr(t) - abc(t), p.scale * 2.0 * mittag_leffler(0.6, p.lam * t**0.6), atol=1e-12)
    g = Grid(0.0, 2.0, 1025)
    ker = abc_derivative_kernel(f, p, g)
    assert np.max(np.abs(ker.values - abc(g.t))) < 1e-5


def test_series_on_samples():
    p = ABParams(0.5)
    g = Grid(0.0, 2.0, 1025)
    val, rep = abr_derivative_series(sample(PowerSum.monomial(2.0), g), p)
    ref = abr_derivative(PowerSum.monomial(2.0), p)
    assert np.max(np.abs(val.values - ref(g.t))) < 1e-5
    assert rep.span == 2.0


@pytest.mark.parametrize("f", [PowerSum.constant(1.0), PowerSum.monomial(1.0), PowerSum.monomial(2.0),
                               PowerSum(((1.0, 1.0), (1.0, 2.0)))])
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_identities(f, alpha):
    rep = verify_inverse_identities(f, ABParams(alpha), beta=default_beta(alpha))
    assert set(rep.residuals) == {"left_inverse", "right_inverse", "newton_leibniz", "commute_DD", "commute_II", "commute_DI"}
    assert rep.passed(1e-8), rep.residuals


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.1, 0.8), e=st.sampled_from([0.0, 0.5, 1.0, 2.0]))
def test_left_inverse_property(alpha, e):
    p = ABParams(alpha)
    f = PowerSum.monomial(e)
    back = abr_derivative(ab_integral(f, p), p)
    t = np.linspace(0.2, 2, 6)
    np.testing.assert_allclose(back(t), f(t), atol=1e-9, rtol=1e-9)


def test_exponential_norm_warns():
    with pytest.warns(NormalizationWarning):
        ExponentialNorm(0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ExponentialNorm(0.0)


def test_validation():
    with pytest.raises(DomainError):
        ABParams(1.0)
    with pytest.raises(ValidationError):
        abr_derivative(PowerSum.monomial(1.0, base=1.0), ABParams(0.5))
    with pytest.raises(ValidationError):
        abr_derivative(PowerSum.monomial(1.0), ABParams(0.5), path="kernel")
    with pytest.raises(ValidationError):
        abr_derivative_kernel(PowerSum.monomial(1.0), ABParams(0.5))


def test_term_cap_raises():
    with pytest.raises(NoConvergence):
        abr_derivative_series(PowerSum.monomial(1.0), ABParams(0.9), TruncationPolicy(max_terms=3))
