import math

import numpy as np
import pytest

from mlkcalc.errors import ComplexRoot, DenominatorZero, DomainError, ValidationError
from mlkcalc.funcmodel import Grid
from mlkcalc.riccati import (
    RiccatiSpec,
    abc_series_coefficients,
    coefficient_identity_residuals,
    riccati_coefficients,
    riccati_eval,
    riccati_powersum,
    riccati_residual,
)


@pytest.mark.parametrize("P,Q", [(-1.0, 1.0), (-4.0, 1.0), (0.0, 1.0), (2.0, -0.5)])
@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_series_collapses_to_constant(P, Q, alpha):
    spec = RiccatiSpec(P, Q, alpha)
    a = riccati_coefficients(spec, 25)
    assert a[0] == pytest.approx(math.sqrt(-P / Q))
    assert all(x == 0.0 for x in a[1:])
    assert np.max(coefficient_identity_residuals(spec, a)) < 1e-12
    assert riccati_residual(spec, 25, Grid(0.0, 1.0, 51)) < 1e-12


def test_sign_choice():
    spec = RiccatiSpec(-4.0, 1.0, 0.3, sign=-1)
    assert spec.a0 == -2.0
    np.testing.assert_allclose(riccati_eval(spec, 5, np.array([0.0, 1.0])), -2.0)
    assert riccati_powersum(spec, 3)(0.5) == -2.0


def test_identity_detects_wrong_coefficients():
    spec = RiccatiSpec(-1.0, 1.0, 0.3)
    bad = (1.0, 0.1, 0.0)
    assert np.max(coefficient_identity_residuals(spec, bad)) > 1e-3
    d = abc_series_coefficients(spec, bad, 4)
    assert d[0] == 0.0 and d[1] != 0.0


def test_degenerate_denominator():
    # 2 Q a0 = B/(1-alpha) at alpha = 1/2 for (P, Q) = (-1, 1)
    with pytest.raises(DenominatorZero):
        RiccatiSpec(-1.0, 1.0, 0.5)


def test_validation():
    with pytest.raises(ComplexRoot):
        RiccatiSpec(1.0, 1.0, 0.3)
    with pytest.raises(ValidationError):
        RiccatiSpec(-1.0, 0.0, 0.3)
    with pytest.raises(DomainError):
        RiccatiSpec(-1.0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        RiccatiSpec(-1.0, 1.0, 0.3, sign=2)
    with pytest.raises(ValidationError):
        riccati_residual(RiccatiSpec(-1.0, 1.0, 0.3), 5, Grid(0.5, 1.0, 5))
    assert not RiccatiSpec(-1.0, 1.0, 0.3, f0=0.5).f0_consistent
    assert RiccatiSpec(-1.0, 1.0, 0.3, f0=1.0).f0_consistent
