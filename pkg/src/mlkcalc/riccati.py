"""Power-series solutions ``f = sum_k a_k t**(k alpha)`` of the ABC Riccati equation.

``ABC D^alpha f = P + Q f**2``.  Matching coefficients of ``t**(m alpha)``
gives ``0 = P + Q a_0**2`` and, for ``m >= 1``::

    B/(1-alpha) sum_{k=1}^{m} a_k lam**(m-k) G(k alpha+1)/G(m alpha+1) = Q sum_{k=0}^{m} a_k a_{m-k}

with ``lam = -alpha/(1-alpha)``.  Solving for ``a_m`` leaves both inner
sums over ``k = 1..m-1``; they are empty at ``m = 1``, so every ``a_m``
with ``m >= 1`` vanishes and the series reduces to the constant ``a_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ab_ops import ABParams, ConstantNorm
from .errors import ComplexRoot, DenominatorZero, DomainError, ValidationError
from .funcmodel import Grid, PowerSum
from .specialfn import log_gamma

__all__ = [
    "RiccatiSpec",
    "riccati_coefficients",
    "riccati_eval",
    "riccati_powersum",
    "abc_series_coefficients",
    "coefficient_identity_residuals",
    "riccati_residual",
]


@dataclass(frozen=True)
class RiccatiSpec:
    """Riccati data ``ABC D^alpha f = P + Q f**2``.

    ``sign`` selects ``a_0 = sign * sqrt(-P/Q)``.  ``f0`` is carried for
    reference only: the series fixes ``f(0) = a_0``.
    """

    P: float
    Q: float
    alpha: float
    norm: object = field(default_factory=ConstantNorm)
    sign: int = 1
    f0: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if self.Q == 0:
            raise ValidationError("Q must be nonzero")
        if self.sign not in (1, -1):
            raise ValidationError("sign must be +1 or -1")
        if -self.P / self.Q < 0:
            raise ComplexRoot(f"-P/Q = {-self.P / self.Q!r} < 0 has no real square root")
        if abs(self.denominator) <= 1e-14 * self.scale:
            raise DenominatorZero("2 Q a_0 equals B/(1-alpha)")

    @property
    def params(self):
        return ABParams(self.alpha, 0.0, self.norm)

    @property
    def scale(self):
        return self.norm(self.alpha) / (1.0 - self.alpha)

    @property
    def lam(self):
        return -self.alpha / (1.0 - self.alpha)

    @property
    def a0(self):
        return self.sign * math.sqrt(-self.P / self.Q)

    @property
    def denominator(self):
        return 2.0 * self.Q * self.a0 - self.scale

    @property
    def f0_consistent(self):
        """Whether the stored ``f0`` (if any) equals ``a_0``."""
        return self.f0 is None or math.isclose(self.f0, self.a0, rel_tol=1e-12, abs_tol=1e-15)


def _gamma_ratio(alpha, k, m):
    """``Gamma(k alpha + 1) / Gamma(m alpha + 1)``."""
    return math.exp(log_gamma(k * alpha + 1.0) - log_gamma(m * alpha + 1.0))


def riccati_coefficients(spec: RiccatiSpec, M: int) -> tuple:
    """Coefficients ``a_0..a_M`` from the recursion."""
    if M < 0:
        raise ValidationError("M must be nonnegative")
    a = [spec.a0]
    al, lam, sc = spec.alpha, spec.lam, spec.scale
    for m in range(1, M + 1):
        memory = sc * sum(a[k] * lam ** (m - k) * _gamma_ratio(al, k, m) for k in range(1, m))
        square = spec.Q * sum(a[k] * a[m - k] for k in range(1, m))
        a.append((memory - square) / spec.denominator)
    return tuple(a)


def riccati_powersum(spec: RiccatiSpec, M: int, coefs=None) -> PowerSum:
    a = riccati_coefficients(spec, M) if coefs is None else coefs
    return PowerSum(tuple((c, k * spec.alpha) for k, c in enumerate(a)))


def riccati_eval(spec: RiccatiSpec, M: int, t):
    """Partial sum ``sum_{k<=M} a_k t**(k alpha)``."""
    a = np.asarray(riccati_coefficients(spec, M))
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be nonnegative")
    k = np.arange(a.size)
    with np.errstate(divide="ignore"):
        powers = np.where(k == 0, 1.0, np.power(t[..., None], k * spec.alpha))
    out = powers @ a
    return float(out) if out.ndim == 0 else out


def abc_series_coefficients(spec: RiccatiSpec, coefs, m_max: int):
    """Coefficients ``d_m`` (``m = 0..m_max``) of ``t**(m alpha)`` in ``ABC D^alpha`` of the series.

    ``d_m = B/(1-alpha) sum_{k=1}^{min(m, M)} a_k lam**(m-k) G(k alpha+1)/G(m alpha+1)``.
    """
    a = list(coefs)
    return np.array([_abc_coefficient(spec, a, m) for m in range(m_max + 1)])


def _abc_coefficient(spec, a, m):
    if m == 0:
        return 0.0
    al, lam = spec.alpha, spec.lam
    return spec.scale * math.fsum(
        a[k] * lam ** (m - k) * _gamma_ratio(al, k, m) for k in range(1, min(m, len(a) - 1) + 1)
    )


def coefficient_identity_residuals(spec: RiccatiSpec, coefs):
    """Relative mismatch of the matching conditions for ``m = 0..M``.

    Each entry is ``|lhs_m - rhs_m| / max(1, |lhs_m|, |rhs_m|)``.
    """
    a = list(coefs)
    M = len(a) - 1
    lhs = abc_series_coefficients(spec, a, M)
    res = np.zeros(M + 1)
    for m in range(M + 1):
        rhs = spec.Q * math.fsum(a[k] * a[m - k] for k in range(m + 1)) + (spec.P if m == 0 else 0.0)
        res[m] = abs(lhs[m] - rhs) / max(1.0, abs(lhs[m]), abs(rhs))
    return res


def riccati_residual(spec: RiccatiSpec, M: int, grid: Grid, extra_terms=None):
    """``max |ABC D^alpha f_M - P - Q f_M**2|`` over ``grid`` for the partial sum ``f_M``.

    The derivative is summed term by term from :func:`abc_series_coefficients`;
    beyond ``m = M`` terms are added until three in a row fall below
    ``1e-17`` of the running maximum (or ``extra_terms`` if given).
    """
    if grid.a != 0.0:
        raise ValidationError("Riccati grids start at t = 0")
    a = riccati_coefficients(spec, M)
    t = grid.t
    tmax = float(t[-1])
    if extra_terms is None:
        m_max, quiet = M, 0
        d = list(abc_series_coefficients(spec, a, m_max))
        big = max(abs(c) * tmax ** (m * spec.alpha) for m, c in enumerate(d))
        while quiet < 3 and m_max < M + 2000:
            m_max += 1
            d.append(_abc_coefficient(spec, a, m_max))
            size = abs(d[-1]) * tmax ** (m_max * spec.alpha)
            big = max(big, size)
            quiet = quiet + 1 if size <= 1e-17 * max(big, 1e-300) or size == 0.0 else 0
        d = np.array(d)
    else:
        d = abc_series_coefficients(spec, a, M + int(extra_terms))
    k = np.arange(d.size)
    with np.errstate(divide="ignore"):
        powers = np.where(k == 0, 1.0, np.power(t[:, None], k * spec.alpha))
    deriv = powers @ d
    f = riccati_eval(spec, M, t)
    return float(np.max(np.abs(deriv - spec.P - spec.Q * f * f)))
