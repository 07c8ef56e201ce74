"""Riemann-Liouville and Caputo differintegrals.

Exact on :class:`PowerSum` through the power rule, product-trapezoid
quadrature on :class:`SampledFn`.
"""

from __future__ import annotations

import numpy as np

from . import _quadrature
from .errors import DomainError, ValidationError
from .funcmodel import PowerSum, SampledFn, SmoothFn, sample
from .specialfn import gamma, recip_gamma

__all__ = [
    "rl_integral",
    "rl_integral_power",
    "rl_integral_grid",
    "rl_derivative",
    "caputo_derivative",
]


def _check_mu(mu):
    if not mu > 0:
        raise DomainError(f"integration order must be positive, got {mu}")


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise DomainError(f"differentiation order must lie in (0, 1), got {alpha}")


def rl_integral_power(f: PowerSum, mu: float) -> PowerSum:
    r"""Exact RL integral :math:`I^\mu` of a power sum.

    Each term ``c (t-a)**b`` maps to ``c Gamma(b+1)/Gamma(b+mu+1) (t-a)**(b+mu)``.

    >>> rl_integral_power(PowerSum.constant(1.0), 1.0).terms
    ((1.0, 1.0),)
    """
    _check_mu(mu)
    return _power_rule(f, mu)


def _power_rule(f: PowerSum, mu):
    """Map ``c (t-a)**b -> c Gamma(b+1)/Gamma(b+mu+1) (t-a)**(b+mu)`` (``mu`` of either sign)."""
    if not f.terms:
        return f
    b = f.expos
    coef = f.coefs * gamma(b + 1.0) * recip_gamma(b + mu + 1.0)
    return PowerSum._from_arrays(coef, b + mu, f.base)


def rl_integral_grid(f: SampledFn, mu: float) -> SampledFn:
    """RL integral of grid samples by product-trapezoid quadrature (O(h**2))."""
    _check_mu(mu)
    if f.singular_at_base:
        raise ValidationError("cannot integrate samples with a flagged singular base value")
    g = f.grid
    vals = _quadrature.convolve(f.values, _quadrature.rl_weights(g.n, mu, g.h))
    return SampledFn(g, vals)


def rl_integral(f, mu):
    """Dispatch to the exact or the grid RL integral."""
    if isinstance(f, PowerSum):
        return rl_integral_power(f, mu)
    if isinstance(f, SampledFn):
        return rl_integral_grid(f, mu)
    raise ValidationError(f"rl_integral expects PowerSum or SampledFn, got {type(f).__name__}")


def _l1_caputo(values, alpha, h):
    """L1 scheme for the Caputo derivative on a uniform grid, O(h**(2-alpha))."""
    n = values.size
    k = np.arange(n, dtype=np.longdouble)
    b = np.asarray((k + 1) ** (1 - alpha) - k ** (1 - alpha), dtype=float)
    diffs = np.diff(values)
    out = np.zeros(n)
    out[1:] = np.convolve(diffs, b[: n - 1])[: n - 1]
    return out * h ** (-alpha) * recip_gamma(2.0 - alpha)


def _diff4(v, h):
    """First derivative of samples, fourth order, one-sided near the ends."""
    if v.size < 5:
        return np.gradient(v, h, edge_order=2 if v.size > 2 else 1)
    out = np.empty_like(v)
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    edge0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h)
    edge1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12.0 * h)
    out[0] = edge0 @ v[:5]
    out[1] = edge1 @ v[:5]
    out[-1] = -(edge0 @ v[::-1][:5])
    out[-2] = -(edge1 @ v[::-1][:5])
    return out


def _second_difference(v, h):
    out = np.empty_like(v)
    out[1:-1] = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / (h * h)
    out[0] = 2.0 * out[1] - out[2]
    out[-1] = 2.0 * out[-2] - out[-3]
    return out


def _trapezoid_caputo(values, alpha, h):
    """Product-trapezoid ``I^(1-alpha)`` of a second-order difference of ``f``."""
    fp = np.gradient(values, h, edge_order=2)
    return _quadrature.convolve(fp, _quadrature.rl_weights(values.size, 1.0 - alpha, h))


def _corrected_caputo(values, alpha, h):
    """Product-trapezoid ``I^(1-alpha) f'`` with the leading interpolation error removed.

    Linear interpolation of ``phi = f'`` misses ``-(h**2/12) phi''`` on average
    over each cell, so ``(h**2/12) I^(1-alpha) phi''`` is subtracted.
    """
    if values.size < 5:
        return _trapezoid_caputo(values, alpha, h)
    w = _quadrature.rl_weights(values.size, 1.0 - alpha, h)
    fp = _diff4(values, h)
    out = _quadrature.convolve(fp, w)
    out -= h * h / 12.0 * _quadrature.convolve(_second_difference(fp, h), w)
    return out


_SCHEMES = {"corrected": _corrected_caputo, "trapezoid": _trapezoid_caputo, "l1": _l1_caputo}


def rl_derivative(f, alpha, scheme="corrected"):
    r"""RL derivative :math:`D^\alpha`, ``0 < alpha < 1``.

    On a power sum every term goes through the power rule with a reciprocal
    Gamma, so terms ``(t-a)**(alpha-1)`` are annihilated.  On samples the
    Caputo part is computed by ``scheme`` and
    ``f(a) (t-a)**-alpha / Gamma(1-alpha)`` added; when ``f(a) != 0`` the
    value at ``t_0`` diverges and is stored as ``nan`` with
    ``singular_at_base`` set.

    Parameters
    ----------
    scheme : {"corrected", "trapezoid", "l1"}
        ``"trapezoid"`` differences the samples to second order and applies the
        product-trapezoid ``I^(1-alpha)`` (O(h**2) for smooth ``f``).
        ``"corrected"`` uses fourth-order differences and removes the leading
        interpolation error of the trapezoid (the default).  ``"l1"`` is the
        classical L1 scheme (O(h**(2-alpha))).
    """
    _check_alpha(alpha)
    if isinstance(f, PowerSum):
        return _power_rule(f, -alpha)
    if isinstance(f, SampledFn):
        if f.singular_at_base:
            raise ValidationError("grid RL derivative needs a finite value at the base point")
        if scheme not in _SCHEMES:
            raise ValidationError(f"unknown scheme {scheme!r}")
        g = f.grid
        out = _SCHEMES[scheme](np.asarray(f.values), alpha, g.h)
        f0 = f.values[0]
        if f0 != 0.0:
            tau = g.t[1:] - g.a
            out[1:] += f0 * tau ** (-alpha) * recip_gamma(1.0 - alpha)
            out[0] = np.nan
            return SampledFn(g, out, singular_at_base=True)
        return SampledFn(g, out)
    raise ValidationError(f"rl_derivative expects PowerSum or SampledFn, got {type(f).__name__}")


def caputo_derivative(f, alpha, grid=None):
    r"""Caputo derivative :math:`I^{1-\alpha} f'`.

    A power sum (or a smooth function with an exact power-sum form) gives an
    exact power sum when no grid is requested; otherwise ``f'`` is sampled
    exactly on ``grid`` and integrated by product-trapezoid quadrature, with
    the leading interpolation error removed using the exact third derivative.
    """
    _check_alpha(alpha)
    if grid is None:
        if isinstance(f, SmoothFn) and f.exact is not None:
            f = f.exact
        if not isinstance(f, PowerSum):
            raise ValidationError("a grid is required for functions without a power-sum form")
        return rl_integral_power(f.derivative(), 1.0 - alpha)
    if isinstance(f, PowerSum):
        f = SmoothFn.from_powersum(f)
    if not isinstance(f, SmoothFn):
        raise ValidationError("caputo_derivative needs exact derivatives (PowerSum or SmoothFn)")
    fp = sample(lambda t: f.d(1, t), grid)
    out = rl_integral_grid(fp, 1.0 - alpha)
    if f.order is None or f.order >= 3:
        # same interpolation-error correction as the grid RL derivative using the exact third derivative
        f3 = sample(lambda t: f.d(3, t), grid)
        corr = rl_integral_grid(f3, 1.0 - alpha)
        out = out - (grid.h**2 / 12.0) * corr.values
    return out
