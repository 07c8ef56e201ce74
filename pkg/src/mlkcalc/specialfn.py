"""Gamma-family and Mittag-Leffler-family scalar special functions.

Every function accepts a scalar or an array argument and returns the same
shape (a Python ``float`` for scalar input).
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

from .errors import DomainError, NoConvergence, PoleError
from .policy import TruncationPolicy

__all__ = [
    "gamma",
    "recip_gamma",
    "log_gamma",
    "mittag_leffler",
    "ml_series",
    "mittag_leffler_kernel_dt",
    "miller_ross",
]

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# Gamma(x) exceeds the largest double above this point.
GAMMA_OVERFLOW = 171.6243769563027

# Plain Mittag-Leffler summation is refused below this argument.
ML_NEGATIVE_LIMIT = -50.0
# Accepted digit loss (max |term| / |sum|) before resumming in extended precision.
_CANCELLATION_LIMIT = 1e5
# Below this argument the Miller-Ross sum switches to the positive-term form.
_MILLER_ROSS_SWITCH = -5.0
# Negative arguments with |z|**(1/alpha) above this are not summed termwise
# (the largest term is roughly exp of that quantity).
_SERIES_SPREAD = 6.0
_TALBOT_NODES = 24

_DEFAULT_POLICY = TruncationPolicy()


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return float(arr) if scalar else arr


def _is_pole(x):
    return (x <= 0) & (x == np.floor(x))


def _sinpi(x):
    # exact range reduction to [-1, 1] before scaling by pi
    r = x - 2.0 * np.round(0.5 * x)
    return np.sin(np.pi * r)


def _lanczos_sum(xm1):
    acc = np.full_like(xm1, _LANCZOS_COEF[0])
    for i in range(1, len(_LANCZOS_COEF)):
        acc = acc + _LANCZOS_COEF[i] / (xm1 + i)
    return acc


def _gamma_right(x):
    """Gamma on ``x >= 0.5``; overflows to inf past GAMMA_OVERFLOW."""
    xm1 = x - 1.0
    t = xm1 + _LANCZOS_G + 0.5
    half = 0.5 * (xm1 + 0.5)
    with np.errstate(over="ignore"):
        # split the power so t**(x-0.5) cannot overflow before exp(-t) shrinks it
        p = np.power(t, half)
        return _SQRT_2PI * _lanczos_sum(xm1) * (p * np.exp(-t)) * p


def _log_gamma_right(x):
    xm1 = x - 1.0
    t = xm1 + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (xm1 + 0.5) * np.log(t) - t + np.log(_lanczos_sum(xm1))


def _gamma_any(x):
    """Gamma away from poles, no validation."""
    out = np.empty_like(x)
    right = x >= 0.5
    out[right] = _gamma_right(x[right])
    left = ~right
    if np.any(left):
        xl = x[left]
        with np.errstate(over="ignore", divide="ignore"):
            out[left] = np.pi / (_sinpi(xl) * _gamma_right(1.0 - xl))
    return out


def gamma(x):
    """Gamma function via the Lanczos approximation and reflection.

    Raises :class:`PoleError` at nonpositive integers and :class:`OverflowError`
    where the result exceeds the double range.
    """
    arr, scalar = _as_array(x)
    flat = np.atleast_1d(arr)
    if np.any(_is_pole(flat)):
        raise PoleError(f"gamma has a pole at {flat[_is_pole(flat)][0]:g}")
    if np.any(flat > GAMMA_OVERFLOW):
        raise OverflowError("gamma overflows for x > %.6f" % GAMMA_OVERFLOW)
    return _out(_gamma_any(flat).reshape(arr.shape), scalar)


def recip_gamma(x):
    """``1/Gamma(x)``, exactly zero at the poles of Gamma."""
    arr, scalar = _as_array(x)
    flat = np.atleast_1d(arr)
    out = np.zeros_like(flat)
    pole = _is_pole(flat)
    big = flat > GAMMA_OVERFLOW
    mid = ~pole & ~big
    out[mid] = 1.0 / _gamma_any(flat[mid])
    out[big] = np.exp(-_log_gamma_right(flat[big]))
    return _out(out.reshape(arr.shape), scalar)


def log_gamma(x):
    """``log Gamma(x)`` for ``x > 0``."""
    arr, scalar = _as_array(x)
    flat = np.atleast_1d(arr)
    if np.any(flat <= 0):
        raise DomainError("log_gamma is only provided for positive arguments")
    out = np.empty_like(flat)
    right = flat >= 0.5
    out[right] = _log_gamma_right(flat[right])
    xl = flat[~right]
    out[~right] = _log_gamma_right(xl + 1.0) - np.log(xl)
    return _out(out.reshape(arr.shape), scalar)


class _Coef:
    """Coefficient ``1 / Gamma(alpha*n + beta)`` of a Mittag-Leffler-type series."""

    def __init__(self, alpha, beta):
        self.alpha = alpha
        self.beta = beta

    def __call__(self, n):
        return recip_gamma(self.alpha * n + self.beta)

    def log_abs(self, n):
        """``(log|coef|, sign)`` computed without overflow."""
        arg = self.alpha * n + self.beta
        if _is_pole(np.float64(arg)):
            return -math.inf, 0.0
        sign = -1.0 if arg < 0 and math.floor(arg) % 2 == 1 else 1.0
        return -math.lgamma(arg), sign

    def mp(self, n):
        return mpmath.rgamma(mpmath.mpf(self.alpha) * n + mpmath.mpf(self.beta))


def _sum_series(z, coef, policy, n_start=0):
    """Sum ``sum_{n >= n_start} coef(n) z**n`` elementwise.

    Elements whose terms cancel badly are resummed with mpmath at a precision
    matched to the observed digit loss.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    total = np.zeros_like(z)
    biggest = np.zeros_like(z)
    quiet = np.zeros(z.shape, dtype=int)
    active = np.ones(z.shape, dtype=bool)
    n = n_start
    taken = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while np.any(active):
            if taken >= policy.max_terms:
                raise NoConvergence(
                    f"series did not converge within {policy.max_terms} terms"
                )
            idx = np.flatnonzero(active)
            za = z[idx]
            c = coef(n)
            term = c * np.power(za, n)
            # a coefficient near the subnormal range or an overflowing power
            # loses digits in the plain product, so redo those in log space
            bad = ~np.isfinite(term) | (abs(c) < 1e-280)
            if np.any(bad):
                logc, sign = coef.log_abs(n)
                zb = za[bad]
                parity = np.where((zb < 0) & (n % 2 == 1), -1.0, 1.0)
                with np.errstate(divide="ignore"):
                    term[bad] = sign * parity * np.exp(n * np.log(np.abs(zb)) + logc)
                if not np.all(np.isfinite(term)):
                    if np.any(za[~np.isfinite(term)] < 0):
                        raise NoConvergence("alternating series terms exceed double range")
                    raise OverflowError("Mittag-Leffler-type series overflows")
            total[idx] += term
            biggest[idx] = np.maximum(biggest[idx], np.abs(term))
            small = np.abs(term) <= policy.abs_tol + policy.rel_tol * np.abs(total[idx])
            quiet[idx] = np.where(small, quiet[idx] + 1, 0)
            taken += 1
            n += 1
            if taken >= policy.min_terms:
                done = quiet[idx] >= policy.patience
                active[idx[done]] = False
    with np.errstate(divide="ignore", invalid="ignore"):
        loss = np.where(total != 0, biggest / np.abs(total), np.where(biggest > 0, np.inf, 1.0))
    redo = np.flatnonzero(loss > _CANCELLATION_LIMIT)
    for i in redo:
        total[i] = _sum_series_mp(z[i], coef, policy, n_start, biggest[i])
    return total


def _sum_series_mp(z, coef, policy, n_start, biggest):
    digits = 20 + int(math.ceil(math.log10(max(biggest, 1.0)))) + 17
    with mpmath.workdps(digits):
        zz = mpmath.mpf(z)
        acc = mpmath.mpf(0)
        quiet = 0
        n = n_start
        for _ in range(policy.max_terms):
            term = coef.mp(n) * zz**n
            acc += term
            if abs(term) <= mpmath.mpf(policy.abs_tol) + mpmath.mpf(policy.rel_tol) * abs(acc):
                quiet += 1
                if quiet >= policy.patience:
                    return float(acc)
            else:
                quiet = 0
            n += 1
    raise NoConvergence(f"series did not converge within {policy.max_terms} terms")


def _ml_talbot(alpha, beta, z, m=_TALBOT_NODES):
    """``E_{alpha,beta}(z)`` for real ``z < 0`` and ``alpha < 1`` by inverse Laplace transform.

    ``E_{alpha,beta}(z) = L^-1[s**(alpha-beta) / (s**alpha - z)](1)``.  For
    ``alpha < 1`` and ``z < 0`` the poles sit off the principal sheet, so the
    fixed Talbot contour sees only the branch cut.
    """
    z = np.asarray(z, dtype=float)[:, None]
    theta = np.arange(1, m) * np.pi / m
    cot = 1.0 / np.tan(theta)
    r = 2.0 * m / 5.0
    s = r * theta * (cot + 1j)
    sigma = theta + (theta * cot - 1.0) * cot
    fs = s ** (alpha - beta) / (s**alpha - z)
    f0 = r ** (alpha - beta) / (r**alpha - z[:, 0])
    acc = 0.5 * f0 * math.exp(r) + np.sum(np.real(np.exp(s) * fs * (1.0 + 1j * sigma)), axis=1)
    return r / m * acc


def ml_series(alpha, beta, z, policy=None):
    """Two-parameter Mittag-Leffler function ``sum_n z**n / Gamma(alpha*n + beta)``.

    The power series is summed directly unless ``z`` is negative enough that
    the alternating terms would cancel away more than a few digits; those
    points go through a contour-integral inversion (``alpha < 1``) or an
    extended-precision sum (``alpha = 1``).
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    policy = policy or _DEFAULT_POLICY
    arr, scalar = _as_array(z)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    with np.errstate(over="ignore"):
        stiff = (flat < 0) & (np.power(np.abs(flat), 1.0 / alpha) > _SERIES_SPREAD)
    easy = ~stiff
    coef = _Coef(alpha, beta)
    if np.any(easy):
        out[easy] = _sum_series(flat[easy], coef, policy)
    if np.any(stiff):
        if alpha < 1.0:
            out[stiff] = _ml_talbot(alpha, beta, flat[stiff])
        else:
            zs = flat[stiff]
            out[stiff] = [_sum_series_mp(zi, coef, policy, 0, math.exp(-zi)) for zi in zs]
    return _out(out.reshape(arr.shape), scalar)


def _check_alpha(alpha):
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"order alpha={alpha!r} outside (0, 1]")


def mittag_leffler(alpha, x, policy=None):
    """One-parameter Mittag-Leffler function ``E_alpha(x)``.

    See :func:`ml_series` for how the sum is carried out.  Arguments below
    ``-50`` are refused with :class:`NoConvergence`.

    >>> round(mittag_leffler(1.0, 1.0), 12)
    2.718281828459
    """
    _check_alpha(alpha)
    arr, scalar = _as_array(x)
    if np.any(arr < ML_NEGATIVE_LIMIT):
        raise NoConvergence(
            f"Mittag-Leffler series refused for arguments below {ML_NEGATIVE_LIMIT}"
        )
    return ml_series(alpha, 1.0, x, policy)


def mittag_leffler_kernel_dt(alpha, c, u, policy=None):
    """Derivative ``d/du E_alpha(c u**alpha)`` for ``u > 0``.

    Evaluated as ``c u**(alpha-1) E_{alpha,alpha}(c u**alpha)``, which is the
    termwise-differentiated series.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    arr, scalar = _as_array(u)
    if np.any(arr <= 0):
        raise DomainError("kernel derivative needs u > 0")
    if c == 0:
        return _out(np.zeros_like(arr), scalar)
    z = c * np.power(arr, alpha)
    out = c * np.power(arr, alpha - 1.0) * np.asarray(ml_series(alpha, alpha, z, policy))
    return _out(out, scalar)


def _kummer_positive(mu, y, policy):
    """``sum_n (-y)**n / Gamma(mu+n+1)`` for ``y > 0``, ``mu > 0``, positive terms only.

    Uses ``sum_n x**n/Gamma(mu+n+1) = e**x * gamma*(mu, x)`` with the
    alternating-free expansion of ``gamma*`` at negative ``x``.
    """
    out = np.empty_like(y)
    rg = recip_gamma(mu)
    for i, yi in enumerate(y):
        # sum_n yi**n / (n! (mu+n)) times exp(-yi), accumulated with the
        # exponential folded in so nothing overflows before y ~ 700
        term = math.exp(-yi)
        acc = term / mu
        n = 0
        quiet = 0
        while True:
            n += 1
            if n > policy.max_terms:
                raise NoConvergence("Miller-Ross series did not converge")
            term *= yi / n
            piece = term / (mu + n)
            acc += piece
            if piece <= policy.abs_tol + policy.rel_tol * acc and n > yi:
                quiet += 1
                if quiet >= policy.patience:
                    break
            else:
                quiet = 0
        out[i] = rg * acc
    return out


def miller_ross(nu, a, t, policy=None):
    """Miller-Ross function ``E_t(nu, a) = t**nu * sum_n (a t)**n / Gamma(nu+n+1)``.

    Terms whose Gamma argument is a pole contribute zero.  Strongly negative
    ``a t`` is summed through a positive-term transformation instead of the
    alternating series.
    """
    policy = policy or _DEFAULT_POLICY
    arr, scalar = _as_array(t)
    flat = np.atleast_1d(arr).astype(float)
    if np.any(flat <= 0):
        raise DomainError("miller_ross needs t > 0")
    x = a * flat
    sums = np.empty_like(flat)
    plain = x >= _MILLER_ROSS_SWITCH
    if np.any(plain):
        sums[plain] = _sum_series(x[plain], _Coef(1.0, nu + 1.0), policy)
    far = ~plain
    if np.any(far):
        # walk the order up into (0, 1] with S(nu) = 1/Gamma(nu+1) + x S(nu+1)
        steps = max(0, int(math.ceil(-nu + 1e-15)))
        mu = nu + steps
        if mu <= 0:
            mu += 1.0
            steps += 1
        xs = x[far]
        s = _kummer_positive(mu, -xs, policy)
        for j in range(steps - 1, -1, -1):
            s = recip_gamma(nu + j + 1.0) + xs * s
        sums[far] = s
    out = np.power(flat, nu) * sums
    return _out(out.reshape(arr.shape), scalar)
