"""Derivatives and integrals with Mittag-Leffler kernel.

Two independent evaluation paths are provided for the Riemann-Liouville
type (ABR) derivative: product-trapezoid quadrature against the kernel, and
the expansion ``B/(1-alpha) sum_n lam**n I^(alpha n) f`` with
``lam = -alpha/(1-alpha)``.  The Caputo type (ABC) derivative has the same
two paths applied to ``f'``.

On power sums the expansion can also be resummed term by term into
two-parameter Mittag-Leffler functions (the ``"ml"`` path).  The expanded
series alternates and loses roughly ``log10 E_alpha(|lam| t**alpha)`` digits,
which matters once ``alpha`` approaches 1; the resummed form does not.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _quadrature
from .errors import DomainError, NoConvergence, ValidationError
from .funcmodel import Grid, PowerSum, SampledFn, SmoothFn, as_smooth, sample
from .policy import TruncationPolicy
from .rl_ops import rl_integral_grid, rl_integral_power
from .specialfn import gamma, ml_series, recip_gamma

__all__ = [
    "ConstantNorm",
    "ExponentialNorm",
    "NormalizationWarning",
    "CancellationWarning",
    "ABParams",
    "ABSeriesReport",
    "abr_derivative_kernel",
    "abr_derivative_series",
    "abr_derivative",
    "abr_derivative_ml",
    "abc_derivative_ml",
    "MLResummed",
    "abc_derivative_kernel",
    "abc_derivative_series",
    "abc_derivative",
    "ab_integral",
    "IdentityReport",
    "verify_inverse_identities",
]

DEFAULT_SPAN = 2.0


class NormalizationWarning(UserWarning):
    """A normalisation function that does not satisfy ``B(0) = B(1) = 1``."""


class CancellationWarning(UserWarning):
    """The expanded series cancels badly; the ``"ml"`` path keeps full accuracy."""


CANCELLATION_LIMIT = 1e-8


@dataclass(frozen=True)
class ConstantNorm:
    """``B(alpha) = 1``."""

    def __call__(self, alpha):
        return 1.0

    def describe(self):
        return "constant"


@dataclass(frozen=True)
class ExponentialNorm:
    """``B(alpha) = exp(lam * alpha)``.

    Multiplicative in the order (``B(a) B(b) = B(a + b)``), but ``B(1) = 1``
    only when ``lam = 0``; any other rate triggers a
    :class:`NormalizationWarning`.
    """

    lam: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise ValidationError("exponential norm rate must be finite")
        if self.lam != 0.0:
            warnings.warn(
                f"B(alpha)=exp({self.lam}*alpha) has B(1) != 1",
                NormalizationWarning,
                stacklevel=3,
            )

    def __call__(self, alpha):
        return math.exp(self.lam * alpha)

    def describe(self):
        return f"exponential({self.lam:g})"


@dataclass(frozen=True)
class ABParams:
    """Order, base point and normalisation of an AB operator.

    Parameters
    ----------
    alpha
        Order, strictly inside ``(0, 1)``.
    base
        Lower terminal ``a``.
    norm
        Normalisation function ``B``; constant 1 by default.
    """

    alpha: float
    base: float = 0.0
    norm: Union[ConstantNorm, ExponentialNorm] = field(default_factory=ConstantNorm)

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a < 1.0):
            raise DomainError(f"AB order must lie strictly inside (0, 1), got {self.alpha}")
        if not math.isfinite(self.base):
            raise ValidationError("base point must be finite")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "base", float(self.base))
        if not self.B > 0:
            raise DomainError("normalisation must be positive")

    @property
    def B(self):
        return self.norm(self.alpha)

    @property
    def lam(self):
        """Kernel coefficient ``-alpha/(1-alpha)``."""
        return -self.alpha / (1.0 - self.alpha)

    @property
    def scale(self):
        """Prefactor ``B(alpha)/(1-alpha)``."""
        return self.B / (1.0 - self.alpha)

    def with_alpha(self, alpha):
        return ABParams(alpha, self.base, self.norm)


@dataclass(frozen=True)
class ABSeriesReport:
    """Truncation record of a series evaluation.

    ``tail_estimate`` bounds the absolute value of the discarded terms
    uniformly on ``[base, base + span]``.  ``rounding_estimate`` is machine
    epsilon times the summed term bounds: the alternating series cancels,
    and this is the size of error to expect from that alone.
    """

    terms_used: int
    tail_estimate: float
    span: float
    converged: bool = True
    rounding_estimate: float = 0.0


_DEFAULT_POLICY = TruncationPolicy()


def _check_base(f, p):
    base = f.base if isinstance(f, PowerSum) else f.grid.a
    if base != p.base:
        raise ValidationError(f"function base {base} differs from operator base {p.base}")


class _Tail:
    """Geometric tail bound for ``sum_n lam**n I^(alpha n + shift) f`` on a span.

    For a term ``c (t-a)**b`` the n-th series term is bounded by
    ``|c| |lam|**n Gamma(b+1)/Gamma(b+alpha n+shift+1) span**(b+alpha n+shift)``;
    consecutive ratios decrease in ``n``, so once the ratio ``rho`` drops below
    one the remainder after ``n`` is at most ``bound_n / (1 - rho)``.
    """

    def __init__(self, coefs, expos, p, span, shift):
        self.c = np.abs(np.asarray(coefs, dtype=float))
        self.b = np.asarray(expos, dtype=float)
        self.alpha = p.alpha
        self.lam = abs(p.lam)
        self.span = span
        self.shift = shift
        self.scale = abs(p.scale)
        self.g = np.array([gamma(x + 1.0) for x in self.b]) if self.b.size else np.zeros(0)

    def bound(self, n):
        if self.c.size == 0:
            return 0.0
        x = self.b + self.alpha * n + self.shift
        logs = (
            np.log(np.maximum(self.c * self.g, 1e-300))
            + n * math.log(max(self.lam, 1e-300))
            + x * math.log(self.span)
            - np.array([math.lgamma(v + 1.0) for v in x])
        )
        return self.scale * float(np.sum(np.exp(logs)))

    def remainder_after(self, n):
        """Bound on ``sum_{k > n}`` of the term magnitudes, ``inf`` if not yet geometric."""
        b1 = self.bound(n + 1)
        b2 = self.bound(n + 2)
        if b1 == 0.0:
            return 0.0
        rho = b2 / b1
        if rho >= 1.0:
            return math.inf
        return b1 / (1.0 - rho)


def _series_powersum(f: PowerSum, p, policy, span, shift):
    """``scale * sum_n lam**n I^(alpha n + shift) f`` on a power sum, with tail report."""
    tail = _Tail(f.coefs, f.expos, p, span, shift)
    collected = []
    scale_acc = 0.0
    n = 0
    while True:
        mu = p.alpha * n + shift
        term = f if mu == 0 else rl_integral_power(f, mu)
        factor = p.scale * p.lam**n
        collected.extend((factor * c, e) for c, e in term.terms)
        scale_acc += tail.bound(n)
        n += 1
        if n >= policy.min_terms:
            rest = tail.remainder_after(n - 1)
            if rest <= policy.tolerance(scale_acc):
                break
        if n >= policy.max_terms:
            raise NoConvergence(f"AB series needed more than {policy.max_terms} terms")
    rounding = float(np.finfo(float).eps * scale_acc)
    size = p.scale * float(np.sum(np.abs(f.coefs) * np.maximum(span, 1.0) ** np.maximum(f.expos, 0.0))) if len(f) else 0.0
    if rounding > CANCELLATION_LIMIT * max(size, 1e-300):
        warnings.warn(
            f"expanded AB series cancels: rounding error up to {rounding:.3g} on a result of size ~{size:.3g}; "
            "use path='ml' for power sums",
            CancellationWarning,
            stacklevel=3,
        )
    return PowerSum(tuple(collected), f.base), ABSeriesReport(n, rest, span, True, rounding)


def _series_grid(f: SampledFn, p, policy, shift):
    g = f.grid
    span = g.b - g.a
    fmax = float(np.max(np.abs(f.values)))
    tail = _Tail([fmax], [0.0], p, span, shift)
    acc = np.zeros(g.n)
    scale_acc = 0.0
    n = 0
    while True:
        mu = p.alpha * n + shift
        term = f.values if mu == 0 else rl_integral_grid(f, mu).values
        acc += p.scale * p.lam**n * term
        scale_acc += tail.bound(n)
        n += 1
        if n >= policy.min_terms:
            rest = tail.remainder_after(n - 1)
            if rest <= policy.tolerance(scale_acc):
                break
        if n >= policy.max_terms:
            raise NoConvergence(f"AB series needed more than {policy.max_terms} terms")
    return SampledFn(g, acc), ABSeriesReport(n, rest, span)


def abr_derivative_series(f, p: ABParams, policy: Optional[TruncationPolicy] = None, span=None):
    r"""ABR derivative as ``B/(1-alpha) sum_n lam**n I^(alpha n) f``.

    Parameters
    ----------
    f : PowerSum or SampledFn
        Power sums are transformed exactly term by term; samples go through
        grid RL integrals.
    span
        Length of the interval ``[a, a + span]`` on which the tail bound must
        hold (power sums only; defaults to 2).  Grids use their own length.

    Returns
    -------
    value, ABSeriesReport
    """
    policy = policy or _DEFAULT_POLICY
    if isinstance(f, SmoothFn) and f.exact is not None:
        f = f.exact
    _check_base(f, p) if isinstance(f, (PowerSum, SampledFn)) else None
    if isinstance(f, PowerSum):
        return _series_powersum(f, p, policy, span or DEFAULT_SPAN, 0.0)
    if isinstance(f, SampledFn):
        return _series_grid(f, p, policy, 0.0)
    raise ValidationError(f"series path expects PowerSum or SampledFn, got {type(f).__name__}")


def abr_derivative_kernel(f: SampledFn, p: ABParams) -> SampledFn:
    r"""ABR derivative by quadrature of the differentiated kernel.

    ``B/(1-alpha) [f(t) + int_a^t f(x) d/dt E_alpha(lam (t-x)**alpha) dx]``:
    the derivative of the memory integral is taken analytically so only the
    weakly singular ``E'`` integral is discretized (product trapezoid).
    """
    if not isinstance(f, SampledFn):
        raise ValidationError("kernel path expects SampledFn samples")
    _check_base(f, p)
    g = f.grid
    w = _quadrature.ml_weights(g.n, p.alpha, p.lam, g.h, "dt")
    vals = p.scale * (f.values + _quadrature.convolve(f.values, w))
    return SampledFn(g, vals)


@dataclass(frozen=True)
class MLResummed:
    r"""``B/(1-alpha) sum_j c_j Gamma(b_j+1) tau**(b_j+shift) E_{alpha, b_j+shift+1}(lam tau**alpha)``.

    The closed form of ``B/(1-alpha) sum_n lam**n I^(alpha n + shift)`` applied
    to ``sum_j c_j tau**b_j`` (``tau = t - a``).
    """

    params: ABParams
    source: PowerSum
    shift: float = 0.0

    def __call__(self, t):
        p = self.params
        arr = np.asarray(t, dtype=float)
        tau = np.atleast_1d(arr - p.base)
        if np.any(tau < 0):
            raise DomainError("evaluation left of the base point")
        z = p.lam * tau**p.alpha
        out = np.zeros(tau.shape)
        for c, b in self.source.terms:
            e = b + self.shift
            with np.errstate(divide="ignore"):
                powr = np.where(tau == 0, 1.0 if e == 0 else 0.0, tau**e) if e >= 0 else tau**e
            out += c * gamma(b + 1.0) * powr * np.asarray(ml_series(p.alpha, e + 1.0, z))
        out *= p.scale
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def abr_derivative_ml(f, p: ABParams) -> MLResummed:
    """ABR derivative of a power sum as a resummed Mittag-Leffler combination."""
    if isinstance(f, SmoothFn) and f.exact is not None:
        f = f.exact
    if not isinstance(f, PowerSum):
        raise ValidationError("the ml path needs a power sum")
    _check_base(f, p)
    return MLResummed(p, f, 0.0)


def abc_derivative_ml(f, p: ABParams) -> MLResummed:
    """ABC derivative of a power sum, resummed (applies the ABR form to ``f'`` with shift 1)."""
    f, fp = _derivative_powersum(f)
    _check_base(f, p)
    return MLResummed(p, fp, 1.0)


def abr_derivative(f, p, policy=None, path="series", grid=None, span=None):
    """ABR derivative through any of the paths.

    The kernel path samples ``f`` on ``grid`` (or uses the given samples);
    the series path returns only the value (see :func:`abr_derivative_series`
    for the truncation report); the ``"ml"`` path returns a callable
    :class:`MLResummed`.
    """
    if path == "series":
        return abr_derivative_series(f, p, policy, span)[0]
    if path == "ml":
        return abr_derivative_ml(f, p)
    if path == "kernel":
        if not isinstance(f, SampledFn):
            if grid is None:
                raise ValidationError("kernel path needs a grid")
            f = sample(f, grid)
        return abr_derivative_kernel(f, p)
    raise ValidationError(f"unknown path {path!r}")


def _derivative_powersum(f):
    if isinstance(f, SmoothFn):
        if f.exact is None:
            raise ValidationError("series path needs a power-sum form")
        f = f.exact
    if not isinstance(f, PowerSum):
        raise ValidationError(f"expected PowerSum or SmoothFn, got {type(f).__name__}")
    return f, f.derivative()


def abc_derivative_series(f, p: ABParams, policy=None, span=None):
    r"""ABC derivative as ``B/(1-alpha) sum_n lam**n I^(alpha n + 1) f'`` (exact on power sums)."""
    policy = policy or _DEFAULT_POLICY
    f, fp = _derivative_powersum(f)
    _check_base(f, p)
    return _series_powersum(fp, p, policy, span or DEFAULT_SPAN, 1.0)


def abc_derivative_kernel(f, p: ABParams, grid: Grid) -> SampledFn:
    r"""ABC derivative by product-trapezoid quadrature of ``f'`` against ``E_alpha(lam u**alpha)``.

    ``f'`` is sampled from the exact derivative oracle.
    """
    f = as_smooth(f)
    if grid.a != p.base:
        raise ValidationError("grid must start at the operator base point")
    fp = sample(lambda t: f.d(1, t), grid)
    w = _quadrature.ml_weights(grid.n, p.alpha, p.lam, grid.h, "plain")
    return SampledFn(grid, p.scale * _quadrature.convolve(fp.values, w))


def abc_derivative(f, p, policy=None, path="series", grid=None, span=None):
    """ABC derivative through any path; the series path returns a :class:`PowerSum`."""
    if path == "series":
        return abc_derivative_series(f, p, policy, span)[0]
    if path == "ml":
        return abc_derivative_ml(f, p)
    if path == "kernel":
        if grid is None:
            raise ValidationError("kernel path needs a grid")
        return abc_derivative_kernel(f, p, grid)
    raise ValidationError(f"unknown path {path!r}")


def ab_integral(f, p: ABParams):
    r"""AB integral ``(1-alpha)/B f + alpha/B I^alpha f``."""
    if isinstance(f, SmoothFn) and f.exact is not None:
        f = f.exact
    B = p.B
    if isinstance(f, PowerSum):
        _check_base(f, p)
        return f * ((1.0 - p.alpha) / B) + rl_integral_power(f, p.alpha) * (p.alpha / B)
    if isinstance(f, SampledFn):
        _check_base(f, p)
        return f * ((1.0 - p.alpha) / B) + rl_integral_grid(f, p.alpha) * (p.alpha / B)
    raise ValidationError(f"ab_integral expects PowerSum or SampledFn, got {type(f).__name__}")


IDENTITY_NAMES = (
    "left_inverse",
    "right_inverse",
    "newton_leibniz",
    "commute_DD",
    "commute_II",
    "commute_DI",
)


@dataclass(frozen=True)
class IdentityReport:
    """Max-norm residuals of the inverse, Newton-Leibniz and commutativity identities."""

    alpha: float
    beta: float
    residuals: dict
    t_lo: float
    t_hi: float

    def worst(self):
        return max(self.residuals.values())

    def passed(self, tol=1e-8):
        return all(v < tol for v in self.residuals.values())


def default_beta(alpha):
    """Partner order for the commutativity checks."""
    return 0.25 if alpha == 0.5 else 0.5


def verify_inverse_identities(f: PowerSum, p: ABParams, beta=None, policy=None, t=None):
    """Residuals of the six AB identities for a power-sum input.

    Parameters
    ----------
    f
        Test function.
    p
        Operator parameters for order ``alpha``.
    beta
        Second order for the commutativity checks (default 0.5, or 0.25 when
        ``alpha = 0.5``).
    t
        Evaluation points; default 96 points on ``[a+0.1, a+2]``.
    """
    if isinstance(f, SmoothFn) and f.exact is not None:
        f = f.exact
    if not isinstance(f, PowerSum):
        raise ValidationError("identity checks need a power-sum input")
    _check_base(f, p)
    policy = policy or _DEFAULT_POLICY
    beta = default_beta(p.alpha) if beta is None else beta
    q = p.with_alpha(beta)
    if t is None:
        t = np.linspace(p.base + 0.1, p.base + 2.0, 96)
    t = np.asarray(t, dtype=float)
    span = float(np.max(t) - p.base)

    def D(g, par):
        return abr_derivative_series(g, par, policy, span)[0]

    def C(g, par):
        return abc_derivative_series(g, par, policy, span)[0]

    def I(g, par):
        return ab_integral(g, par)

    def norm(g):
        return float(np.max(np.abs(g(t))))

    fa = f.value_at_base()
    res = {
        "left_inverse": norm(I(D(f, p), p) - f),
        "right_inverse": norm(D(I(f, p), p) - f),
        "newton_leibniz": norm(I(C(f, p), p) - (f - fa)),
        "commute_DD": norm(D(D(f, q), p) - D(D(f, p), q)),
        "commute_II": norm(I(I(f, q), p) - I(I(f, p), q)),
        "commute_DI": norm(D(I(f, q), p) - I(D(f, p), q)),
    }
    return IdentityReport(p.alpha, beta, res, float(np.min(t)), float(np.max(t)))
