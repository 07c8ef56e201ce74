"""When do AB integrals compose additively?

``AB I^alpha AB I^beta f = AB I^(alpha+beta) f`` expands into an RL integral
equation in ``f``; applying ``D^(alpha+beta)`` turns it into an RL
fractional ODE whose indicial polynomial (in ``y = x**alpha`` when
``alpha = beta``) factors as ``alpha**2 (y - 1)(y - (alpha-2)/alpha)``.
For ``alpha = 1/q`` the ODE is solved by a combination of Miller-Ross
functions, see :func:`semigroup_solution`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ab_ops import ABParams, ConstantNorm, ExponentialNorm, NormalizationWarning, ab_integral
from .errors import DomainError, ValidationError
from .funcmodel import Grid, PowerSum, SampledFn, SmoothFn
from .rl_ops import rl_derivative, rl_integral_power
from .specialfn import gamma, miller_ross, recip_gamma

__all__ = [
    "SemigroupCase",
    "semigroup_sides",
    "semigroup_defect",
    "fie_residual",
    "IndicialPoly",
    "indicial_poly",
    "SemigroupSolution",
    "semigroup_solution",
    "fde_residual",
]


@dataclass(frozen=True)
class SemigroupCase:
    """Orders ``alpha, beta`` (with ``alpha + beta < 1``), normalisation and a power sum ``f``."""

    alpha: float
    beta: float
    f: PowerSum = field(default_factory=lambda: PowerSum.monomial(1.0))
    norm: object = field(default_factory=ConstantNorm)

    def __post_init__(self):
        if not (0 < self.alpha < 1 and 0 < self.beta < 1):
            raise DomainError("alpha and beta must lie in (0, 1)")
        if not self.alpha + self.beta < 1:
            raise DomainError("alpha + beta must stay below 1")
        if isinstance(self.f, SmoothFn):
            object.__setattr__(self, "f", self.f.as_powersum())
        if not isinstance(self.f, PowerSum):
            raise ValidationError("f must be a PowerSum")
        if self.f.base != 0.0:
            raise ValidationError("semigroup cases are based at t = 0")

    def params(self, order):
        return ABParams(order, 0.0, self.norm)

    @property
    def norm_is_multiplicative(self):
        """Whether ``B(alpha) B(beta) == B(alpha + beta)`` for these orders."""
        B = self.norm
        return bool(np.isclose(B(self.alpha) * B(self.beta), B(self.alpha + self.beta), rtol=1e-14))


def semigroup_sides(case: SemigroupCase):
    """``(AB I^alpha AB I^beta f, AB I^(alpha+beta) f)`` as exact power sums."""
    inner = ab_integral(case.f, case.params(case.beta))
    iterated = ab_integral(inner, case.params(case.alpha))
    direct = ab_integral(case.f, case.params(case.alpha + case.beta))
    return iterated, direct


def _on(ps: PowerSum, grid):
    if grid is None:
        return ps
    return SampledFn(grid, ps.eval(grid.t))


def semigroup_defect(case: SemigroupCase, grid: Grid = None):
    """``AB I^alpha(AB I^beta f) - AB I^(alpha+beta) f``, exact (or sampled on ``grid``)."""
    iterated, direct = semigroup_sides(case)
    return _on(iterated - direct, grid)


def fie_residual(case: SemigroupCase, grid: Grid = None):
    """Left side of the RL integral equation equivalent to the semigroup property.

    ``[ab/(B_a B_b) - (a+b)/B_ab] I^(a+b) f + a(1-b)/(B_a B_b) I^a f
    + b(1-a)/(B_a B_b) I^b f + [(1-a)(1-b)/(B_a B_b) - (1-a-b)/B_ab] f``
    """
    a, b, f = case.alpha, case.beta, case.f
    Ba, Bb, Bab = case.norm(a), case.norm(b), case.norm(a + b)
    BB = Ba * Bb
    out = rl_integral_power(f, a + b) * (a * b / BB - (a + b) / Bab)
    out = out + rl_integral_power(f, a) * (a * (1.0 - b) / BB)
    out = out + rl_integral_power(f, b) * (b * (1.0 - a) / BB)
    out = out + f * ((1.0 - a) * (1.0 - b) / BB - (1.0 - a - b) / Bab)
    return _on(out, grid)


@dataclass(frozen=True)
class IndicialPoly:
    """``P(x) = ab x**(a+b) + a(1-b) x**b + b(1-a) x**a + (ab - a - b)``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0 < self.alpha < 1 and 0 < self.beta < 1):
            raise DomainError("alpha and beta must lie in (0, 1)")

    def expanded(self, x):
        a, b = self.alpha, self.beta
        x = np.asarray(x, dtype=float)
        return a * b * x ** (a + b) + a * (1 - b) * x**b + b * (1 - a) * x**a + (a * b - a - b)

    __call__ = expanded

    def factored(self, x):
        """``(b x**a - b + 1)(a x**b - a + 1) - 1``."""
        a, b = self.alpha, self.beta
        x = np.asarray(x, dtype=float)
        return (b * x**a - b + 1) * (a * x**b - a + 1) - 1

    @property
    def symmetric(self):
        return self.alpha == self.beta

    def _need_symmetric(self):
        if not self.symmetric:
            raise ValidationError("the closed-form factorisation needs alpha == beta")

    def in_y(self, y):
        """``P`` as a quadratic in ``y = x**alpha``, ``alpha**2 (y - 1)(y - (alpha-2)/alpha)`` (``alpha == beta``)."""
        self._need_symmetric()
        a = self.alpha
        y = np.asarray(y, dtype=float)
        return a * a * (y - 1.0) * (y - (a - 2.0) / a)

    def derivative_in_y(self, y):
        """``dP/dy = 2 alpha (alpha y - alpha + 1)`` (``alpha == beta``)."""
        self._need_symmetric()
        a = self.alpha
        return 2.0 * a * (a * np.asarray(y, dtype=float) - a + 1.0)

    def roots_y(self):
        """Roots in ``y = x**alpha``: ``(1, (alpha-2)/alpha)`` when ``alpha == beta``."""
        self._need_symmetric()
        return 1.0, (self.alpha - 2.0) / self.alpha

    def numeric_roots(self, max_denominator=64):
        """Roots in ``y = x**(1/q)`` for rational orders ``alpha = p1/q``, ``beta = p2/q``.

        A diagnostic: the orders are rounded to fractions with denominator
        at most ``max_denominator`` and the resulting polynomial in ``y`` is
        handed to :func:`numpy.roots`.  Returns ``(q, roots)``.
        """
        fa = Fraction(self.alpha).limit_denominator(max_denominator)
        fb = Fraction(self.beta).limit_denominator(max_denominator)
        q = np.lcm(fa.denominator, fb.denominator)
        pa, pb = int(fa * q), int(fb * q)
        a, b = float(fa), float(fb)
        coef = np.zeros(pa + pb + 1)
        coef[pa + pb] += a * b
        coef[pb] += a * (1 - b)
        coef[pa] += b * (1 - a)
        coef[0] += a * b - a - b
        return int(q), np.roots(coef[::-1])


def indicial_poly(alpha, beta=None) -> IndicialPoly:
    return IndicialPoly(alpha, alpha if beta is None else beta)


@dataclass(frozen=True)
class SemigroupSolution:
    r"""``f = 1/(2 alpha) sum_k E_t(-k alpha, 1) - 1/(2 alpha) sum_k r**(q-k-1) E_t(-k alpha, r**q)``.

    ``alpha = 1/q``, ``r = (alpha - 2)/alpha`` and ``E_t(nu, a) = t**nu sum_n (a t)**n / Gamma(nu + n + 1)``
    (Miller-Ross).  ``scale`` multiplies the whole combination.
    """

    q: int
    scale: float = 1.0

    def __post_init__(self):
        if int(self.q) != self.q or self.q <= 2:
            raise ValidationError("q must be an integer greater than 2")
        object.__setattr__(self, "q", int(self.q))

    @property
    def alpha(self):
        return 1.0 / self.q

    @property
    def ratio(self):
        return (self.alpha - 2.0) / self.alpha

    def families(self):
        """Triples ``(coefficient, nu, a)`` of the Miller-Ross terms."""
        al, r, q = self.alpha, self.ratio, self.q
        c = self.scale / (2.0 * al)
        out = [(c, -k * al, 1.0) for k in range(q)]
        out += [(-c * r ** (q - k - 1), -k * al, r**q) for k in range(q)]
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        total = np.zeros(t.shape)
        for c, nu, a in self.families():
            total = total + c * miller_ross(nu, a, t)
        return float(total) if total.ndim == 0 else total

    def singular_part(self, K=2.0):
        """Series terms ``(coef, exponent)`` with exponent below ``K``.

        Each Miller-Ross term contributes ``c a**n / Gamma(nu + n + 1) t**(nu + n)``;
        terms at Gamma poles vanish.  Exponents may be ``<= -1`` so the result is
        a plain list rather than a :class:`PowerSum`.
        """
        out = []
        for c, nu, a in self.families():
            n = 0
            while nu + n < K:
                w = c * a**n * recip_gamma(nu + n + 1.0)
                if w != 0.0:
                    out.append((w, nu + n))
                n += 1
        return out


def semigroup_solution(q: int, norm=None, scale=1.0) -> SemigroupSolution:
    """Miller-Ross solution family for ``alpha = beta = 1/q``.

    The derivation needs ``B(alpha)**2 = B(2 alpha)``; an exponential
    normalisation satisfies it but cannot meet ``B(0) = B(1) = 1`` unless
    trivial, so it is accepted with a warning and otherwise ignored (the
    FDE does not involve ``B`` under that assumption).
    """
    if norm is not None and isinstance(norm, ExponentialNorm) and norm.lam != 0:
        warnings.warn("the solution family assumes B(alpha)**2 = B(2 alpha); B is otherwise unused",
                      NormalizationWarning, stacklevel=2)
    return SemigroupSolution(q, scale)


def _fde_combine(alpha, d2, d1, f):
    return d2 * (alpha * alpha) + d1 * (2.0 * alpha * (1.0 - alpha)) + f * (alpha * alpha - 2.0 * alpha)


def _exact_rl_terms(terms, mu, t):
    """RL derivative of ``sum c t**e`` term by term, ``c Gamma(e+1)/Gamma(e-mu+1) t**(e-mu)``."""
    out = np.zeros(t.shape)
    for c, e in terms:
        out = out + c * gamma(e + 1.0) * recip_gamma(e - mu + 1.0) * t ** (e - mu)
    return out


def fde_residual(f, alpha, grid: Grid, K=2.0):
    r"""Residual ``alpha**2 D^(2 alpha) f + 2 alpha (1-alpha) D^alpha f + (alpha**2 - 2 alpha) f``.

    Parameters
    ----------
    f : SemigroupSolution, PowerSum or SmoothFn/callable
        A power sum is handled exactly.  A :class:`SemigroupSolution` is split
        into its singular series terms with exponent below ``K`` (differentiated
        exactly) and a remainder vanishing at 0, which is sampled and
        differentiated on the grid.  Other callables are sampled directly and
        must be finite at ``t = 0``.
    alpha : float
        Order, with ``2 alpha < 1``.
    grid : Grid
        Starting at 0.  The value at ``t = 0`` is ``nan`` whenever the
        residual is singular there.
    """
    if not 0 < alpha < 0.5:
        raise DomainError("need 0 < alpha < 1/2 so that 2 alpha < 1")
    if grid.a != 0.0:
        raise ValidationError("grid must start at t = 0")
    t = grid.t
    if isinstance(f, SmoothFn) and f.exact is not None:
        f = f.exact
    if isinstance(f, PowerSum):
        if f.base != 0.0:
            raise ValidationError("f must be based at t = 0")
        res = _fde_combine(alpha, rl_derivative(f, 2 * alpha), rl_derivative(f, alpha), f)
        vals = np.full(t.shape, np.nan)
        vals[1:] = res.eval(t[1:])
        if np.all(res.expos >= 0):
            vals[0] = res.value_at_base()
            return SampledFn(grid, vals)
        return SampledFn(grid, vals, singular_at_base=True)
    if isinstance(f, SemigroupSolution):
        sing = f.singular_part(K)
        tp = t[1:]
        rem = np.zeros(t.shape)
        rem[1:] = f(tp) - sum(c * tp**e for c, e in sing)
        rs = SampledFn(grid, rem)
        d2 = rl_derivative(rs, 2 * alpha).values
        d1 = rl_derivative(rs, alpha).values
        vals = np.full(t.shape, np.nan)
        vals[1:] = _fde_combine(
            alpha,
            d2[1:] + _exact_rl_terms(sing, 2 * alpha, tp),
            d1[1:] + _exact_rl_terms(sing, alpha, tp),
            f(tp),
        )
        return SampledFn(grid, vals, singular_at_base=True)
    if callable(f):
        fs = SampledFn(grid, np.asarray(f(t), dtype=float))
        d2 = rl_derivative(fs, 2 * alpha)
        d1 = rl_derivative(fs, alpha)
        vals = _fde_combine(alpha, d2.values, d1.values, fs.values)
        singular = d2.singular_at_base or d1.singular_at_base
        return SampledFn(grid, vals, singular_at_base=singular)
    raise ValidationError(f"unsupported function {type(f).__name__}")
