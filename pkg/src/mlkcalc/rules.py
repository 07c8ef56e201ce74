"""Leibniz and Faa di Bruno type rules for the ABR derivative.

Both rules expand ``ABR D^alpha = B/(1-alpha) sum_n lam**n I^(alpha n)`` and
apply the classical RL product/chain expansions to every ``I^(alpha n)``:

product::

    D(u v) = sum_{m=0}^{N} v^(m) [ B/(1-alpha) sum_n lam**n C(-n alpha, m) I^(alpha n + m) u ]

chain::

    D f(g) = B/(1-alpha) [ E_alpha(lam (t-a)**alpha) f(g)
             + sum_{m>=0} sum_{n>=1} lam**m C(-m alpha, n) (t-a)**(n + m alpha) / Gamma(n + m alpha + 1) S_n ]

with ``S_n = sum_k f^(k)(g) sum_P prod_i i/(P_i! (i!)**P_i) (g^(i))**P_i`` over
tuples ``P`` with ``sum P_i = k`` and ``sum i P_i = n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ab_ops import ABParams
from .errors import ValidationError
from .funcmodel import Grid, PowerSum, SampledFn, SmoothFn, as_smooth
from .rl_ops import rl_integral_power
from .specialfn import ml_series, recip_gamma

__all__ = [
    "RuleTruncation",
    "enumerate_partitions",
    "partition_weight",
    "generalized_binomial",
    "product_bracket",
    "product_rule",
    "chain_rule_coefficients",
    "chain_rule",
    "chain_rule_terms",
]


@dataclass(frozen=True)
class RuleTruncation:
    """Truncation of the two nested sums.

    ``M_outer`` caps the index of the AB series (powers of ``lam``);
    ``N_inner`` caps the classical rule index (derivative order).
    """

    M_outer: int = 40
    N_inner: int = 12

    def __post_init__(self):
        if self.M_outer < 1 or self.N_inner < 1:
            raise ValidationError("truncation indices must be at least 1")


_DEFAULT = RuleTruncation()


def _partitions_into(n, k, largest):
    """Partitions of ``n`` into exactly ``k`` parts, each ``<= largest``, parts non-increasing."""
    if k == 0:
        if n == 0:
            yield ()
        return
    if n < k:
        return
    for first in range(min(n - k + 1, largest), 0, -1):
        for rest in _partitions_into(n - first, k - 1, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def enumerate_partitions(n: int, k: int) -> tuple:
    """Multiplicity tuples ``(P_1..P_n)`` with ``sum P_i = k`` and ``sum i P_i = n``.

    >>> enumerate_partitions(4, 2)
    ((1, 0, 1, 0), (0, 2, 0, 0))
    """
    if not 1 <= k <= n:
        raise ValidationError(f"need 1 <= k <= n, got n={n}, k={k}")
    out = []
    for parts in _partitions_into(n, k, n):
        P = [0] * n
        for part in parts:
            P[part - 1] += 1
        out.append(tuple(P))
    return tuple(out)


def partition_weight(P) -> float:
    """``prod_{i=1}^n i / (P_i! (i!)**P_i)`` = ``n! / prod P_i! (i!)**P_i``."""
    n = len(P)
    den = 1
    for i, Pi in enumerate(P, start=1):
        den *= math.factorial(Pi) * math.factorial(i) ** Pi
    return math.factorial(n) / den


def generalized_binomial(x, n: int) -> float:
    """``x (x-1) ... (x-n+1) / n!``, finite for every real ``x``.

    >>> generalized_binomial(-0.5, 2)
    0.375
    """
    if n < 0:
        raise ValidationError("n must be nonnegative")
    out = 1.0
    for j in range(n):
        out *= (x - j) / (j + 1)
    return out


class _Kahan:
    """Compensated running sum of arrays."""

    def __init__(self, shape):
        self.total = np.zeros(shape)
        self._c = np.zeros(shape)

    def add(self, x):
        y = x - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


def _points(where):
    if isinstance(where, Grid):
        return where.t, where
    return np.asarray(where, dtype=float), None


def _wrap(vals, grid):
    return SampledFn(grid, vals) if grid is not None else vals


def _powersum_of(u):
    if isinstance(u, SmoothFn):
        u = u.as_powersum()
    if not isinstance(u, PowerSum):
        raise ValidationError("u needs an exact power-sum form")
    return u


def product_bracket(u, p: ABParams, m: int, M: int = _DEFAULT.M_outer) -> PowerSum:
    r"""Bracket ``B/(1-alpha) sum_{n=0}^{M} lam**n C(-n alpha, m) I^(alpha n + m) u`` as a power sum.

    At ``m = 0`` this is the truncated ABR series of ``u``.
    """
    u = _powersum_of(u)
    if u.base != p.base:
        raise ValidationError("u must be based at the operator base point")
    coefs, expos = [], []
    for n in range(M + 1):
        w = p.scale * p.lam**n * generalized_binomial(-n * p.alpha, m)
        if w == 0.0:
            continue
        order = p.alpha * n + m
        term = rl_integral_power(u, order) if order > 0 else u
        coefs.append(w * term.coefs)
        expos.append(term.expos)
    if not coefs:
        return PowerSum((), u.base)
    return PowerSum._from_arrays(np.concatenate(coefs), np.concatenate(expos), u.base)


def product_rule(u, v, p: ABParams, trunc: RuleTruncation = _DEFAULT, where=None):
    """ABR derivative of ``u v`` by the generalised Leibniz rule.

    Parameters
    ----------
    u : PowerSum or SmoothFn with an exact power-sum form
    v : SmoothFn or PowerSum
        Needs exact derivatives up to ``trunc.N_inner``.
    where : Grid or array_like
        Evaluation points; a grid gives a :class:`SampledFn`.
    """
    if where is None:
        raise ValidationError("product_rule needs evaluation points")
    t, grid = _points(where)
    v = as_smooth(v)
    acc = _Kahan(t.shape)
    for m in range(trunc.N_inner + 1):
        if v.order is not None and m > v.order:
            raise ValidationError(f"v has derivatives only up to order {v.order}")
        dv = np.broadcast_to(np.asarray(v.d(m, t), dtype=float), t.shape)
        if not np.any(dv):
            continue
        acc.add(dv * product_bracket(u, p, m, trunc.M_outer).eval(t))
    return _wrap(acc.total, grid)


def _faa_di_bruno(f, g, t, N):
    """``S_n(t)`` for ``n = 0..N`` (``S_0 = f(g(t))``)."""
    gt = np.asarray(g(t), dtype=float)
    dg = [None] + [np.asarray(g.d(i, t), dtype=float) for i in range(1, N + 1)]
    df = [np.asarray(f.d(k, gt), dtype=float) for k in range(N + 1)]
    S = [np.broadcast_to(df[0], t.shape).astype(float)]
    for n in range(1, N + 1):
        acc = np.zeros(t.shape)
        for k in range(1, n + 1):
            inner = np.zeros(t.shape)
            for P in enumerate_partitions(n, k):
                prod = np.full(t.shape, partition_weight(P))
                for i, Pi in enumerate(P, start=1):
                    if Pi:
                        prod = prod * dg[i] ** Pi
                inner += prod
            acc += df[k] * inner
        S.append(acc)
    return S


def chain_rule_coefficients(f, g, p: ABParams, trunc: RuleTruncation = _DEFAULT, t=0.0):
    """Array ``C[m, n]`` so that ``D f(g)(t) = sum_{m,n} C[m, n] (t-a)**(n + m alpha)``.

    ``C[m, n] = B/(1-alpha) lam**m C(-m alpha, n) / Gamma(n + m alpha + 1) S_n(t)``
    for ``0 <= m <= M_outer``, ``0 <= n <= N_inner``; the ``n = 0`` column
    resums to the Mittag-Leffler leading term.
    """
    f, g = as_smooth(f), as_smooth(g)
    t = float(t)
    M, N = trunc.M_outer, trunc.N_inner
    S = np.array([float(s) for s in _faa_di_bruno(f, g, np.asarray(t), N)])
    C = np.zeros((M + 1, N + 1))
    for m in range(M + 1):
        for n in range(N + 1):
            C[m, n] = p.scale * p.lam**m * generalized_binomial(-m * p.alpha, n) * recip_gamma(n + m * p.alpha + 1.0) * S[n]
    return C


def chain_rule_terms(f, g, p: ABParams, trunc: RuleTruncation = _DEFAULT, t=None):
    """Per-term contributions ``C[m, n] (t-a)**(n + m alpha)`` at each of the points ``t``.

    Shape ``(len(t), M_outer + 1, N_inner + 1)``; the ``n = 0`` column holds
    the truncated Mittag-Leffler leading term.
    """
    f, g = as_smooth(f), as_smooth(g)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    M, N = trunc.M_outer, trunc.N_inner
    S = np.stack(_faa_di_bruno(f, g, t, N), axis=-1)          # (nt, N+1)
    m = np.arange(M + 1)[:, None]
    n = np.arange(N + 1)[None, :]
    binom = np.array([[generalized_binomial(-mm * p.alpha, nn) for nn in range(N + 1)] for mm in range(M + 1)])
    w = p.scale * p.lam ** m * binom * recip_gamma(n + m * p.alpha + 1.0)
    tau = (t - p.base)[:, None, None]
    with np.errstate(invalid="ignore"):
        powers = np.where((n + m * p.alpha) == 0, 1.0, tau ** (n + m * p.alpha))
    return w[None] * powers * S[:, None, :]


def chain_rule(f, g, p: ABParams, trunc: RuleTruncation = _DEFAULT, where=None):
    """ABR derivative of ``f(g(t))`` by the generalised chain rule.

    The leading term uses the exact ``E_alpha``; the double sum runs over
    ``0 <= m <= M_outer`` (compensated accumulation in ``m``) and
    ``1 <= n <= N_inner``.  ``f`` and ``g`` need exact derivatives up to
    ``N_inner``.
    """
    if where is None:
        raise ValidationError("chain_rule needs evaluation points")
    t, grid = _points(where)
    terms = chain_rule_terms(f, g, p, trunc, t)
    fg = np.asarray(as_smooth(f)(np.asarray(as_smooth(g)(t), dtype=float)), dtype=float)
    lead = p.scale * ml_series(p.alpha, 1.0, p.lam * (t - p.base) ** p.alpha) * fg
    acc = _Kahan(t.shape)
    for m in range(trunc.M_outer + 1):
        acc.add(terms[:, m, 1:].sum(axis=1))
    return _wrap(lead + acc.total, grid)
