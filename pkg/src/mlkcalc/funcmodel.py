"""Function representations: exact generalized power sums, smooth functions
with exact derivative oracles, and samples on a uniform grid.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ValidationError
from .specialfn import gamma, recip_gamma

__all__ = [
    "EXPONENT_MERGE_TOL",
    "PowerSum",
    "SmoothFn",
    "Grid",
    "SampledFn",
    "sample",
    "parse_function",
]

EXPONENT_MERGE_TOL = 1e-12


def _normalize_arrays(coefs, expos):
    coefs = np.asarray(coefs, dtype=float).ravel()
    expos = np.asarray(expos, dtype=float).ravel()
    if coefs.shape != expos.shape:
        raise ValidationError("coefficient and exponent counts differ")
    if not (np.all(np.isfinite(coefs)) and np.all(np.isfinite(expos))):
        raise ValidationError("power sum terms must be finite")
    if expos.size == 0:
        return ()
    order = np.argsort(expos, kind="stable")
    expos = expos[order]
    coefs = coefs[order]
    # a new group starts wherever the gap to the previous exponent exceeds the tolerance
    starts = np.concatenate(([True], np.diff(expos) > EXPONENT_MERGE_TOL))
    idx = np.flatnonzero(starts)
    merged_c = np.add.reduceat(coefs, idx)
    merged_e = expos[idx]
    keep = merged_c != 0.0
    if np.any(merged_e[keep] <= -1.0):
        bad = merged_e[keep][merged_e[keep] <= -1.0][0]
        raise DomainError(f"exponent {bad} not integrable at the base point")
    return tuple(zip(merged_c[keep].tolist(), merged_e[keep].tolist()))


def _normalize_terms(terms):
    terms = list(terms)
    if not terms:
        return ()
    if any(len(term) != 2 for term in terms):
        raise ValidationError("power sum terms are (coef, expo) pairs")
    arr = np.array(terms, dtype=float)
    return _normalize_arrays(arr[:, 0], arr[:, 1])


@dataclass(frozen=True)
class PowerSum:
    r"""Finite sum :math:`\sum_i c_i (t-a)^{\beta_i}`.

    Exponents closer than :data:`EXPONENT_MERGE_TOL` are merged, zero
    coefficients are dropped and terms are kept in increasing exponent order.

    Parameters
    ----------
    terms
        Iterable of ``(coef, expo)`` pairs with ``expo > -1``.
    base
        Expansion point ``a``.
    """

    terms: tuple = ()
    base: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "terms", _normalize_terms(self.terms))
        object.__setattr__(self, "base", float(self.base))

    @classmethod
    def _from_arrays(cls, coefs, expos, base=0.0):
        out = cls((), base)
        object.__setattr__(out, "terms", _normalize_arrays(coefs, expos))
        return out

    @classmethod
    def monomial(cls, expo, coef=1.0, base=0.0):
        return cls(((coef, expo),), base)

    @classmethod
    def constant(cls, value, base=0.0):
        return cls(((value, 0.0),), base)

    @classmethod
    def exp_taylor(cls, rate=1.0, base=0.0, span=2.0, scale=1.0, tol=1e-17):
        """Taylor polynomial of ``scale * exp(rate * t)`` about ``base``.

        The degree is chosen so the remainder on ``[base, base + span]`` is
        below ``tol`` relative to the function's size there.
        """
        x = abs(rate) * span
        amp = scale * math.exp(rate * base)
        # Lagrange remainder after degree k-1 is at most x**k/k! * e**x, measured
        # against the smallest value of exp(rate*(t-base)) on the span
        floor = tol * math.exp(min(0.0, rate * span))
        terms = []
        bound = 1.0
        k = 0
        while True:
            terms.append((amp * rate**k / math.factorial(k), float(k)))
            k += 1
            bound *= x / k
            if bound * math.exp(x) <= floor:
                break
            if k > 400:
                raise DomainError("exponential Taylor expansion needs too many terms")
        return cls(tuple(terms), base)

    @property
    def coefs(self):
        return np.array([c for c, _ in self.terms], dtype=float).reshape(-1)

    @property
    def expos(self):
        return np.array([e for _, e in self.terms], dtype=float).reshape(-1)

    def __len__(self):
        return len(self.terms)

    def is_zero(self):
        return not self.terms

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t):
        """Evaluate at ``t >= base`` (``t > base`` when a negative exponent is present)."""
        arr = np.asarray(t, dtype=float)
        x = arr - self.base
        if np.any(x < 0):
            raise DomainError("power sum evaluated left of its base point")
        if not self.terms:
            return 0.0 if arr.ndim == 0 else np.zeros_like(x)
        expos = self.expos
        if expos[0] < 0 and np.any(x == 0):
            raise DomainError("negative exponent is singular at the base point")
        flat = x.reshape(-1)
        out = np.zeros_like(flat)
        # chunk so the (points x terms) table stays small
        step = max(1, 200_000 // len(expos))
        coefs = self.coefs
        for lo in range(0, flat.size, step):
            blk = flat[lo:lo + step, None]
            out[lo:lo + step] = np.power(blk, expos[None, :]) @ coefs
        out = out.reshape(x.shape)
        return float(out) if arr.ndim == 0 else out

    def value_at_base(self):
        """``f(a)``: the constant coefficient, or ``0`` when all exponents are positive."""
        if self.terms and self.expos[0] < 0:
            raise DomainError("power sum is unbounded at its base point")
        for c, e in self.terms:
            if abs(e) <= EXPONENT_MERGE_TOL:
                return c
        return 0.0

    def _check_base(self, other):
        if self.base != other.base:
            raise ValidationError("power sums with different base points")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = PowerSum.constant(other, self.base)
        if not isinstance(other, PowerSum):
            return NotImplemented
        self._check_base(other)
        return PowerSum(self.terms + other.terms, self.base)

    __radd__ = __add__

    def __neg__(self):
        return PowerSum(tuple((-c, e) for c, e in self.terms), self.base)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = PowerSum.constant(other, self.base)
        if not isinstance(other, PowerSum):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return PowerSum(tuple((other * c, e) for c, e in self.terms), self.base)
        if not isinstance(other, PowerSum):
            return NotImplemented
        self._check_base(other)
        return PowerSum(
            tuple((c1 * c2, e1 + e2) for c1, e1 in self.terms for c2, e2 in other.terms),
            self.base,
        )

    __rmul__ = __mul__

    def derivative(self, k=1):
        """k-th ordinary derivative by the power rule."""
        out = self
        for _ in range(k):
            terms = []
            for c, e in out.terms:
                if abs(e) <= EXPONENT_MERGE_TOL:
                    continue
                terms.append((c * e, e - 1.0))
            out = PowerSum(tuple(terms), self.base)
        return out

    def laplace(self, s):
        """Laplace transform about the base point, ``sum c Gamma(b+1) s**-(b+1)``."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for c, e in self.terms:
            out = out + c * gamma(e + 1.0) * s ** (-(e + 1.0))
        return out

    def deriv_at(self, k, t):
        """Exact k-th derivative evaluated at ``t``.

        Integer exponents below ``k`` drop out of the k-th derivative; other
        exponents use the falling factorial ``Gamma(b+1)/Gamma(b-k+1)``.
        """
        x = np.asarray(t, dtype=float) - self.base
        out = np.zeros_like(x)
        for c, e in self.terms:
            if e == round(e) and e < k:
                continue
            fall = math.prod(e - j for j in range(k))
            out = out + c * fall * np.power(x, e - k)
        return float(out) if out.ndim == 0 else out

    def describe(self):
        if not self.terms:
            return "0"
        x = "t" if self.base == 0 else f"(t-{self.base:g})"
        return " + ".join(f"{c:.6g}*{x}^{e:.6g}" for c, e in self.terms)


@dataclass(frozen=True)
class SmoothFn:
    """Smooth function with an exact derivative oracle.

    Parameters
    ----------
    func
        Vectorized map ``t -> f(t)``.
    deriv
        Vectorized map ``(k, t) -> f^(k)(t)``; ``deriv(0, t) == func(t)``.
    order
        Highest derivative order available, ``None`` for unbounded.
    exact
        Optional exact :class:`PowerSum` form (used by series paths).
    laplace
        Optional Laplace transform about ``t = 0``.
    """

    func: Callable
    deriv: Callable
    order: Optional[int] = None
    name: str = "f"
    exact: Optional[PowerSum] = field(default=None, compare=False)
    laplace: Optional[Callable] = field(default=None, compare=False)

    def __call__(self, t):
        return self.func(t)

    def d(self, k, t):
        if k < 0:
            raise ValidationError("derivative order must be nonnegative")
        if self.order is not None and k > self.order:
            raise DomainError(f"{self.name}: derivative of order {k} not available")
        return self.func(t) if k == 0 else self.deriv(k, t)

    @classmethod
    def exp(cls, rate=1.0, scale=1.0):
        """``scale * exp(rate * t)``."""

        def f(t):
            return scale * np.exp(rate * np.asarray(t, dtype=float))

        def df(k, t):
            return scale * rate**k * np.exp(rate * np.asarray(t, dtype=float))

        return cls(
            f,
            df,
            None,
            name=f"{scale:g}*exp({rate:g}t)",
            laplace=lambda s: scale / (np.asarray(s, dtype=complex) - rate),
        )

    @classmethod
    def from_powersum(cls, ps: PowerSum):
        return cls(ps.eval, ps.deriv_at, None, name=ps.describe(), exact=ps,
                   laplace=ps.laplace if ps.base == 0 else None)

    @classmethod
    def poly(cls, coeffs, base=0.0):
        """Polynomial ``sum_k coeffs[k] * (t - base)**k``."""
        return cls.from_powersum(PowerSum(tuple((c, k) for k, c in enumerate(coeffs)), base))

    def as_powersum(self):
        """Exact power-sum form, when one is known."""
        if self.exact is not None:
            return self.exact
        raise DomainError(f"{self.name}: no power-sum form available")


def as_smooth(f):
    """Lift a :class:`PowerSum` to :class:`SmoothFn`; pass SmoothFn through."""
    if isinstance(f, SmoothFn):
        return f
    if isinstance(f, PowerSum):
        return SmoothFn.from_powersum(f)
    raise ValidationError(f"expected PowerSum or SmoothFn, got {type(f).__name__}")


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``t_j = a + j h`` on ``[a, b]`` with ``n`` points."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValidationError("grid endpoints must be finite")
        if not self.b > self.a:
            raise ValidationError("grid needs b > a")
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError("grid needs n >= 2 points")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self):
        return (self.b - self.a) / (self.n - 1)

    @property
    def t(self):
        return self.a + self.h * np.arange(self.n)

    def mask(self, lo=None, hi=None):
        t = self.t
        keep = np.ones(self.n, dtype=bool)
        if lo is not None:
            keep &= t >= lo - 1e-12
        if hi is not None:
            keep &= t <= hi + 1e-12
        return keep


@dataclass(frozen=True, eq=False)
class SampledFn:
    """Values of a function on a :class:`Grid`.

    ``singular_at_base`` marks outputs whose value at ``t_0`` diverges; that
    entry then holds ``nan`` instead of a number.
    """

    grid: Grid
    values: np.ndarray
    singular_at_base: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValidationError("sample count does not match the grid")
        body = v[1:] if self.singular_at_base else v
        if not np.all(np.isfinite(body)):
            raise ValidationError("sampled values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def t(self):
        return self.grid.t

    def with_values(self, values, singular_at_base=None):
        flag = self.singular_at_base if singular_at_base is None else singular_at_base
        return SampledFn(self.grid, values, flag)

    def _same_grid(self, other):
        if other.grid != self.grid:
            raise ValidationError("sampled functions live on different grids")

    def __add__(self, other):
        if isinstance(other, SampledFn):
            self._same_grid(other)
            return SampledFn(self.grid, self.values + other.values,
                             self.singular_at_base or other.singular_at_base)
        return self.with_values(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, SampledFn):
            self._same_grid(other)
            return SampledFn(self.grid, self.values - other.values,
                             self.singular_at_base or other.singular_at_base)
        return self.with_values(self.values - other)

    def __mul__(self, other):
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def max_abs(self, lo=None, hi=None):
        keep = self.grid.mask(lo, hi)
        if self.singular_at_base:
            keep[0] = False
        return float(np.max(np.abs(self.values[keep]))) if np.any(keep) else 0.0


def sample(f, grid_or_a, b=None, n=None) -> SampledFn:
    """Evaluate a :class:`PowerSum`, :class:`SmoothFn` or plain callable on a grid.

    >>> sample(PowerSum.monomial(1.0), 0.0, 1.0, 3).values
    array([0. , 0.5, 1. ])
    """
    grid = grid_or_a if isinstance(grid_or_a, Grid) else Grid(grid_or_a, b, n)
    vals = np.asarray(f(grid.t), dtype=float)
    if vals.ndim == 0:
        vals = np.full(grid.n, float(vals))
    return SampledFn(grid, vals)


_TERM_RE = re.compile(
    r"^(?P<coef>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?\*?(?P<t>t(\^(?P<p>[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?))?)?$"
)


def _parse_shorthand(text):
    s = text.replace(" ", "")
    if not s:
        raise ValidationError("empty function literal")
    exp_match = re.fullmatch(r"(?:e\^|exp\()(?:(?P<r>[+-]?[\d.]+)\*?)?t\)?", s)
    if exp_match and (s.startswith("e^") or s.endswith(")")):
        rate = float(exp_match.group("r")) if exp_match.group("r") else 1.0
        return SmoothFn.exp(rate)
    # split on + or - that starts a new term (not inside an exponent)
    pieces = re.split(r"(?<=[^eE^*])(?=[+-])", s)
    terms = []
    for piece in pieces:
        sign = -1.0 if piece.startswith("-") else 1.0
        body = piece.lstrip("+-")
        m = _TERM_RE.match(body)
        if not body or not m or (m.group("coef") is None and m.group("t") is None):
            raise ValidationError(f"cannot parse function literal {text!r}")
        coef = sign * (float(m.group("coef")) if m.group("coef") else 1.0)
        if m.group("t") is None:
            expo = 0.0
        else:
            expo = float(m.group("p")) if m.group("p") else 1.0
        terms.append((coef, expo))
    return PowerSum(tuple(terms))


def parse_function(obj, base=0.0):
    """Build a function model from a config literal.

    Accepted forms::

        {"kind": "powersum", "base": 0, "terms": [[1, 1]]}
        {"kind": "exp", "rate": 2}
        {"kind": "poly", "coeffs": [c0, c1, ...]}
        "1", "t", "t^2", "t+t^2", "0.5*t^1.5", "e^t", "exp(2t)"
    """
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return PowerSum.constant(obj, base)
    if isinstance(obj, str):
        f = _parse_shorthand(obj)
        if isinstance(f, PowerSum) and base != 0.0:
            f = PowerSum(f.terms, base)
        return f
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValidationError(f"unrecognized function literal {obj!r}")
    kind = obj["kind"]
    if kind == "powersum":
        terms = obj.get("terms", [])
        if any(len(term) != 2 for term in terms):
            raise ValidationError("power sum terms are [coef, expo] pairs")
        return PowerSum(tuple((c, e) for c, e in terms), obj.get("base", base))
    if kind == "exp":
        return SmoothFn.exp(float(obj.get("rate", 1.0)), float(obj.get("scale", 1.0)))
    if kind == "poly":
        coeffs = obj.get("coeffs")
        if not coeffs:
            raise ValidationError("poly literal needs a nonempty coeffs list")
        return PowerSum(tuple((c, k) for k, c in enumerate(coeffs)), obj.get("base", base))
    raise ValidationError(f"unknown function kind {kind!r}")


def recip_gamma_ratio(b, mu):
    """``Gamma(b+1)/Gamma(b+mu+1)``, zero where the denominator has a pole."""
    return gamma(b + 1.0) * recip_gamma(b + mu + 1.0)
