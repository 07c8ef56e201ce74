"""Laplace-domain tools and closed-form solvers for linear and quadratic AB equations.

Transfer functions of the ABR/ABC operators, fixed-Talbot numerical
inversion, and grid solvers for

* ``ABR D f - A f = g``   (family ``ODE2``; ``ODE1`` when ``k = 1``)
* ``ABC D f - A f = g``   (family ``ODE5``; ``ODE4`` when ``k = 1``)
* products of such factors (``SEQ3`` for ABR, ``SEQ6`` for ABC)
* ``ABC D f - A (f * f) = g`` with ``*`` the Laplace convolution.

Here ``k = (1 - alpha) A / B(alpha)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _quadrature
from .ab_ops import ABParams, ConstantNorm, abr_derivative_kernel
from .errors import (
    BranchAmbiguity,
    DegenerateK,
    DiscriminantZero,
    DomainError,
    OscillationError,
    ValidationError,
)
from .funcmodel import Grid, PowerSum, SampledFn, SmoothFn, as_smooth, sample
from .rl_ops import caputo_derivative, rl_derivative
from .specialfn import ml_series, recip_gamma

__all__ = [
    "TransferFn",
    "abr_transfer",
    "abc_transfer",
    "rl_transfer",
    "laplace_of",
    "talbot_invert",
    "DEFAULT_TALBOT_NODES",
    "InitialValueWarning",
    "LinearODESpec",
    "solve_linear",
    "solve_sequential",
    "initial_value",
    "linear_residual",
    "NonlinearConvSpec",
    "solve_nonlinear_conv",
    "nonlinear_residual",
    "trapezoid_autoconv",
]

DEFAULT_TALBOT_NODES = 32
DEGENERATE_TOL = 1e-12

_ABR_FAMILIES = ("ODE1", "ODE2", "SEQ3")
_ABC_FAMILIES = ("ODE4", "ODE5", "SEQ6")
_FAMILIES = _ABR_FAMILIES + _ABC_FAMILIES


class InitialValueWarning(UserWarning):
    """The solution's limit at ``t = 0+`` differs from the prescribed ``f(0)``."""


# ---------------------------------------------------------------- transforms


def _complex(s):
    return np.asarray(s, dtype=complex)


def _check_cut(s):
    s = _complex(s)
    bad = (s.imag == 0) & (s.real <= 0)
    if np.any(bad):
        raise DomainError("transfer functions are undefined on the cut (-inf, 0]")
    return s


@dataclass(frozen=True)
class TransferFn:
    """Laplace-domain symbol ``s -> F(s)``.

    ``F`` is evaluated with principal-branch powers, i.e. analytically
    continued from ``Re(s) > 0`` to the plane cut along ``(-inf, 0]``.

    Composition with ``+``, ``-``, ``*`` and ``/`` (by transfer functions,
    plain callables or scalars) yields ``tag="user"``.
    """

    func: Callable
    tag: str = "user"

    def __call__(self, s):
        return self.func(_check_cut(s))

    @staticmethod
    def _lift(other):
        if isinstance(other, TransferFn):
            return other.func
        if callable(other):
            return other
        c = complex(other)
        return lambda s: c

    def _combine(self, other, op):
        f, g = self.func, self._lift(other)
        return TransferFn(lambda s: op(f(s), g(s)), "user")

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, np.divide)


def _ab_denominator(p: ABParams, s):
    sa = s**p.alpha
    return sa, sa - p.lam  # lam = -alpha/(1-alpha)


def abr_transfer(p: ABParams) -> TransferFn:
    r"""Symbol of the ABR derivative, ``B/(1-alpha) s**alpha / (s**alpha + alpha/(1-alpha))``.

    >>> complex(abr_transfer(ABParams(0.5))(4.0)).real
    1.3333333333333333
    """

    def F(s):
        sa, den = _ab_denominator(p, s)
        return p.scale * sa / den

    return TransferFn(F, "ABR")


def abc_transfer(p: ABParams) -> TransferFn:
    r"""Symbol ``B/(1-alpha) s**(alpha-1) / (s**alpha + alpha/(1-alpha))`` of the ABC derivative.

    It multiplies ``s F(s) - f(0)``.
    """

    def F(s):
        sa, den = _ab_denominator(p, s)
        return p.scale * sa / (s * den)

    return TransferFn(F, "ABC")


def rl_transfer(mu) -> TransferFn:
    """``s**-mu``, the symbol of the RL integral of order ``mu``."""
    return TransferFn(lambda s: s ** (-mu), "RL")


def laplace_of(f) -> TransferFn:
    """Laplace transform of a power sum based at 0 or a smooth function carrying one."""
    if isinstance(f, PowerSum):
        if f.base != 0:
            raise ValidationError("Laplace transforms are taken about t = 0")
        return TransferFn(f.laplace, "user")
    if isinstance(f, SmoothFn):
        if f.laplace is not None:
            return TransferFn(f.laplace, "user")
        if f.exact is not None:
            return laplace_of(f.exact)
    if isinstance(f, TransferFn):
        return f
    raise ValidationError(f"no Laplace transform available for {getattr(f, 'name', type(f).__name__)}")


def _talbot_nodes(t, m):
    """Nodes ``s``, multipliers and prefactor ``r/m`` for an array of times ``t``."""
    t = t[:, None]
    r = 2.0 * m / (5.0 * t)
    th = np.arange(1, m) * (np.pi / m)
    cot = 1.0 / np.tan(th)
    s = r * th * (cot + 1j)
    sig = th + (th * cot - 1.0) * cot
    return r[:, 0], s, 1.0 + 1j * sig


def _func_of(F):
    # skip the cut check: Talbot nodes have Re(s) < 0 but stay off the cut
    return F.func if isinstance(F, TransferFn) else F


def talbot_invert(F, t, m=DEFAULT_TALBOT_NODES):
    r"""Inverse Laplace transform by the fixed-Talbot contour.

    With ``r = 2m/(5t)`` and nodes ``s_k = r theta_k (cot theta_k + i)``,
    ``theta_k = k pi/m``::

        f(t) ~ r/m [ F(r) e^{rt}/2 + sum_k Re(e^{t s_k} F(s_k) (1 + i sigma_k)) ]

    Parameters
    ----------
    F : callable
        Vectorized over complex arrays and analytic to the right of the
        contour (singularities on the negative real axis are fine).
    t : float or array_like
        Positive times.
    m : int
        Node count, at least 16.  In double precision the roundoff grows like
        ``exp(0.4 m)`` so values much beyond 32 lose accuracy.

    Raises
    ------
    OscillationError
        If node contributions are not finite or fail to decay along the
        contour, which means ``F`` grows into the left half-plane.

    >>> round(float(talbot_invert(lambda s: 1 / s**2, 1.5)), 10)
    1.5
    """
    if int(m) != m or m < 16:
        raise ValidationError(f"Talbot needs an integer m >= 16, got {m}")
    m = int(m)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if tt.ndim != 1 or np.any(~(tt > 0)):
        raise DomainError("Talbot inversion needs t > 0")
    func = _func_of(F)
    r, s, mult = _talbot_nodes(tt, m)
    with np.errstate(over="ignore", invalid="ignore"):
        Fs = np.broadcast_to(func(s), s.shape)
        terms = (np.exp(tt[:, None] * s) * Fs * mult).real
        head = 0.5 * np.exp(r * tt) * np.real(np.broadcast_to(func(r + 0j), r.shape))
    if not (np.all(np.isfinite(terms)) and np.all(np.isfinite(head))):
        raise OscillationError("non-finite Talbot node values")
    mag = np.abs(terms)
    scale = np.maximum(mag.max(axis=1), np.abs(head))
    if np.any(mag[:, -1] > 1e-3 * scale):
        raise OscillationError("Talbot node terms do not decay; transform unsuitable for this contour")
    out = r / m * (head + terms.sum(axis=1))
    return float(out[0]) if np.ndim(t) == 0 else out


# ---------------------------------------------------------------- linear ODEs


def _as_tuple(x):
    if isinstance(x, (list, tuple, np.ndarray)):
        return tuple(float(v) for v in x)
    return (float(x),)


@dataclass(frozen=True)
class LinearODESpec:
    """Linear AB equation ``(D^alpha - A) f = g`` or a product of such factors.

    Parameters
    ----------
    family : str
        ``ODE1``/``ODE2``/``SEQ3`` for ABR derivatives, ``ODE4``/``ODE5``/``SEQ6``
        for ABC.  ``ODE1`` and ``ODE4`` are the ``k = 1`` cases and ignore ``A``.
    alpha, A
        Order(s) and coefficient(s); sequences for the ``SEQ`` families with
        the outermost factor first.
    g
        Forcing: PowerSum, SmoothFn or SampledFn (``None`` for zero).
    f0
        Initial value(s) for ABC families (one per factor for ``SEQ6``).
    delta_weight
        ABR families only: weight ``w`` of the ``w delta(t)`` term that
        initial data contributes to the forcing.  The default 0 means the
        initial RL memory vanishes; otherwise its response is added in
        closed form.
    auto_degenerate
        Rewrite ``ODE2``/``ODE5`` to ``ODE1``/``ODE4`` when ``|1-k| < 1e-12``.
        When False such specs raise :class:`DegenerateK` at solve time.
    """

    family: str
    alpha: tuple
    A: tuple = (0.0,)
    g: object = None
    f0: tuple = (0.0,)
    norm: object = field(default_factory=ConstantNorm)
    delta_weight: float = 0.0
    auto_degenerate: bool = True

    def __post_init__(self):
        fam = str(self.family).upper()
        if fam not in _FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}")
        alpha = _as_tuple(self.alpha)
        A = _as_tuple(self.A)
        f0 = _as_tuple(self.f0)
        if any(not 0 < a < 1 for a in alpha):
            raise DomainError("orders must lie in (0, 1)")
        seq = fam.startswith("SEQ")
        if not seq and len(alpha) != 1:
            raise ValidationError(f"{fam} takes a single order")
        if len(A) == 1 and len(alpha) > 1:
            A = A * len(alpha)
        if len(f0) == 1 and len(alpha) > 1:
            f0 = f0 * len(alpha)
        if len(A) != len(alpha) or len(f0) != len(alpha):
            raise ValidationError("alpha, A and f0 must have matching lengths")
        if fam in ("ODE1", "ODE4"):
            A = (self.norm(alpha[0]) / (1.0 - alpha[0]),)
        elif not seq and self.auto_degenerate and abs(1.0 - self._k(alpha[0], A[0])) < DEGENERATE_TOL:
            fam = "ODE1" if fam == "ODE2" else "ODE4"
        if self.delta_weight and fam not in _ABR_FAMILIES:
            raise ValidationError("delta_weight applies to ABR families only")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "f0", f0)

    def _k(self, alpha, A):
        return (1.0 - alpha) * A / self.norm(alpha)

    @property
    def kind(self):
        """``"ABR"`` or ``"ABC"``."""
        return "ABR" if self.family in _ABR_FAMILIES else "ABC"

    @property
    def k(self):
        return tuple(self._k(a, A) for a, A in zip(self.alpha, self.A))

    def params(self, i=0):
        return ABParams(self.alpha[i], 0.0, self.norm)

    def factors(self):
        """Single-factor specs, outermost first."""
        if not self.family.startswith("SEQ"):
            return [self]
        fam = "ODE2" if self.family == "SEQ3" else "ODE5"
        return [
            LinearODESpec(fam, a, A, None, f, self.norm, self.delta_weight if i == 0 else 0.0, self.auto_degenerate)
            for i, (a, A, f) in enumerate(zip(self.alpha, self.A, self.f0))
        ]


def _forcing_samples(g, grid):
    if g is None:
        return SampledFn(grid, np.zeros(grid.n))
    if isinstance(g, SampledFn):
        if g.grid != grid:
            raise ValidationError("forcing samples live on a different grid")
        if g.singular_at_base:
            raise ValidationError("forcing must be finite at t = 0")
        return g
    return sample(as_smooth(g), grid)


def _ml_coefficient(alpha, k):
    return k * alpha / ((1.0 - k) * (1.0 - alpha))


def _factor_regular(spec, g: SampledFn, grid):
    """``ODE2``/``ODE5`` solution on the grid.

    ``k/(A(1-k)) g`` equals ``(1-alpha)/(B(1-k)) g`` and the memory term
    ``1/(A(1-k)) int d/dt E_alpha(c (t-x)**alpha) g(x) dx`` equals
    ``alpha/(B(1-k)**2) int (t-x)**(alpha-1) E_{alpha,alpha}(c (t-x)**alpha) g(x) dx``,
    which stays finite at ``A = 0``.
    """
    alpha, A = spec.alpha[0], spec.A[0]
    k = spec.k[0]
    if abs(1.0 - k) < DEGENERATE_TOL:
        raise DegenerateK(f"k = {k!r} is 1; use family {'ODE1' if spec.kind == 'ABR' else 'ODE4'}")
    B = spec.norm(alpha)
    c = _ml_coefficient(alpha, k)
    w = _quadrature.ml_weights(grid.n, alpha, c, grid.h, "alpha")
    vals = (1.0 - alpha) / (B * (1.0 - k)) * g.values
    vals = vals + alpha / (B * (1.0 - k) ** 2) * _quadrature.convolve(g.values, w)
    tau = grid.t - grid.a
    if spec.kind == "ABC" and spec.f0[0] != 0.0:
        vals = vals + spec.f0[0] / (1.0 - k) * ml_series(alpha, 1.0, c * tau**alpha)
    if spec.kind == "ABR" and spec.delta_weight:
        # response to w delta(t): w alpha/(B(1-k)**2) t**(alpha-1) E_{alpha,alpha}(c t**alpha)
        resp = np.full(tau.shape, np.nan)
        resp[1:] = tau[1:] ** (alpha - 1.0) * ml_series(alpha, alpha, c * tau[1:] ** alpha)
        vals = vals + spec.delta_weight * alpha / (B * (1.0 - k) ** 2) * resp
        return SampledFn(grid, vals, singular_at_base=True)
    return SampledFn(grid, vals)


def _rl_derivative_on_grid(g, alpha, grid):
    """RL derivative of the forcing, exactly when its form allows it."""
    if isinstance(g, SmoothFn) and g.exact is not None:
        g = g.exact
    if isinstance(g, PowerSum):
        d = rl_derivative(g, alpha)
        tau = grid.t - grid.a
        vals = np.full(tau.shape, np.nan)
        vals[1:] = d.eval(grid.t[1:])
        if np.all(d.expos >= 0):
            vals[0] = d.value_at_base()
            return SampledFn(grid, vals)
        return SampledFn(grid, vals, singular_at_base=True)
    if isinstance(g, SmoothFn):
        cap = caputo_derivative(g, alpha, grid)
        g0 = float(g(grid.a))
        if g0 == 0.0:
            return cap
        vals = np.array(cap.values)
        vals[1:] += g0 * (grid.t[1:] - grid.a) ** (-alpha) * recip_gamma(1.0 - alpha)
        vals[0] = np.nan
        return SampledFn(grid, vals, singular_at_base=True)
    return rl_derivative(g, alpha)


def _factor_degenerate(spec, g, grid):
    """``ODE1``/``ODE4``: ``f = -(1-alpha)/B g - (1-alpha)**2/(alpha B) D^alpha g + ...``.

    Delta terms at ``t = 0`` are dropped; ``ODE4`` adds
    ``(alpha-1)/(alpha Gamma(1-alpha)) t**-alpha f(0)``.
    """
    alpha = spec.alpha[0]
    B = spec.norm(alpha)
    gs = _forcing_samples(g, grid)
    if g is None:
        dg = SampledFn(grid, np.zeros(grid.n))
    else:
        dg = _rl_derivative_on_grid(g, alpha, grid)
    vals = (alpha - 1.0) / B * gs.values - (1.0 - alpha) ** 2 / (alpha * B) * dg.values
    singular = dg.singular_at_base
    tau = grid.t[1:] - grid.a
    extra = np.zeros(grid.n)
    if spec.kind == "ABC" and spec.f0[0] != 0.0:
        extra[1:] += (alpha - 1.0) / alpha * recip_gamma(1.0 - alpha) * tau ** (-alpha) * spec.f0[0]
        singular = True
    if spec.kind == "ABR" and spec.delta_weight:
        # -(1-alpha)**2/(alpha B) w D^alpha delta, with D^alpha delta = t**(-alpha-1)/Gamma(-alpha)
        extra[1:] += -((1.0 - alpha) ** 2) / (alpha * B) * spec.delta_weight * recip_gamma(-alpha) * tau ** (-alpha - 1.0)
        singular = True
    vals = vals + extra
    if singular:
        vals[0] = np.nan
    return SampledFn(grid, vals, singular_at_base=singular)


def initial_value(spec: LinearODESpec, g0=0.0):
    """Limit ``f(0+)`` of a single-factor regular solution for forcing with ``g(0) = g0``.

    For ``ODE5`` this is ``(k/(A(1-k))) g0 + f0/(1-k)``, which equals ``f0`` only
    when ``f0 = -g0/A`` (the ABC derivative vanishes at ``0+``).
    """
    if spec.family not in ("ODE2", "ODE5"):
        raise ValidationError("initial_value is defined for ODE2/ODE5")
    alpha, k = spec.alpha[0], spec.k[0]
    val = (1.0 - alpha) / (spec.norm(alpha) * (1.0 - k)) * g0
    if spec.kind == "ABC":
        val += spec.f0[0] / (1.0 - k)
    return val


def _solve_factor(spec, g, grid):
    if spec.family in ("ODE1", "ODE4"):
        return _factor_degenerate(spec, g, grid)
    gs = _forcing_samples(g, grid)
    if spec.family == "ODE5":
        f_start = initial_value(spec, float(gs.values[0]))
        if not np.isclose(f_start, spec.f0[0], rtol=1e-12, atol=1e-14):
            warnings.warn(
                f"solution starts at f(0+) = {f_start!r}, not the prescribed f(0) = {spec.f0[0]!r}",
                InitialValueWarning,
                stacklevel=3,
            )
    return _factor_regular(spec, gs, grid)


def solve_linear(spec: LinearODESpec, grid: Grid) -> SampledFn:
    """Evaluate the closed-form solution of a linear AB equation on ``grid``.

    The memory integral uses product-trapezoid weights for the exact
    Mittag-Leffler kernel.  ``SEQ`` families are solved factor by factor
    (see :func:`solve_sequential`).
    """
    if grid.a != 0.0:
        raise ValidationError("linear solvers work on grids starting at t = 0")
    if spec.family.startswith("SEQ"):
        return solve_sequential(spec.factors(), spec.g, grid)
    return _solve_factor(spec, spec.g, grid)


def solve_sequential(specs: Sequence[LinearODESpec], g, grid: Grid) -> SampledFn:
    """Solve ``(D - A_1)(D - A_2)...(D - A_n) f = g`` factor by factor.

    ``specs`` lists the factors outermost first; each factor's solution
    is the forcing of the next.  Their own ``g`` fields are ignored.
    """
    if not specs:
        raise ValidationError("need at least one factor")
    if grid.a != 0.0:
        raise ValidationError("linear solvers work on grids starting at t = 0")
    cur = g
    for spec in specs:
        if spec.family.startswith("SEQ"):
            raise ValidationError("factors must be single-factor families")
        cur = _solve_factor(spec, cur, grid)
        if cur.singular_at_base and spec is not specs[-1]:
            raise DomainError("an intermediate solution is singular at t = 0 and cannot force the next factor")
    return cur


def linear_residual(spec: LinearODESpec, f: SampledFn, g=None, lo=None, hi=None):
    """``max |D^alpha f - A f - g|`` over ``[lo, hi]`` for a single-factor spec.

    ``D`` is the ABR derivative by kernel quadrature on the samples; the ABC
    derivative is obtained from it by subtracting
    ``B/(1-alpha) f(0) E_alpha(-alpha t**alpha/(1-alpha))``.
    """
    if spec.family.startswith("SEQ"):
        raise ValidationError("residuals are per factor")
    if f.singular_at_base:
        raise ValidationError("residual needs a solution finite at t = 0")
    grid = f.grid
    p = spec.params()
    d = abr_derivative_kernel(f, p).values
    if spec.kind == "ABC":
        tau = grid.t - grid.a
        d = d - p.scale * f.values[0] * ml_series(p.alpha, 1.0, p.lam * tau**p.alpha)
    gs = _forcing_samples(spec.g if g is None else g, grid)
    res = SampledFn(grid, d - spec.A[0] * f.values - gs.values)
    return res.max_abs(lo, hi)


# ---------------------------------------------------------------- nonlinear


@dataclass(frozen=True)
class NonlinearConvSpec:
    """``ABC D^alpha f - A (f * f) = g`` with ``f(0) = f0``.

    ``branch`` picks the root of the quadratic for the transform:
    ``"minus"`` (the root vanishing as ``|s| -> inf``), ``"plus"``, or
    ``"auto"`` (= ``"minus"``).
    """

    alpha: float
    A: float
    g: object = None
    f0: float = 0.0
    branch: str = "auto"
    norm: object = field(default_factory=ConstantNorm)

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if self.A == 0:
            raise ValidationError("A must be nonzero (A = 0 is the linear ODE5 family)")
        if self.branch not in ("auto", "minus", "plus"):
            raise ValidationError(f"unknown branch {self.branch!r}")

    @property
    def params(self):
        return ABParams(self.alpha, 0.0, self.norm)


def _transform_nonlinear(spec: NonlinearConvSpec, ghat, s):
    """Chosen root of ``A F**2 - T F + Q = 0`` at the nodes ``s`` (rows: times)."""
    p = spec.params
    sa, den = _ab_denominator(p, s)
    T = p.scale * sa / den
    Q = ghat(s) + p.scale * sa / (s * den) * spec.f0
    disc = T * T - 4.0 * spec.A * Q
    if np.any(np.abs(disc) <= 1e-14 * np.abs(T) ** 2):
        raise DiscriminantZero("discriminant vanishes on the Talbot contour")
    sq = np.sqrt(disc)
    # follow the square root continuously, starting from the far end of the contour
    # where Q -> 0 and sqrt(disc) ~ T fixes the sign
    sign_far = np.sign(np.real(np.conj(T[:, -1]) * sq[:, -1]))
    if np.any(np.abs(np.real(np.conj(T[:, -1]) * sq[:, -1])) < 0.5 * np.abs(T[:, -1] * sq[:, -1])):
        raise BranchAmbiguity("the square root is not aligned with T at the contour's far end")
    sq[:, -1] *= sign_far
    for j in range(s.shape[1] - 2, -1, -1):
        prev = sq[:, j + 1]
        keep = np.abs(sq[:, j] - prev)
        flip = np.abs(sq[:, j] + prev)
        if np.any(np.abs(keep - flip) < 1e-6 * (keep + flip)):
            raise BranchAmbiguity("both square-root branches are equally close between Talbot nodes")
        sq[:, j] = np.where(flip < keep, -sq[:, j], sq[:, j])
    if spec.branch == "plus":
        return (T + sq) / (2.0 * spec.A)
    return 2.0 * Q / (T + sq)


def solve_nonlinear_conv(spec: NonlinearConvSpec, grid: Grid, m=DEFAULT_TALBOT_NODES) -> SampledFn:
    """Solve the convolution-quadratic ABC equation by Talbot inversion of the root.

    The Talbot contour runs through the real point ``s = r``, so the square
    root is tracked along the upper half of the contour only; the value at
    ``s = r`` is the continuous limit.  At ``t = 0`` the minus branch
    returns ``f0 + (1-alpha)/B g(0)``.
    """
    if grid.a != 0.0:
        raise ValidationError("nonlinear solver works on grids starting at t = 0")
    if int(m) != m or m < 16:
        raise ValidationError(f"Talbot needs an integer m >= 16, got {m}")
    m = int(m)
    if spec.g is None:
        ghat = lambda s: np.zeros_like(s)  # noqa: E731
        g0 = 0.0
    else:
        ghat = _func_of(laplace_of(spec.g))
        g0 = float(as_smooth(spec.g)(0.0)) if not isinstance(spec.g, TransferFn) else np.nan
    if g0 != 0.0 and np.isfinite(g0):
        # at t = 0+ the ABC derivative and f * f vanish, so the equation forces g(0) = 0
        warnings.warn(f"g(0) = {g0!r} != 0 is inconsistent with the equation at t = 0+", InitialValueWarning, stacklevel=2)
    tt = grid.t[1:]
    r, s, mult = _talbot_nodes(tt, m)
    nodes = np.concatenate([r[:, None] + 0j, s], axis=1)
    with np.errstate(over="ignore", invalid="ignore"):
        Fs = _transform_nonlinear(spec, ghat, nodes)
        terms = (np.exp(tt[:, None] * s) * Fs[:, 1:] * mult).real
        head = 0.5 * np.exp(r * tt) * Fs[:, 0].real
    if not (np.all(np.isfinite(terms)) and np.all(np.isfinite(head))):
        raise OscillationError("non-finite Talbot node values")
    vals = np.empty(grid.n)
    vals[1:] = r / m * (head + terms.sum(axis=1))
    if spec.branch == "plus":
        vals[0] = np.nan
        return SampledFn(grid, vals, singular_at_base=True)
    vals[0] = spec.f0 + (1.0 - spec.alpha) / spec.norm(spec.alpha) * g0
    return SampledFn(grid, vals)


def trapezoid_autoconv(f: SampledFn) -> SampledFn:
    """``(f * f)(t) = int_0^t f(t-x) f(x) dx`` by the trapezoid rule."""
    v = np.asarray(f.values, dtype=float)
    full = np.convolve(v, v)[: v.size]
    out = f.grid.h * (full - v[0] * v)
    return SampledFn(f.grid, out)


def nonlinear_residual(spec: NonlinearConvSpec, f: SampledFn, lo=None, hi=None):
    """``max |ABC D f - A (f * f) - g|`` over ``[lo, hi]`` (kernel quadrature and trapezoid)."""
    if f.singular_at_base:
        raise ValidationError("residual needs a solution finite at t = 0")
    grid = f.grid
    p = spec.params
    tau = grid.t - grid.a
    d = abr_derivative_kernel(f, p).values - p.scale * f.values[0] * ml_series(p.alpha, 1.0, p.lam * tau**p.alpha)
    gs = _forcing_samples(spec.g, grid)
    res = d - spec.A * trapezoid_autoconv(f).values - gs.values
    return SampledFn(grid, res).max_abs(lo, hi)
