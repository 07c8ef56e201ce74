"""Self-check suites behind ``mlkcalc verify``.

Every suite returns a list of :class:`Check` records; nothing here depends on
wall-clock time or randomness, so reports are reproducible byte for byte.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .ab_ops import ABParams, abr_derivative_kernel, abr_derivative_series, default_beta, verify_inverse_identities
from .funcmodel import Grid, PowerSum, SmoothFn, parse_function, sample
from .laplace_ode import (
    LinearODESpec,
    NonlinearConvSpec,
    abr_transfer,
    laplace_of,
    linear_residual,
    solve_linear,
    solve_nonlinear_conv,
    talbot_invert,
)
from .riccati import RiccatiSpec, coefficient_identity_residuals, riccati_coefficients, riccati_residual
from .rules import RuleTruncation, chain_rule_coefficients, generalized_binomial, product_rule
from .semigroup import SemigroupCase, fde_residual, fie_residual, indicial_poly, semigroup_defect, semigroup_solution
from .specialfn import gamma, recip_gamma

__all__ = ["Check", "SUITES", "run_suite", "report"]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value < self.tol)

    def as_dict(self):
        d = asdict(self)
        d["value"] = float(self.value)
        d["passed"] = self.passed
        return d


def _maxabs(x):
    return float(np.max(np.abs(x)))


def suite_inverse(alpha=0.4, f="t", beta=None):
    p = ABParams(alpha)
    ps = parse_function(f)
    if isinstance(ps, SmoothFn):
        ps = ps.as_powersum()
    rep = verify_inverse_identities(ps, p, beta)
    return [Check(f"inverse.{name}", float(val), 1e-8) for name, val in rep.residuals.items()]


def suite_paths(alpha=0.5, n=1025):
    p = ABParams(alpha)
    grid = Grid(0.0, 2.0, n)
    t = grid.t
    out = []
    for label, f, ps in (
        ("1", PowerSum.constant(1.0), PowerSum.constant(1.0)),
        ("t", PowerSum.monomial(1.0), PowerSum.monomial(1.0)),
        ("t^2", PowerSum.monomial(2.0), PowerSum.monomial(2.0)),
        ("e^t", SmoothFn.exp(), PowerSum.exp_taylor()),
    ):
        kern = abr_derivative_kernel(sample(f, grid), p).values
        ser = abr_derivative_series(ps, p)[0]
        out.append(Check(f"paths.kernel_vs_series[{label}]", _maxabs(kern[1:] - ser.eval(t[1:])), 1e-4))
    return out


def suite_laplace():
    out = [
        Check("laplace.pair[1/s^2]", abs(talbot_invert(lambda s: 1 / s**2, 1.5) - 1.5), 1e-8),
        Check("laplace.pair[1/(s+1)]", abs(talbot_invert(lambda s: 1 / (s + 1), 1.0) - math.exp(-1.0)), 1e-8),
        Check("laplace.pair[s^-1.5]", abs(talbot_invert(lambda s: s**-1.5, 1.0) - recip_gamma(1.5)), 1e-7),
    ]
    t = np.linspace(0.1, 2.0, 39)
    for alpha in (0.3, 0.5, 0.7):
        p = ABParams(alpha)
        for label, f in (("t", PowerSum.monomial(1.0)), ("t^2", PowerSum.monomial(2.0))):
            inv = talbot_invert(abr_transfer(p) * laplace_of(f), t)
            ref = abr_derivative_series(f, p)[0].eval(t)
            out.append(Check(f"laplace.abr_transfer[{label},alpha={alpha}]", _maxabs(inv - ref), 1e-6))
    return out


def ode_cases():
    """Linear specs used by the residual checks (consistent initial data)."""
    return [
        LinearODESpec("ODE2", 0.5, 1.0, PowerSum.monomial(1.0)),
        LinearODESpec("ODE2", 0.5, -1.0, SmoothFn.exp()),
        LinearODESpec("ODE2", 0.7, 0.5, PowerSum.monomial(2.0)),
        LinearODESpec("ODE1", 0.5, 0.0, PowerSum.monomial(2.0)),
        LinearODESpec("ODE4", 0.5, 0.0, PowerSum.monomial(2.0), 0.0),
        LinearODESpec("ODE5", 0.5, 1.0, PowerSum.monomial(1.0), 0.0),
        LinearODESpec("ODE5", 0.5, -1.0, SmoothFn.exp(), 1.0),
        LinearODESpec("ODE5", 0.3, 2.0, PowerSum.constant(1.0), -0.5),
    ]


def suite_ode(n=1025):
    grid = Grid(0.0, 2.0, n)
    out = []
    for i, spec in enumerate(ode_cases()):
        f = solve_linear(spec, grid)
        out.append(Check(f"ode.residual[{i}:{spec.family},alpha={spec.alpha[0]},A={spec.A[0]:g}]",
                         linear_residual(spec, f, lo=0.1), 1e-4))
    g = SmoothFn.exp()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fa = solve_linear(LinearODESpec("SEQ3", (0.5, 0.5), (1.0, -1.0), g), grid)
        fc = solve_linear(LinearODESpec("SEQ6", (0.5, 0.5), (1.0, -1.0), g, (0.0, 0.0)), grid)
    m = grid.mask(0.1, 2.0)
    out.append(Check("ode.sequential_abr_vs_abc", _maxabs((fa.values - fc.values)[m]), 1e-6))
    for A in (1.0, -2.0):
        sp = NonlinearConvSpec(0.5, A, PowerSum.monomial(1.0, -A), 1.0)
        f = solve_nonlinear_conv(sp, grid)
        out.append(Check(f"ode.nonlinear_constant[A={A:g}]", _maxabs(f.values[m] - 1.0), 1e-6))
    return out


def suite_riccati(alpha=0.3):
    out = []
    grid = Grid(0.0, 1.0, 101)
    for P, Q in ((-1.0, 1.0), (-4.0, 1.0), (0.0, 1.0)):
        spec = RiccatiSpec(P, Q, alpha)
        a = riccati_coefficients(spec, 20)
        out.append(Check(f"riccati.identity[P={P:g},Q={Q:g}]", float(coefficient_identity_residuals(spec, a).max()), 1e-12))
        out.append(Check(f"riccati.residual[P={P:g},Q={Q:g}]", riccati_residual(spec, 20, grid), 1e-12))
    return out


def suite_rules():
    out = []
    t = np.linspace(0.1, 2.0, 39)
    for alpha in (0.3, 0.6):
        p = ABParams(alpha)
        pr = product_rule(PowerSum.monomial(2.0), PowerSum.monomial(1.0), p, where=t)
        ref = abr_derivative_series(PowerSum.monomial(3.0), p)[0].eval(t)
        out.append(Check(f"rules.product[t^2*t,alpha={alpha}]", _maxabs(pr - ref), 1e-8))
        tc = 0.7
        C = chain_rule_coefficients(SmoothFn.poly([0.0, 0.0, 1.0]), SmoothFn.exp(), p, RuleTruncation(20, 10), tc)
        m = np.arange(21)[:, None]
        n = np.arange(11)[None, :]
        binom = np.array([[generalized_binomial(-mm * alpha, nn) for nn in range(11)] for mm in range(21)])
        ref = 2.0**n * p.scale * p.lam**m * binom * recip_gamma(n + m * alpha + 1.0) * math.exp(2 * tc)
        out.append(Check(f"rules.chain_coefficients[x^2,e^t,alpha={alpha}]", _maxabs(C - ref), 1e-10))
    return out


def suite_semigroup(n=4097):
    out = []
    grid9 = np.linspace(0.1, 0.9, 9)
    p1 = max(abs(float(indicial_poly(a, b)(1.0))) for a in grid9 for b in grid9)
    out.append(Check("semigroup.indicial_P(1)", p1, 1e-12))
    x = np.linspace(0.1, 5.0, 50)
    worst = 0.0
    for a in grid9:
        P = indicial_poly(a)
        worst = max(worst, _maxabs(P.expanded(x) - P.in_y(x**a)), _maxabs(P.expanded(x) - P.factored(x)))
    out.append(Check("semigroup.indicial_factored", worst, 1e-12))
    case = SemigroupCase(1 / 3, 1 / 3)
    d = semigroup_defect(case)
    ref = PowerSum(((4 / 9 - 1 / 3, 1.0), (4 / (9 * gamma(7 / 3)), 4 / 3), (1 / (9 * gamma(8 / 3)) - 2 / (3 * gamma(8 / 3)), 5 / 3)))
    tt = np.linspace(0.0, 2.0, 21)
    out.append(Check("semigroup.defect_t", _maxabs(d.eval(tt) - ref.eval(tt)), 1e-12))
    out.append(Check("semigroup.fie_equals_defect", _maxabs(fie_residual(case).eval(tt) - d.eval(tt)), 1e-12))
    r = fde_residual(semigroup_solution(3), 1 / 3, Grid(0.0, 2.0, n))
    out.append(Check("semigroup.fde_residual[q=3]", r.max_abs(0.5, 2.0), 1e-3))
    return out


SUITES = {
    "inverse": suite_inverse,
    "paths": suite_paths,
    "laplace": suite_laplace,
    "ode": suite_ode,
    "riccati": suite_riccati,
    "rules": suite_rules,
    "semigroup": suite_semigroup,
}


def run_suite(name, **kwargs):
    if name == "all":
        checks = []
        for key, fn in SUITES.items():
            checks += fn(**kwargs) if key == "inverse" else fn()
        return checks
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](**kwargs)


def report(name, checks, params=None):
    """Report dictionary (stable key order when dumped with ``sort_keys``)."""
    return {
        "suite": name,
        "params": params or {},
        "checks": [c.as_dict() for c in checks],
        "passed": all(c.passed for c in checks),
        "failed": [c.name for c in checks if not c.passed],
    }
