"""Command-line interface.

Every subcommand evaluates on a uniform grid and prints CSV (``t,value`` plus
``tail_estimate`` where a series truncation bound exists) or writes an SVG.
A JSON run config (``mlkcalc run CONFIG``) carries the same fields and is
checked against ``schema/runconfig.schema.json`` before anything runs.

Exit status: 0 success, 2 invalid input, 3 numerical failure (including a
failing ``verify`` suite).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import verify as _verify
from .ab_ops import (
    ABParams,
    ConstantNorm,
    ExponentialNorm,
    ab_integral,
    abc_derivative_kernel,
    abc_derivative_ml,
    abc_derivative_series,
    abr_derivative_kernel,
    abr_derivative_ml,
    abr_derivative_series,
)
from .errors import MLKCalcError, ValidationError
from .funcmodel import Grid, PowerSum, SampledFn, SmoothFn, parse_function, sample
from .laplace_ode import LinearODESpec, NonlinearConvSpec, solve_linear, solve_nonlinear_conv
from .plot import render_svg
from .riccati import RiccatiSpec, riccati_eval
from .rl_ops import caputo_derivative, rl_derivative, rl_integral
from .rules import RuleTruncation, chain_rule, product_rule
from .semigroup import SemigroupCase, fie_residual, semigroup_defect, semigroup_solution
from .specialfn import ml_series

__all__ = ["main", "build_parser", "load_config", "format_csv"]

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

COMMANDS = ("mlf", "ab-deriv", "ab-int", "rl", "ode", "rule", "semigroup", "verify")


class _Usage(Exception):
    """argparse error turned into an exception so ``main`` controls the exit path."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: error: {message}")


# -- output ---------------------------------------------------------------

def _g17(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def format_csv(t, value, tail=None) -> str:
    """CSV text with 17 significant digits (round-trip exact)."""
    buf = io.StringIO()
    buf.write("t,value,tail_estimate\n" if tail is not None else "t,value\n")
    t = np.asarray(t, dtype=float)
    value = np.broadcast_to(np.asarray(value, dtype=float), t.shape)
    if tail is None:
        for x, y in zip(t, value):
            buf.write(f"{_g17(x)},{_g17(y)}\n")
    else:
        tail = np.broadcast_to(np.asarray(tail, dtype=float), t.shape)
        for x, y, e in zip(t, value, tail):
            buf.write(f"{_g17(x)},{_g17(y)},{_g17(e)}\n")
    return buf.getvalue()


class Result:
    """Values on a grid plus an optional tail column, rendered as CSV or SVG."""

    def __init__(self, grid, values, tail=None, label="value"):
        self.grid = grid
        self.values = np.asarray(values, dtype=float)
        self.tail = tail
        self.label = label

    def render(self, fmt):
        if fmt == "svg":
            head_bad = not np.isfinite(self.values[0])
            return render_svg([SampledFn(self.grid, self.values, head_bad)], [self.label])
        return format_csv(self.grid.t, self.values, self.tail)


# -- argument helpers -------------------------------------------------------

def _norm(text):
    if text in (None, "constant"):
        return ConstantNorm()
    if isinstance(text, str) and text.startswith("exp:"):
        try:
            lam = float(text[4:])
        except ValueError:
            raise ValidationError(f"bad exponential norm {text!r}") from None
        return ExponentialNorm(lam)
    raise ValidationError(f"norm must be 'constant' or 'exp:<rate>', got {text!r}")


def _function(text, base=0.0):
    if isinstance(text, str):
        stripped = text.strip()
        if stripped.startswith(("{", "[")):
            try:
                text = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"function literal is not valid JSON: {exc}") from None
        else:
            try:
                text = float(stripped)
            except ValueError:
                pass
    return parse_function(text, base)


def _grid(args):
    return Grid(float(args.a), float(args.b), int(args.n))


def _powersum(f):
    if isinstance(f, SmoothFn):
        return f.exact if f.exact is not None else f.as_powersum()
    return f


def _params(args):
    return ABParams(args.alpha, args.base, _norm(args.norm))


def _eval(f, grid):
    if isinstance(f, SampledFn):
        return f.values
    if isinstance(f, PowerSum):
        return f.eval(grid.t)
    return np.asarray(f(grid.t), dtype=float)


# -- subcommands ------------------------------------------------------------

def cmd_mlf(args):
    grid = _grid(args)
    vals = ml_series(args.alpha, args.beta, args.c * grid.t ** args.power if args.power != 1.0 else args.c * grid.t)
    return Result(grid, vals, label=f"E_{args.alpha:g},{args.beta:g}")


def cmd_ab_deriv(args):
    p = _params(args)
    grid = _grid(args)
    if grid.a != p.base:
        raise ValidationError("grid must start at the base point")
    f = _function(args.f, p.base)
    if args.path == "ml":
        resum = abr_derivative_ml if args.kind == "abr" else abc_derivative_ml
        return Result(grid, resum(_powersum(f), p)(grid.t), label=f"{args.kind.upper()} D^{args.alpha:g}")
    if args.path == "series":
        series = abr_derivative_series if args.kind == "abr" else abc_derivative_series
        value, rep = series(_powersum(f), p, span=grid.b - grid.a)
        return Result(grid, value.eval(grid.t), tail=rep.tail_estimate, label=f"{args.kind.upper()} D^{args.alpha:g}")
    if args.kind == "abr":
        out = abr_derivative_kernel(sample(f, grid), p)
    else:
        out = abc_derivative_kernel(f, p, grid)
    return Result(grid, out.values, label=f"{args.kind.upper()} D^{args.alpha:g}")


def cmd_ab_int(args):
    p = _params(args)
    grid = _grid(args)
    f = _function(args.f, p.base)
    if isinstance(f, SmoothFn) and f.exact is None:
        if grid.a != p.base:
            raise ValidationError("grid must start at the base point for sampled input")
        f = sample(f, grid)
    return Result(grid, _eval(ab_integral(f, p), grid), label=f"AB I^{args.alpha:g}")


def cmd_rl(args):
    grid = _grid(args)
    f = _function(args.f, grid.a)
    exact = _powersum(f) if (isinstance(f, PowerSum) or (isinstance(f, SmoothFn) and f.exact is not None)) else None
    if args.op == "integral":
        out = rl_integral(exact if exact is not None else sample(f, grid), args.mu)
    elif args.op == "derivative":
        out = rl_derivative(exact if exact is not None else sample(f, grid), args.mu)
    else:
        out = caputo_derivative(f, args.mu, None if exact is not None else grid)
    if isinstance(out, PowerSum):
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = out.eval(grid.t) if np.all(out.expos >= 0) else _eval_singular(out, grid)
        return Result(grid, vals, label=f"RL {args.op}")
    vals = out.values if isinstance(out, SampledFn) else np.asarray(out, dtype=float)
    return Result(grid, vals, label=f"RL {args.op}")


def _eval_singular(ps, grid):
    vals = np.full(grid.n, np.nan)
    tau = grid.t - ps.base
    keep = tau > 0
    vals[keep] = ps.eval(grid.t[keep])
    return vals


def _read_json(text):
    """JSON from a literal or a file path."""
    if isinstance(text, dict):
        return text
    if not text.lstrip().startswith(("{", "[")):
        try:
            text = Path(text).read_text(encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot read {text!r}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from None


def _ode_grid(spec, args):
    g = spec.get("grid")
    if g is None:
        return _grid(args)
    return Grid(float(g.get("a", 0.0)), float(g["b"]), int(g["n"]))


def cmd_ode(args):
    spec = _read_json(args.spec)
    _validate(spec, "ode_spec")
    grid = _ode_grid(spec, args)
    norm = _norm(spec.get("norm", args.norm))
    kind = spec.get("type", "linear")
    g = _function(spec["g"]) if "g" in spec else None
    if kind in ("linear", "sequential"):
        s = LinearODESpec(spec["family"], spec["alpha"], spec.get("A", 0.0), g, spec.get("f0", 0.0), norm,
                          float(spec.get("delta_weight", 0.0)))
        out = solve_linear(s, grid)
        return Result(grid, out.values, label=s.family)
    if kind == "nonlinear":
        s = NonlinearConvSpec(float(spec["alpha"]), float(spec["A"]), g, float(spec.get("f0", 0.0)),
                              spec.get("branch", "auto"), norm)
        return Result(grid, solve_nonlinear_conv(s, grid).values, label="nonlinear")
    s = RiccatiSpec(float(spec["P"]), float(spec["Q"]), float(spec["alpha"]), norm, int(spec.get("sign", 1)))
    return Result(grid, riccati_eval(s, int(spec.get("M", 20)), grid.t), label="Riccati")


def cmd_rule(args):
    p = _params(args)
    grid = _grid(args)
    trunc = RuleTruncation(args.M, args.N)
    if args.which == "product":
        out = product_rule(_function(args.u, p.base), _function(args.v, p.base), p, trunc, where=grid)
    else:
        out = chain_rule(_function(args.outer), _function(args.inner, p.base), p, trunc, where=grid)
    return Result(grid, out.values, label=f"{args.which} rule")


def cmd_semigroup(args):
    grid = _grid(args)
    if args.what == "solution":
        sol = semigroup_solution(args.q, _norm(args.norm))
        if grid.a <= 0:
            vals = np.full(grid.n, np.nan)
            vals[grid.t > 0] = sol(grid.t[grid.t > 0])
        else:
            vals = sol(grid.t)
        return Result(grid, vals, label=f"solution q={args.q}")
    beta = args.alpha if args.beta is None else args.beta
    case = SemigroupCase(args.alpha, beta, _powersum(_function(args.f)), _norm(args.norm))
    ps = semigroup_defect(case) if args.what == "defect" else fie_residual(case)
    return Result(grid, ps.eval(grid.t), label=args.what)


def cmd_verify(args):
    if args.suite == "inverse" or args.suite == "all":
        kw = {"alpha": args.alpha, "f": args.f, "beta": args.beta}
        checks = _verify.run_suite(args.suite, **kw)
        params = kw
    else:
        checks = _verify.run_suite(args.suite)
        params = {}
    rep = _verify.report(args.suite, checks, params)
    return rep


HANDLERS = {
    "mlf": cmd_mlf,
    "ab-deriv": cmd_ab_deriv,
    "ab-int": cmd_ab_int,
    "rl": cmd_rl,
    "ode": cmd_ode,
    "rule": cmd_rule,
    "semigroup": cmd_semigroup,
    "verify": cmd_verify,
}


# -- parser -------------------------------------------------------------------

def _common(sp, alpha=None, n=257, a=0.0, b=2.0):
    sp.add_argument("--alpha", type=float, default=alpha, required=alpha is None, help="order in (0, 1)")
    sp.add_argument("--a", type=float, default=a, help="grid start (default %(default)s)")
    sp.add_argument("--b", type=float, default=b, help="grid end (default %(default)s)")
    sp.add_argument("--n", type=int, default=n, help="grid point count (default %(default)s)")
    sp.add_argument("--base", type=float, default=0.0, help="operator base point")
    sp.add_argument("--norm", default="constant", help="'constant' or 'exp:<rate>'")
    _io(sp)


def _io(sp):
    sp.add_argument("--out", "-o", help="output file (written only on success)")
    sp.add_argument("--format", choices=("csv", "svg"), default="csv")


def build_parser():
    ap = _Parser(prog="mlkcalc", description="Atangana-Baleanu operators, Mittag-Leffler kernels and AB equations.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("mlf", help="table of E_{alpha,beta}(c t**power)")
    _common(sp)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--c", type=float, default=-1.0, help="argument scale (default %(default)s)")
    sp.add_argument("--power", type=float, default=1.0)

    sp = sub.add_parser("ab-deriv", help="ABR or ABC derivative")
    _common(sp)
    sp.add_argument("--f", required=True, help="function literal")
    sp.add_argument("--kind", choices=("abr", "abc"), default="abr")
    sp.add_argument("--path", choices=("series", "kernel", "ml"), default="series")

    sp = sub.add_parser("ab-int", help="AB integral")
    _common(sp)
    sp.add_argument("--f", required=True)

    sp = sub.add_parser("rl", help="Riemann-Liouville integral/derivative or Caputo derivative")
    _common(sp, alpha=0.5)
    sp.add_argument("--f", required=True)
    sp.add_argument("--mu", type=float, required=True, help="order")
    sp.add_argument("--op", choices=("integral", "derivative", "caputo"), default="integral")

    sp = sub.add_parser("ode", help="solve a linear, sequential, nonlinear or Riccati AB equation")
    _common(sp, alpha=0.5, n=513)
    sp.add_argument("--spec", required=True, help="JSON literal or path to a JSON file")

    sp = sub.add_parser("rule", help="product or chain rule")
    _common(sp)
    sp.add_argument("which", choices=("product", "chain"))
    sp.add_argument("--u", default="t^2")
    sp.add_argument("--v", default="t")
    sp.add_argument("--outer", default="t^2", help="outer function f of f(g(t))")
    sp.add_argument("--inner", default="e^t", help="inner function g of f(g(t))")
    sp.add_argument("--M", type=int, default=RuleTruncation.M_outer)
    sp.add_argument("--N", type=int, default=RuleTruncation.N_inner)

    sp = sub.add_parser("semigroup", help="semigroup defect, integral-equation residual or solution family")
    _common(sp, alpha=1 / 3)
    sp.add_argument("what", choices=("defect", "residual", "solution"))
    sp.add_argument("--beta", type=float)
    sp.add_argument("--f", default="t")
    sp.add_argument("--q", type=int, default=3)

    sp = sub.add_parser("verify", help="run identity suites and print a JSON report")
    sp.add_argument("--suite", choices=tuple(_verify.SUITES) + ("all",), default="all")
    sp.add_argument("--alpha", type=float, default=0.4)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--f", default="t")
    _io(sp)

    sp = sub.add_parser("run", help="execute a JSON run config")
    sp.add_argument("config", help="path to the config file, or '-' for stdin")
    return ap


# -- config -------------------------------------------------------------------

_SCHEMA = None


def _schema():
    global _SCHEMA
    if _SCHEMA is None:
        text = resources.files("mlkcalc").joinpath("schema/runconfig.schema.json").read_text(encoding="utf-8")
        _SCHEMA = json.loads(text)
    return _SCHEMA


def _validate(obj, definition=None):
    import jsonschema

    schema = _schema()
    if definition is not None:
        schema = {**schema["$defs"][definition], "$defs": schema["$defs"]}
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ValidationError(f"config invalid at {where}: {exc.message}") from None


def load_config(text):
    """Parse and validate a run config; returns the config dict."""
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from None
    _validate(cfg)
    return cfg


def _config_to_namespace(cfg, parser):
    cmd = cfg["command"]
    argv = [cmd] + list(cfg.get("positional", []))
    if cmd == "ode":
        argv += ["--spec", "{}"]
    elif cmd == "ab-deriv" or cmd == "ab-int":
        argv += ["--f", "t"]
    elif cmd == "rl":
        argv += ["--f", "t", "--mu", "0.5"]
    if cmd in ("mlf", "ab-deriv", "ab-int", "rule") and "alpha" not in cfg:
        raise ValidationError(f"{cmd} needs alpha")
    ns = parser.parse_args(argv)
    for key, val in cfg.items():
        if key in ("command", "positional"):
            continue
        if key == "grid":
            ns.a, ns.b, ns.n = val.get("a", 0.0), val["b"], val["n"]
            continue
        if key == "truncation":
            ns.M, ns.N = val.get("M_outer", ns.M), val.get("N_inner", ns.N)
            continue
        if key in ("f", "u", "v", "outer", "inner") and not isinstance(val, str):
            val = json.dumps(val)
        if not hasattr(ns, key):
            raise ValidationError(f"option {key!r} does not apply to {cmd}")
        setattr(ns, key, val)
    return ns


# -- entry point ----------------------------------------------------------------

def _execute(ns):
    if getattr(ns, "norm", None) is not None:
        _norm(ns.norm)
    result = HANDLERS[ns.command](ns)
    if isinstance(result, dict):
        text = json.dumps(result, indent=2, sort_keys=True) + "\n"
        status = EXIT_OK if result["passed"] else EXIT_NUMERIC
        if not result["passed"]:
            print("verify: failing checks: " + ", ".join(result["failed"]), file=sys.stderr)
    else:
        text = result.render(ns.format)
        status = EXIT_OK
    if ns.out:
        Path(ns.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return status


def main(argv=None):
    parser = build_parser()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _warn_to_stderr
            ns = parser.parse_args(argv)
            if ns.command == "run":
                src = sys.stdin.read() if ns.config == "-" else _read_text(ns.config)
                ns = _config_to_namespace(load_config(src), parser)
            return _execute(ns)
    except _Usage as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (ValidationError, ValueError, KeyError, TypeError) as exc:
        print(f"mlkcalc: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, MLKCalcError) as exc:
        print(f"mlkcalc: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from None


def _warn_to_stderr(message, category, filename, lineno, file=None, line=None):
    print(f"mlkcalc: warning: {category.__name__}: {message}", file=sys.stderr)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
