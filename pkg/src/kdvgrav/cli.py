"""Command-line entry point.

Exit codes: 0 all requested checks pass, 1 a verification failed, 2 invalid
configuration, 3 an antiderivative did not exist (the polynomial is dumped
to stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import cache
from . import gelfand_dickey as gd
from . import genus as gx
from . import series as so
from .diffpoly import NotATotalDerivative

FORMATS = ("text", "json", "latex", "bfile", "csv")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NOT_TOTAL = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: tuple[str, ...]
    max_n: int = 8
    k: int = 0
    l: int = 0
    g: int = 0
    n: int = 0
    flow: int | None = None
    vars: tuple[int, ...] = (0, 2)
    degree: int = 6
    genus: int = 2
    format: str = "text"
    cache_dir: Path | None = None
    seed: int = 0
    cases: int = 100
    allow_large: bool = False
    radius: Fraction | None = None
    n_max: int = 10000
    point: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1))
    bfile: bool = False
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        for name in ("max_n", "k", "l", "g", "n", "degree", "genus", "cases", "n_max"):
            if getattr(self, name) < 0:
                raise ConfigError(f"--{name.replace('_', '-')} must be non-negative")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        if 0 not in self.vars:
            raise ConfigError("--vars must include t0")
        if self.max_n > gd.COST_GUARD_N and not self.allow_large:
            raise ConfigError(f"--max-n above {gd.COST_GUARD_N} needs --allow-large")
        if self.k > gd.COST_GUARD_N or self.l > gd.COST_GUARD_N:
            if not self.allow_large:
                raise ConfigError(f"--k/--l above {gd.COST_GUARD_N} needs --allow-large")


def _parse_vars(text: str) -> tuple[int, ...]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if not tok.startswith("t") or not tok[1:].isdigit():
            raise argparse.ArgumentTypeError(f"bad variable {tok!r}; expected t0,t1,...")
        out.append(int(tok[1:]))
    if len(set(out)) != len(out):
        raise argparse.ArgumentTypeError("duplicate variables")
    return tuple(sorted(out))


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", default="text", choices=FORMATS)
    common.add_argument("--cache-dir", type=Path, default=None,
                        help=f"table cache (default ${cache.ENV_VAR} or ~/.cache/kdvgrav)")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--allow-large", action="store_true",
                        help=f"permit n > {gd.COST_GUARD_N}")

    p = argparse.ArgumentParser(prog="kdvgrav", description=__doc__.splitlines()[0])
    top = p.add_subparsers(dest="group", required=True)

    g_gd = top.add_parser("gd", help="Gelfand-Dickey tables and identities")
    gd_sub = g_gd.add_subparsers(dest="cmd", required=True)
    s = gd_sub.add_parser("table", parents=[common])
    s.add_argument("--max-n", type=int, default=8)
    s = gd_sub.add_parser("verify", parents=[common])
    s.add_argument("--max-n", type=int, default=8)
    s.add_argument("--cases", type=int, default=100)
    s = gd_sub.add_parser("pkl", parents=[common])
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--l", type=int, required=True)

    s = top.add_parser("action", parents=[common], help="Lagrangian of the mean field action")
    s.add_argument("--max-n", type=int, default=4)

    g_str = top.add_parser("string", help="string-equation series oracle")
    str_sub = g_str.add_subparsers(dest="cmd", required=True)
    for name in ("solve", "check-kdv", "check-puncture", "check-dF", "correlators"):
        s = str_sub.add_parser(name, parents=[common])
        s.add_argument("--vars", type=_parse_vars, default=(0, 2))
        s.add_argument("--degree", type=int, default=6)
        s.add_argument("--genus", type=int, default=2)
        if name == "check-kdv":
            s.add_argument("--flow", type=int, default=None,
                           help="flow index n (default: largest variable)")

    g_gen = top.add_parser("genus", help="the (t0, t2) genus expansion")
    gen_sub = g_gen.add_subparsers(dest="cmd", required=True)
    s = gen_sub.add_parser("ug", parents=[common])
    s.add_argument("--g", type=int, required=True)
    s.add_argument("--degree", type=int, default=None, help="also print the expansion")
    s = gen_sub.add_parser("seq", parents=[common])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--bfile", action="store_true")
    s = gen_sub.add_parser("asymptotics", parents=[common])
    s.add_argument("--n", type=int, default=100)
    s = gen_sub.add_parser("diverge", parents=[common])
    s.add_argument("--radius", type=_fraction, required=True)
    s.add_argument("--n-max", type=int, default=10000)
    s.add_argument("--t0", type=_fraction, default=Fraction(0))
    s.add_argument("--t2", type=_fraction, default=Fraction(1))
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cmd = (args.group,) + ((args.cmd,) if getattr(args, "cmd", None) else ())
    if args.no_cache:
        cache_dir = None
    else:
        cache_dir = args.cache_dir or cache.default_cache_dir()
    fmt = "bfile" if getattr(args, "bfile", False) else args.format
    cfg = RunConfig(command=cmd, format=fmt, cache_dir=cache_dir, seed=args.seed,
                    allow_large=args.allow_large)
    for name in ("max_n", "k", "l", "g", "n", "flow", "vars", "degree", "genus", "cases",
                 "radius", "n_max", "bfile"):
        if getattr(args, name, None) is not None:
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "t0"):
        cfg.point = (args.t0, args.t2)
    if cmd == ("genus", "ug"):
        cfg.extra["expand"] = args.degree
    return cfg


# -- handlers -------------------------------------------------------------------


def _emit(out, text: str) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


def _table(cfg: RunConfig, out) -> int:
    table = cache.cached_table(cfg.cache_dir, cfg.max_n, cfg.allow_large)
    if cfg.format == "json":
        _emit(out, cache.dumps(cache.table_to_json_obj(table)))
    elif cfg.format == "latex":
        _emit(out, gd.table_latex(table))
    else:
        _emit(out, "\n".join(gd.iter_table_text(table)))
    return EXIT_OK


def _verify(cfg: RunConfig, out) -> int:
    if cfg.max_n < 1:
        raise ConfigError("--max-n must be at least 1 for verify")
    cache.cached_table(cfg.cache_dir, cfg.max_n + 1, allow_large=True)
    ident = gd.verify_identities(cfg.max_n)
    rand = gd.random_identity_checks(cfg.seed, cfg.cases)
    ok = ident.passed and rand.passed
    if cfg.format == "json":
        obj = {
            "max_n": cfg.max_n,
            "seed": cfg.seed,
            "cases": cfg.cases,
            "passed": ok,
            "identities": [r.__dict__ for r in ident.results],
            "random": {k: list(v) for k, v in rand.summary().items()},
            "random_failures": [r.__dict__ for r in rand.failures()],
        }
        _emit(out, json.dumps(obj, indent=1))
    else:
        lines = [f"seed {cfg.seed}, {cfg.cases} random cases, max_n {cfg.max_n}"]
        for key, (passed, total) in ident.summary().items():
            label = gd.IDENTITIES.get(key, key)
            lines.append(f"({key}) {label}: {passed}/{total} {'PASS' if passed == total else 'FAIL'}")
        for key, (passed, total) in rand.summary().items():
            lines.append(f"{key}: {passed}/{total} {'PASS' if passed == total else 'FAIL'}")
        for r in ident.failures() + rand.failures():
            lines.append(f"  failure {r.identity} n={r.n}: {r.detail}")
        lines.append("ALL PASS" if ok else "FAILURES")
        _emit(out, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def _pkl(cfg: RunConfig, out) -> int:
    entry = cache.cached_pkl(cfg.cache_dir, cfg.k, cfg.l)
    if cfg.format == "json":
        _emit(out, json.dumps({"k": entry.k, "l": entry.l, "P": entry.P.to_json_obj()}))
    elif cfg.format == "latex":
        _emit(out, f"P_{{{entry.k},{entry.l}}} = {gd.to_latex(entry.P)}")
    else:
        _emit(out, f"P_{entry.k},{entry.l} = {entry.P.to_text()}")
    return EXIT_OK


def _action(cfg: RunConfig, out) -> int:
    cache.cached_table(cfg.cache_dir, cfg.max_n, cfg.allow_large)
    action = gd.lagrangian_expansion(cfg.max_n)
    el = gd.euler_lagrange_check(cfg.max_n, max(action.blocks[n].max_genus() for n in action.blocks))
    zero = action.evaluate({})
    airy_ok = zero == -gd.U ** 2 / 2
    genus0 = action.genus_zero()
    closed = gd.genus_zero_lagrangian(cfg.max_n)
    l0_ok = all(genus0[n] == closed[n] for n in genus0)
    ok = el.passed and airy_ok and l0_ok
    if cfg.format == "json":
        obj = action.to_json_obj()
        obj.update(euler_lagrange=el.passed, airy=airy_ok, genus_zero=l0_ok,
                   L_at_zero_times=zero.to_json_obj())
        _emit(out, json.dumps(obj, indent=1))
    elif cfg.format == "latex":
        _emit(out, action.to_latex())
        l0 = " + ".join(f"{action.latex_label(n)} {gd.to_latex(genus0[n])}" for n in genus0)
        _emit(out, f"L_0 = {l0}")
        _emit(out, f"L_0|_{{t=0}} = {gd.to_latex(zero)}")
    else:
        _emit(out, action.to_text())
        l0 = " + ".join(f"({action.coefficient_label(n)})*({genus0[n].to_text()})" for n in genus0)
        _emit(out, f"L0 = {l0}")
        _emit(out, f"L0 at t = 0: {zero.to_text()}  (Airy curve {'ok' if airy_ok else 'MISMATCH'})")
        _emit(out, f"Euler-Lagrange <=> string: {'PASS' if el.passed else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def _active(cfg: RunConfig) -> set[int]:
    return {v for v in cfg.vars if v != 0}


def _string(cfg: RunConfig, out) -> int:
    D, G = cfg.degree, cfg.genus
    sol = so.solve_string(_active(cfg), D, G)
    sub = cfg.command[1]
    if sub == "solve":
        if cfg.format == "json":
            _emit(out, sol.u.to_json())
        else:
            _emit(out, f"# u over {','.join(f't{v}' for v in sol.vars)}, D={D}, G={G}, "
                       f"{sol.iterations} iterations")
            _emit(out, sol.u.to_text() or "0")
        return EXIT_OK
    if sub == "correlators":
        for label, value in so.correlators(sol):
            _emit(out, f"{label} = {value}")
        return EXIT_OK
    if sub == "check-kdv":
        flow = cfg.flow if cfg.flow is not None else max(sol.vars)
        if flow not in sol.vars:
            raise ConfigError(f"t{flow} is not among --vars")
        report = so.check_kdv(sol, flow)
    elif sub == "check-puncture":
        report = so.check_puncture(sol)
    else:
        report = so.reconstruct_dF(sol).report
    if cfg.format == "json":
        _emit(out, json.dumps({
            "check": report.name,
            "passed": report.passed,
            "degree": report.compared_degree,
            "genus": report.compared_genus,
            "mismatch": None if report.mismatch is None else [str(x) for x in report.mismatch],
            "notes": report.notes,
        }))
    else:
        _emit(out, report.describe())
    return EXIT_OK if report.passed else EXIT_FAIL


def _genus(cfg: RunConfig, out) -> int:
    sub = cfg.command[1]
    if sub == "ug":
        form = gx.closed_form_ug(cfg.g)
        if cfg.format == "latex":
            _emit(out, form.to_latex())
        elif cfg.format == "json":
            _emit(out, json.dumps({
                "g": form.g, "c_g": str(form.c_g), "t2_power": form.t2_power,
                "s_power": str(form.s_power), "extra_inverse_t2": form.extra,
            }))
        else:
            _emit(out, f"u_{form.g} = {form.to_text()}")
        D = cfg.extra.get("expand")
        if D is not None:
            expansion = form.expand(D)
            rec = gx.ug_by_recursion(cfg.g, D)
            _emit(out, expansion.to_json() if cfg.format == "json" else expansion.to_text())
            if rec != expansion:
                _emit(out, "recursion disagrees with closed form")
                return EXIT_FAIL
        return EXIT_OK
    if sub == "seq":
        seq = gx.a_sequence(cfg.n)
        if cfg.format == "bfile":
            out.write(seq.bfile())
        elif cfg.format == "json":
            _emit(out, json.dumps({"a": [str(v) for v in seq.values]}))
        else:
            _emit(out, "\n".join(f"a_{i} = {v}" for i, v in enumerate(seq.values)))
        return EXIT_OK
    if sub == "asymptotics":
        rep = gx.asymptotics(cfg.n)
        if cfg.format == "csv":
            out.write(rep.csv())
        else:
            lines = [
                f"n_max {rep.n_max}",
                f"r_n = a_n / (50^(n-1) ((n-1)!)^2) -> beta = 5 sqrt(15) / (2 pi^2) = {rep.beta!r}",
                f"r_{rep.n_max} = {rep.r(rep.n_max)!r}, |r/beta - 1| = {rep.beta_distance:.3e}",
                f"|r_(n+1)/r_n - 1| at n = {rep.n_max - 1}: {rep.step_deviation(rep.n_max - 1):.3e}; "
                f"monotone over [{rep.tail_start}, {rep.n_max}]: {rep.tail_monotone}",
                f"rho_n = c_n^(1/n) / n^2 -> 25 / (12 e^2) = {rep.target!r}",
                f"rho_{rep.n_max} / target = {rep.rho(rep.n_max) / rep.target!r}",
            ]
            _emit(out, "\n".join(lines))
        return EXIT_OK if rep.tail_monotone else EXIT_FAIL
    if sub == "diverge":
        if cfg.radius is None or cfg.radius <= 0:
            raise ConfigError("--radius must be positive")
        try:
            verdict = gx.divergence_certificate(cfg.radius, cfg.n_max, *cfg.point)
        except gx.InsufficientDepth as exc:
            _emit(out, f"no witness: {exc}")
            return EXIT_FAIL
        if cfg.format == "json":
            _emit(out, json.dumps({"radius": str(verdict.radius), "witness": verdict.witness,
                                   "method": verdict.method,
                                   "point": [str(x) for x in verdict.point]}))
        else:
            _emit(out, verdict.describe())
        return EXIT_OK
    raise ConfigError(f"unknown command {cfg.command}")


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    cfg.validate()
    head = cfg.command
    if head == ("gd", "table"):
        return _table(cfg, out)
    if head == ("gd", "verify"):
        return _verify(cfg, out)
    if head == ("gd", "pkl"):
        return _pkl(cfg, out)
    if head == ("action",):
        return _action(cfg, out)
    if head[0] == "string":
        return _string(cfg, out)
    if head[0] == "genus":
        return _genus(cfg, out)
    raise ConfigError(f"unknown command {head}")


def main(argv: list[str] | None = None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(config_from_args(args), out)
    except (ConfigError, gd.CostGuardError) as exc:
        print(f"kdvgrav: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotATotalDerivative as exc:
        print(f"kdvgrav: not a total derivative:\n{exc.poly.to_text()}", file=sys.stderr)
        return EXIT_NOT_TOTAL


if __name__ == "__main__":
    sys.exit(main())
