"""Gelfand-Dickey polynomials R_n, their potentials T_n and P_{k,l}.

R_n is built from the Lenard recursion

    dx R_{n+1} = (u_1 R_n + 2 u dx R_n + lambda^2/4 dx^3 R_n) / (2n + 1),  R_0 = 1

by integrating the right-hand side, always choosing the antiderivative with
zero constant term.  T_n is the antiderivative of u_1 R_n.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .diffpoly import (
    ONE,
    U,
    DiffPoly,
    antiderivative,
    dx,
    euler_lambda,
    grading,
    half_lambda_dlambda,
    random_poly,
    var_delta,
)

U1 = DiffPoly.u(1)
LAMBDA2 = DiffPoly.monomial(1, genus=1)
NORMALIZATION = "zero constant term, R_0 = 1"

# R_n grows combinatorially; beyond this the caller must opt in explicitly
COST_GUARD_N = 20


class CostGuardError(ValueError):
    pass


_R: list[DiffPoly] = [ONE]
_T: dict[int, DiffPoly] = {}
_P: dict[tuple[int, int], DiffPoly] = {}


def clear_caches() -> None:
    del _R[1:]
    _T.clear()
    _P.clear()


def lenard_rhs(r: DiffPoly, n: int) -> DiffPoly:
    """Right-hand side of the Lenard recursion: dx R_{n+1} given R_n."""
    rx = dx(r)
    total = U1 * r + 2 * U * rx + Fraction(1, 4) * LAMBDA2 * dx(rx, 2)
    return total / (2 * n + 1)


def lenard_R(n: int, method: str = "reduce") -> DiffPoly:
    if n < 0:
        raise ValueError("n must be non-negative")
    while len(_R) <= n:
        k = len(_R) - 1
        _R.append(antiderivative(lenard_rhs(_R[k], k), method=method))
    return _R[n]


def lenard_R_form2(n: int) -> DiffPoly:
    """R_{n+1} = ((u + lambda^2/4 dx^2) R_n + dx^{-1}(u dx R_n)) / (2n+1), iterated."""
    r = ONE
    for k in range(n):
        local = U * r + Fraction(1, 4) * LAMBDA2 * dx(r, 2)
        r = (local + antiderivative(U * dx(r))) / (2 * k + 1)
    return r


def lenard_R_form3(n: int) -> DiffPoly:
    """R_{n+1} = ((2u + lambda^2/4 dx^2) R_n - dx^{-1}(u_1 R_n)) / (2n+1), iterated."""
    r = ONE
    for k in range(n):
        local = 2 * U * r + Fraction(1, 4) * LAMBDA2 * dx(r, 2)
        r = (local - antiderivative(U1 * r)) / (2 * k + 1)
    return r


def compute_T(n: int) -> DiffPoly:
    if n not in _T:
        _T[n] = antiderivative(U1 * lenard_R(n))
    return _T[n]


@dataclass(frozen=True)
class PklEntry:
    k: int
    l: int
    P: DiffPoly


def compute_Pkl(k: int, l: int) -> PklEntry:
    """P_{k,l} with dx P_{k,l} = R_k dx R_l and zero constant term."""
    if k < 0 or l < 0:
        raise ValueError("k and l must be non-negative")
    if (k, l) not in _P:
        _P[(k, l)] = antiderivative(lenard_R(k) * dx(lenard_R(l)))
    return PklEntry(k, l, _P[(k, l)])


@dataclass
class GDTable:
    max_n: int
    entries: list[tuple[int, DiffPoly, DiffPoly]] = field(default_factory=list)
    normalization: str = NORMALIZATION

    def R(self, n: int) -> DiffPoly:
        return self.entries[n][1]

    def T(self, n: int) -> DiffPoly:
        return self.entries[n][2]


def build_table(max_n: int, allow_large: bool = False, start: GDTable | None = None) -> GDTable:
    """Table of (n, R_n, T_n) for n <= max_n, extending ``start`` if given."""
    if max_n < 0:
        raise ValueError("max_n must be non-negative")
    if max_n > COST_GUARD_N and not allow_large:
        raise CostGuardError(f"max_n={max_n} exceeds {COST_GUARD_N}; pass allow_large")
    entries = list(start.entries[: max_n + 1]) if start else []
    if entries:
        # seed the in-memory recursion from the cached entries
        del _R[1:]
        for n, r, t in entries[1:]:
            _R.append(r)
        for n, r, t in entries:
            _T.setdefault(n, t)
    for n in range(len(entries), max_n + 1):
        entries.append((n, lenard_R(n), compute_T(n)))
    return GDTable(max_n=max_n, entries=entries)


# -- identity verification ------------------------------------------------


@dataclass
class IdentityResult:
    identity: str
    n: int
    passed: bool
    detail: str = ""


@dataclass
class IdentityReport:
    results: list[IdentityResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, identity: str, n: int, ok: bool, detail: str = "") -> None:
        self.results.append(IdentityResult(identity, n, ok, detail))

    def failures(self) -> list[IdentityResult]:
        return [r for r in self.results if not r.passed]

    def summary(self) -> dict[str, tuple[int, int]]:
        """identity -> (passed, total)."""
        out: dict[str, list[int]] = {}
        for r in self.results:
            s = out.setdefault(r.identity, [0, 0])
            s[0] += r.passed
            s[1] += 1
        return {k: (v[0], v[1]) for k, v in out.items()}


IDENTITIES = {
    "a": "delta R_{n+1} = R_n",
    "b": "delta(u R_n) = (n+1) R_n - 1/2 lambda d/dlambda R_n",
    "c": "delta T_n = (1 - lambda d/dlambda) R_n",
    "d": "R_n^(g) in A_{n-g} with weight 2g",
    "e": "R_n^(0) = u^n / n!",
}


def _check(report: IdentityReport, name: str, n: int, lhs: DiffPoly, rhs: DiffPoly) -> None:
    diff = lhs - rhs
    report.add(name, n, not diff, "" if not diff else f"difference: {diff}")


def verify_identities(max_n: int) -> IdentityReport:
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    report = IdentityReport()
    for n in range(max_n + 1):
        try:
            r = lenard_R(n)
            _check(report, "a", n, var_delta(lenard_R(n + 1)), r)
            _check(report, "b", n, var_delta(U * r), (n + 1) * r - half_lambda_dlambda(r))
            _check(report, "c", n, var_delta(compute_T(n)), euler_lambda(r))
            expected = {(g, n - g, 2 * g) for g in r.genera()}
            slots = grading(r)
            ok = slots == expected and all(n - g >= 0 for g, _, _ in slots)
            report.add("d", n, ok, "" if ok else f"slots {sorted(slots)}")
            _check(report, "e", n, r.genus_part(0), U ** n / math.factorial(n))
        except Exception as exc:  # report, never raise
            report.add("error", n, False, repr(exc))
    return report


def random_identity_checks(seed: int = 0, cases: int = 100) -> IdentityReport:
    """Randomized checks of delta dx = 0, delta(u_1 delta f) = 0 and
    delta(u delta f) = n delta f for homogeneous f in A_n (n <= 6)."""
    rng = random.Random(seed)
    report = IdentityReport()
    for i in range(cases):
        q = random_poly(rng)
        _check(report, "delta dx = 0", i, var_delta(dx(q)), DiffPoly())
        f = random_poly(rng)
        _check(report, "delta(u1 delta f) = 0", i, var_delta(U1 * var_delta(f)), DiffPoly())
        n = rng.randint(1, 6)
        h = random_poly(rng, degree=n, max_order=3)
        df = var_delta(h)
        _check(report, "delta(u delta f) = n delta f", i, var_delta(U * df), n * df)
    return report


# -- the action density ------------------------------------------------------


def _shift(n: int) -> int:
    return -1 if n == 1 else 0


@dataclass
class ActionDensity:
    """sum_n (t_n - delta_{n1}) T_n with the t_n kept as formal symbols.

    ``blocks[n]`` is T_n; ``shifts[n]`` is the constant -delta_{n1}.
    """

    max_n: int
    blocks: dict[int, DiffPoly]
    shifts: dict[int, int]

    def coefficient_label(self, n: int) -> str:
        return f"t{n}-1" if self.shifts[n] else f"t{n}"

    def latex_label(self, n: int) -> str:
        t = f"t_{n}" if n < 10 else f"t_{{{n}}}"
        return f"({t}-1)" if self.shifts[n] else t

    def evaluate(self, times: dict[int, Fraction] | None = None) -> DiffPoly:
        """Substitute numeric values for the t_n (missing ones are zero)."""
        times = times or {}
        out = DiffPoly()
        for n, block in self.blocks.items():
            out = out + (Fraction(times.get(n, 0)) + self.shifts[n]) * block
        return out

    def genus_zero(self) -> dict[int, DiffPoly]:
        return {n: b.genus_part(0) for n, b in self.blocks.items()}

    def variational(self) -> dict[int, DiffPoly]:
        """delta applied blockwise; valid since t_n are constants for delta."""
        return {n: var_delta(b) for n, b in self.blocks.items()}

    def to_text(self) -> str:
        lines = []
        for n, block in self.blocks.items():
            lines.append(f"({self.coefficient_label(n)}) * ({block.to_text()})")
        return "L = " + "\n  + ".join(lines)

    def to_latex(self) -> str:
        parts = []
        for n, block in self.blocks.items():
            parts.append(f"{self.latex_label(n)} \\left( {to_latex(block)} \\right)")
        return "L = " + " \\\\\n  + ".join(parts)

    def to_json_obj(self) -> dict:
        return {
            "max_n": self.max_n,
            "blocks": [
                {"n": n, "shift": self.shifts[n], "T": b.to_json_obj()}
                for n, b in self.blocks.items()
            ],
        }


def lagrangian_expansion(max_n: int) -> ActionDensity:
    if max_n < 0:
        raise ValueError("max_n must be non-negative")
    blocks = {n: compute_T(n) for n in range(max_n + 1)}
    # T_1 always enters through the -delta_{n1} shift
    if 1 not in blocks:
        blocks[1] = compute_T(1)
    return ActionDensity(max_n, blocks, {n: _shift(n) for n in blocks})


def genus_zero_lagrangian(max_n: int) -> dict[int, DiffPoly]:
    """Closed form of each genus-zero block: u^{n+1}/(n+1)!."""
    return {n: U ** (n + 1) / math.factorial(n + 1) for n in range(max(max_n, 1) + 1)}


def euler_lagrange_check(max_n: int, max_g: int) -> IdentityReport:
    """Per flow n and genus g: the genus-g part of delta T_n equals (1-2g) R_n^(g).

    The t_n are independent formal constants, so the full identity
    delta sum (t_n - delta_{n1}) T_n = sum (t_n - delta_{n1}) (1-2g) lambda^{2g} R_n^(g)
    holds iff it holds block by block."""
    report = IdentityReport()
    action = lagrangian_expansion(max_n)
    variations = action.variational()
    for n in sorted(action.blocks):
        r = lenard_R(n)
        for g in range(max_g + 1):
            lhs = variations[n].genus_part(g)
            rhs = (1 - 2 * g) * r.genus_part(g)
            _check(report, f"EL g={g}", n, lhs, rhs)
    return report


# -- LaTeX -------------------------------------------------------------------


def _latex_jet(k: int) -> str:
    if k == 0:
        return "u"
    if k == 1:
        return "u_x"
    return f"u_{{{k}x}}"


def _latex_fraction(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"\\frac{{{c.numerator}}}{{{c.denominator}}}"


def to_latex(p: DiffPoly) -> str:
    """Render in the u, u_x, u_{2x}, lambda^2 notation."""
    if not p:
        return "0"
    out = []
    for i, (g, jet, c) in enumerate(p.terms()):
        factors = []
        a = abs(c)
        if a != 1 or (not jet and not g):
            factors.append(_latex_fraction(a))
        for k, e in jet:
            sym = _latex_jet(k)
            factors.append(sym if e == 1 else f"{sym}^{{{e}}}" if e > 9 else f"{sym}^{e}")
        if g:
            factors.append(f"\\lambda^{{{2 * g}}}" if 2 * g > 9 else f"\\lambda^{2 * g}")
        body = " ".join(factors)
        if i == 0:
            out.append(body if c > 0 else "-" + body)
        else:
            out.append(("+ " if c > 0 else "- ") + body)
    return " ".join(out)


def table_latex(table: GDTable) -> str:
    lines = ["\\begin{align*}"]
    for n, r, t in table.entries:
        lines.append(f"R_{{{n}}} &= {to_latex(r)}, & T_{{{n}}} &= {to_latex(t)} \\\\")
    lines.append("\\end{align*}")
    return "\n".join(lines)


def iter_table_text(table: GDTable) -> Iterable[str]:
    for n, r, t in table.entries:
        yield f"R_{n} = {r.to_text()}"
        yield f"T_{n} = {t.to_text()}"
