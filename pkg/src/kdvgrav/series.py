"""Truncated multivariate power series in the times t_k, graded by genus.

A series stores coefficients keyed by (genus, exponent vector) where the
exponent vector is aligned with ``vars`` (time indices, t_0 = x first).
Genus-h coefficients are kept up to total degree
``max_degree + slack * (max_genus - h)``; ``slack`` is 0 for user-facing
series and positive for internal working precision.
"""

from __future__ import annotations

import json
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .diffpoly import DiffPoly
from .gelfand_dickey import compute_T, lenard_R


class TruncationError(ValueError):
    pass


class TruncationWarning(UserWarning):
    pass


class TruncatedSeries:
    __slots__ = ("vars", "max_degree", "max_genus", "slack", "coeffs")

    def __init__(
        self,
        vars: Iterable[int],
        max_degree: int,
        max_genus: int,
        coeffs: Mapping[tuple, Fraction] | None = None,
        slack: int = 0,
    ):
        self.vars = tuple(vars)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate time variables")
        if max_degree < 0 or max_genus < 0 or slack < 0:
            raise ValueError("truncation bounds must be non-negative")
        self.max_degree = max_degree
        self.max_genus = max_genus
        self.slack = slack
        clean = {}
        for (g, exp), c in (coeffs or {}).items():
            exp = tuple(exp)
            if len(exp) != len(self.vars):
                raise ValueError("exponent vector does not match variables")
            if c and g <= max_genus and sum(exp) <= self.cap(g):
                clean[(g, exp)] = Fraction(c)
        self.coeffs = clean

    # -- bookkeeping ----------------------------------------------------------
    def cap(self, g: int) -> int:
        return self.max_degree + self.slack * (self.max_genus - g)

    def _like(self, coeffs) -> "TruncatedSeries":
        return TruncatedSeries(self.vars, self.max_degree, self.max_genus, coeffs, self.slack)

    def index(self, t: int) -> int:
        try:
            return self.vars.index(t)
        except ValueError:
            raise KeyError(f"t{t} is not a variable of this series") from None

    @classmethod
    def zero(cls, vars, max_degree, max_genus, slack=0) -> "TruncatedSeries":
        return cls(vars, max_degree, max_genus, {}, slack)

    @classmethod
    def constant(cls, c, vars, max_degree, max_genus, slack=0) -> "TruncatedSeries":
        vars = tuple(vars)
        return cls(vars, max_degree, max_genus, {(0, (0,) * len(vars)): c}, slack)

    @classmethod
    def variable(cls, t, vars, max_degree, max_genus, slack=0) -> "TruncatedSeries":
        vars = tuple(vars)
        exp = tuple(1 if v == t else 0 for v in vars)
        return cls(vars, max_degree, max_genus, {(0, exp): 1}, slack)

    def coefficient(self, g: int, exp) -> Fraction:
        exp = tuple(exp)
        if g > self.max_genus or sum(exp) > self.cap(g):
            raise TruncationError(f"(g={g}, exp={exp}) is outside the truncation")
        return self.coeffs.get((g, exp), Fraction(0))

    def genus_part(self, g: int) -> "TruncatedSeries":
        return self._like({k: c for k, c in self.coeffs.items() if k[0] == g})

    def truncate(self, max_degree: int | None = None, max_genus: int | None = None, slack: int = 0):
        d = self.max_degree if max_degree is None else max_degree
        G = self.max_genus if max_genus is None else max_genus
        return TruncatedSeries(self.vars, d, G, self.coeffs, slack)

    def restrict(self, vars: Iterable[int]) -> "TruncatedSeries":
        """Set every time not in ``vars`` to zero."""
        vars = tuple(vars)
        keep = [self.index(t) for t in vars]
        drop = [i for i in range(len(self.vars)) if i not in keep]
        out = {}
        for (g, exp), c in self.coeffs.items():
            if any(exp[i] for i in drop):
                continue
            out[(g, tuple(exp[i] for i in keep))] = c
        return TruncatedSeries(vars, self.max_degree, self.max_genus, out, self.slack)

    # -- arithmetic -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.vars == other.vars
            and self.max_degree == other.max_degree
            and self.max_genus == other.max_genus
            and self.slack == other.slack
            and self.coeffs == other.coeffs
        )

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncatedSeries.constant(other, self.vars, self.max_degree, self.max_genus)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return self._like(out)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _by_degree(self):
        buckets: dict = defaultdict(list)
        for (g, exp), c in self.coeffs.items():
            buckets[(g, sum(exp))].append((exp, c))
        return buckets

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._like({k: c * other for k, c in self.coeffs.items()})
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if other.vars != self.vars:
            raise ValueError("series over different variables")
        out: dict = defaultdict(Fraction)
        a, b = self._by_degree(), other._by_degree()
        for (g1, d1), terms1 in a.items():
            for (g2, d2), terms2 in b.items():
                g = g1 + g2
                if g > self.max_genus or d1 + d2 > self.cap(g):
                    continue
                for e1, c1 in terms1:
                    for e2, c2 in terms2:
                        out[(g, tuple(x + y for x, y in zip(e1, e2)))] += c1 * c2
        return self._like(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = TruncatedSeries.constant(1, self.vars, self.max_degree, self.max_genus, self.slack)
        for _ in range(n):
            result = result * self
        return result

    def diff(self, t: int, times: int = 1) -> "TruncatedSeries":
        """Partial derivative in t_t; the result is exact one degree lower."""
        i = self.index(t)
        coeffs = self.coeffs
        for _ in range(times):
            out = {}
            for (g, exp), c in coeffs.items():
                e = exp[i]
                if e:
                    ne = exp[:i] + (e - 1,) + exp[i + 1:]
                    out[(g, ne)] = c * e
            coeffs = out
        return self._like(coeffs)

    def times_var(self, t: int) -> "TruncatedSeries":
        i = self.index(t)
        out = {}
        for (g, exp), c in self.coeffs.items():
            out[(g, exp[:i] + (exp[i] + 1,) + exp[i + 1:])] = c
        return self._like(out)

    def shift_genus(self, g: int) -> "TruncatedSeries":
        """Multiply by lambda^{2g}."""
        return self._like({(h + g, e): c for (h, e), c in self.coeffs.items()})

    def inverse(self) -> "TruncatedSeries":
        """1/self for a series whose constant term is a nonzero genus-0 number."""
        zero = (0,) * len(self.vars)
        c0 = self.coeffs.get((0, zero))
        if not c0:
            raise ZeroDivisionError("series has no invertible constant term")
        # 1/(c0 (1 - a)) = (1/c0) sum a^j with a nilpotent in the truncation
        a = (self * Fraction(-1, 1) + c0) * (Fraction(1) / c0)
        result = TruncatedSeries.constant(1, self.vars, self.max_degree, self.max_genus, self.slack)
        power = result
        bound = self.cap(0) + self.max_genus + 1
        for _ in range(bound):
            power = power * a
            if not power.coeffs:
                break
            result = result + power
        return result * (Fraction(1) / c0)

    # -- comparison helpers ---------------------------------------------------
    def first_difference(self, other: "TruncatedSeries", max_degree: int, max_genus: int):
        """First (g, exp, self_coeff, other_coeff) differing at degree <= max_degree."""
        keys = set(self.coeffs) | set(other.coeffs)
        for g, exp in sorted(keys, key=lambda k: (k[0], sum(k[1]), k[1])):
            if g > max_genus or sum(exp) > max_degree:
                continue
            a = self.coeffs.get((g, exp), Fraction(0))
            b = other.coeffs.get((g, exp), Fraction(0))
            if a != b:
                return g, exp, a, b
        return None

    # -- output ---------------------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "vars": [f"t{v}" for v in self.vars],
            "max_degree": self.max_degree,
            "max_genus": self.max_genus,
            "coeffs": [
                {"g": g, "exp": list(exp), "c": str(c)}
                for (g, exp), c in sorted(self.coeffs.items(), key=lambda kv: (kv[0][0], sum(kv[0][1]), kv[0][1]))
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj) -> "TruncatedSeries":
        vars = [int(v.lstrip("t")) for v in obj["vars"]]
        coeffs = {(int(c["g"]), tuple(c["exp"])): Fraction(c["c"]) for c in obj["coeffs"]}
        return cls(vars, obj["max_degree"], obj["max_genus"], coeffs)

    @classmethod
    def from_json(cls, text: str) -> "TruncatedSeries":
        return cls.from_json_obj(json.loads(text))

    def to_text(self) -> str:
        lines = []
        for (g, exp), c in sorted(self.coeffs.items(), key=lambda kv: (kv[0][0], sum(kv[0][1]), kv[0][1])):
            mono = "*".join(
                f"t{v}" if e == 1 else f"t{v}^{e}" for v, e in zip(self.vars, exp) if e
            )
            lines.append(f"g={g}  {c}" + (f"*{mono}" if mono else ""))
        return "\n".join(lines)

    def __repr__(self) -> str:
        return (
            f"TruncatedSeries(vars={self.vars}, D={self.max_degree}, G={self.max_genus}, "
            f"terms={len(self.coeffs)})"
        )


# -- substitution -------------------------------------------------------------


def substitute(p: DiffPoly, u: TruncatedSeries, warn: bool = True) -> TruncatedSeries:
    """Evaluate p[u]: u_k -> d^k u/dt_0^k, lambda^{2g} -> genus shift by g.

    Terms whose lambda-power exceeds the series' genus cap are dropped.  A
    monomial with total derivative order w is exact to w fewer degrees
    than u itself."""
    if 0 not in u.vars:
        raise ValueError("t0 must be a variable of the series")
    if warn and overflow_genus(p, u):
        warnings.warn(
            f"lambda^{2 * p.max_genus()} terms exceed genus cap {u.max_genus} and are dropped",
            TruncationWarning,
            stacklevel=2,
        )
    derivs: dict[int, TruncatedSeries] = {0: u}
    powers: dict[tuple[int, int], TruncatedSeries] = {}

    def deriv(k):
        if k not in derivs:
            derivs[k] = deriv(k - 1).diff(0)
        return derivs[k]

    def power(k, e):
        if (k, e) not in powers:
            powers[(k, e)] = deriv(k) if e == 1 else power(k, e - 1) * deriv(k)
        return powers[(k, e)]

    result = TruncatedSeries.zero(u.vars, u.max_degree, u.max_genus, u.slack)
    one = TruncatedSeries.constant(1, u.vars, u.max_degree, u.max_genus, u.slack)
    for g, jet, c in p.terms():
        if g > u.max_genus:
            continue
        term = one
        for k, e in jet:
            term = term * power(k, e)
        result = result + term.shift_genus(g) * c
    return result


def overflow_genus(p: DiffPoly, u: TruncatedSeries) -> bool:
    """True when p carries lambda-powers the series cannot hold."""
    return p.max_genus() > u.max_genus


# -- the string equation ------------------------------------------------------

# working precision: genus-h coefficients are kept 2(G-h) degrees beyond D
WORK_SLACK = 2


@dataclass
class StringSolution:
    u: TruncatedSeries
    active: frozenset
    truncation: tuple[int, int]
    iterations: int
    work: TruncatedSeries = field(repr=False)

    @property
    def vars(self) -> tuple:
        return self.u.vars


def _string_map(u: TruncatedSeries, active, coefficient) -> TruncatedSeries:
    out = TruncatedSeries.variable(0, u.vars, u.max_degree, u.max_genus, u.slack)
    for k in sorted(active):
        out = out + substitute(coefficient(k), u, warn=False).times_var(k)
    return out


def _fixed_point(seed: TruncatedSeries, step, max_iter: int):
    u = seed
    for i in range(1, max_iter + 1):
        nxt = step(u)
        if nxt == u:
            return u, i
        u = nxt
    raise RuntimeError("fixed-point iteration did not stabilize")  # unreachable


def _variables(active) -> tuple:
    active = frozenset(int(k) for k in active)
    if any(k < 1 for k in active):
        raise ValueError("active flows must be >= 1")
    return active, (0,) + tuple(sorted(active))


def solve_string(active, D: int, G: int, vars: Iterable[int] | None = None) -> StringSolution:
    """Solve u = x + sum_{k in active} t_k R_k[u] as a truncated series.

    Extra ``vars`` may be listed (their flows are switched off unless they
    are active).  Iterates the map from u = x until it repeats; the map is
    triangular in (genus, degree) so this takes at most
    (D + 2G + 1) + 2G passes."""
    active, base = _variables(active)
    all_vars = tuple(sorted(set(base) | set(vars or ())))
    seed = TruncatedSeries.variable(0, all_vars, D, G, WORK_SLACK)
    max_iter = D + 4 * G + 3
    work, iters = _fixed_point(seed, lambda u: _string_map(u, active, lenard_R), max_iter)
    return StringSolution(work.truncate(D, G), active, (D, G), iters, work)


def landau_ginzburg_solve(active, D: int) -> TruncatedSeries:
    """Genus-zero fixed point u0 = x + sum t_k u0^k / k!."""
    active, all_vars = _variables(active)
    seed = TruncatedSeries.variable(0, all_vars, D, 0)
    u0 = seed

    def step(u):
        out = TruncatedSeries.variable(0, all_vars, D, 0)
        for k in sorted(active):
            out = out + ((u ** k) * Fraction(1, math.factorial(k))).times_var(k)
        return out

    u0, _ = _fixed_point(seed, step, D + 2)
    return u0


# -- checks -------------------------------------------------------------------


@dataclass
class CheckReport:
    name: str
    passed: bool
    compared_degree: int
    compared_genus: int
    mismatch: tuple | None = None
    notes: list[str] = field(default_factory=list)

    def describe(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{self.name}: {status} (degree <= {self.compared_degree}, genus <= {self.compared_genus})"
        if self.mismatch:
            g, exp, a, b = self.mismatch
            text += f"; first mismatch g={g} exp={list(exp)}: {a} != {b}"
        for n in self.notes:
            text += f"; {n}"
        return text


def _compare(name, lhs, rhs, degree, genus, notes=None) -> CheckReport:
    diff = lhs.first_difference(rhs, degree, genus)
    return CheckReport(name, diff is None, degree, genus, diff, list(notes or []))


def check_kdv(sol: StringSolution, n: int) -> CheckReport:
    """du/dt_n = d/dt_0 R_{n+1}[u], compared to degree D - 1."""
    if n not in sol.vars:
        raise ValueError(f"t{n} is not a variable of the solution")
    D, G = sol.truncation
    w = sol.work
    lhs = w.diff(n)
    rhs = substitute(lenard_R(n + 1), w, warn=False).diff(0)
    return _compare(f"KdV flow t{n}", lhs, rhs, D - 1, G)


def _closure(vars) -> tuple:
    top = max(vars)
    return tuple(range(top + 1))


def check_puncture(sol: StringSolution) -> CheckReport:
    """du/dt_0 = sum_k t_k du/dt_{k-1} + 1, compared to degree D - 1.

    When some t_{k-1} is not a variable of ``sol`` the equation cannot be
    read off the restricted solution; the string equation is then re-solved
    with all of t_1..t_M active and its restriction is checked against
    ``sol`` first."""
    D, G = sol.truncation
    w = sol.work
    notes = []
    closure = _closure(sol.vars)
    if set(sol.active) != set(closure[1:]):
        # every t_k with k <= max active must carry its flow
        full = solve_string(closure[1:], D, G)
        back = full.work.restrict(sol.vars)
        diff = back.first_difference(w, D, G)
        if diff is not None:
            return CheckReport("puncture", False, D, G, diff, ["restriction of closure solution differs"])
        notes.append("checked on t0..t%d closure" % max(sol.vars))
        w = full.work
    lhs = w.diff(0)
    rhs = TruncatedSeries.constant(1, w.vars, w.max_degree, w.max_genus, w.slack)
    for k in w.vars:
        if k >= 1:
            rhs = rhs + w.diff(k - 1).times_var(k)
    return _compare("puncture", lhs, rhs, D - 1, G, notes)


@dataclass
class FreeEnergyPart:
    """lambda^2 dF/dt_0 = sum_n (t_n - delta_{n1}) T_n[u], up to the
    t_0-independent datum F|_{t_0=0}, which is not computed."""

    dF_dt0: TruncatedSeries
    report: CheckReport


def reconstruct_dF(sol: StringSolution) -> FreeEnergyPart:
    D, G = sol.truncation
    w = sol.work
    total = TruncatedSeries.zero(w.vars, w.max_degree, w.max_genus, w.slack)
    for n in sorted(set(w.vars) | {1}):
        tn = substitute(compute_T(n), w, warn=False)
        if n in w.vars:
            total = total + tn.times_var(n)
        if n == 1:
            total = total - tn
    report = _compare("dF reconstruction", total.diff(0), w, D - 1, G)
    return FreeEnergyPart(total.truncate(D, G), report)


def check_fixed_point(sol: StringSolution) -> CheckReport:
    """One more application of the string map changes nothing."""
    D, G = sol.truncation
    again = _string_map(sol.work, sol.active, lenard_R)
    return _compare("fixed point", again, sol.work, D, G)


# -- correlators --------------------------------------------------------------


def _alpha_vector(sol: StringSolution, alpha) -> tuple:
    if isinstance(alpha, Mapping):
        vec = [0] * len(sol.vars)
        for t, e in alpha.items():
            vec[sol.u.index(int(t))] = int(e)
        return tuple(vec)
    vec = tuple(int(e) for e in alpha)
    if len(vec) != len(sol.vars):
        raise ValueError("exponent vector does not match the solution's variables")
    return vec


def intersection_coefficient(sol: StringSolution, g: int, alpha) -> Fraction:
    """<tau_0^2 prod_a tau_a^{alpha_a}>_g read off u = lambda^2 d^2F/dt_0^2.

    ``alpha`` is a mapping {time index: exponent} or a vector aligned with
    the solution's variables; the t_0 exponent counts extra tau_0's."""
    vec = _alpha_vector(sol, alpha)
    c = sol.u.coefficient(g, vec)
    return c * math.prod(math.factorial(e) for e in vec)


def correlator_label(sol_vars, g: int, alpha) -> str:
    counts = dict(zip(sol_vars, alpha))
    counts[0] = counts.get(0, 0) + 2
    parts = []
    for t in sorted(counts):
        e = counts[t]
        if e:
            parts.append(f"τ_{t}" if e == 1 else f"τ_{t}^{e}")
    return f"⟨{' '.join(parts)}⟩_{g}"


def correlators(sol: StringSolution):
    """All nonzero correlators (label, value) carried by the solution."""
    for (g, exp), _ in sorted(sol.u.coeffs.items(), key=lambda kv: (kv[0][0], sum(kv[0][1]), kv[0][1])):
        yield correlator_label(sol.vars, g, exp), intersection_coefficient(sol, g, exp)
