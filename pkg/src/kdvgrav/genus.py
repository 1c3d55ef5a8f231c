"""Genus expansion of the specific heat on the (t0, t2) plane.

With only t0 and t2 switched on the string equation reads

    u = t0 + t2 (u^2 / 2 + lambda^2 / 12 d^2u/dt0^2)

and its genus components have the closed form

    u_g = c_g t2^(3g-1) (1 - 2 t0 t2)^(-(5g-1)/2)  (+ 1/t2 when g = 0)

with c_0 = -1 and c_g = 2 a_g / 24^g, where a_n is OEIS A094199.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .series import TruncatedSeries

VARS = (0, 2)

# a_n ~ BETA * 50^(n-1) * ((n-1)!)^2
BETA = 5 * math.sqrt(15) / (2 * math.pi ** 2)
# c_n^(1/n) ~ ROOT_TARGET * n^2
ROOT_TARGET = 25 / (12 * math.e ** 2)


class InsufficientDepth(ValueError):
    """No divergence witness up to the requested depth."""


# -- the two coefficient recursions ------------------------------------------


def c_sequence(g_max: int) -> list[Fraction]:
    """c_g = 1/2 sum_{h=1}^{g-1} c_h c_{g-h} + (5g-4)(5g-6)/12 c_{g-1}, c_0 = -1."""
    c = [Fraction(-1)]
    for g in range(1, g_max + 1):
        conv = sum((c[h] * c[g - h] for h in range(1, g)), Fraction(0))
        c.append(conv / 2 + Fraction((5 * g - 4) * (5 * g - 6), 12) * c[g - 1])
    return c


@dataclass
class ASequence:
    """a_0 = -1/2 (a Fraction); a_n for n >= 1 are Python ints."""

    values: list

    def __getitem__(self, n: int):
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def c(self, g: int) -> Fraction:
        return Fraction(2 * self.values[g]) / 24 ** g

    def bfile(self) -> str:
        return "".join(f"{n} {self.values[n]}\n" for n in range(1, len(self.values)))


def a_sequence(n_max: int) -> ASequence:
    """a_n = sum_{k=1}^{n-1} a_k a_{n-k} + 2(5n-4)(5n-6) a_{n-1}, a_0 = -1/2."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    values: list = [Fraction(-1, 2)]
    if n_max >= 1:
        a1 = 2 * (5 - 4) * (5 - 6) * values[0]
        assert a1.denominator == 1
        values.append(int(a1))
    for n in range(2, n_max + 1):
        conv = sum(values[k] * values[n - k] for k in range(1, n))
        values.append(conv + 2 * (5 * n - 4) * (5 * n - 6) * values[n - 1])
    return ASequence(values)


# -- closed forms --------------------------------------------------------------


def _binom(p: Fraction, j: int) -> Fraction:
    out = Fraction(1)
    for i in range(j):
        out = out * (p - i) / (i + 1)
    return out


def _latex_power(base: str, e) -> str:
    e = str(e)
    return f"{base}^{e}" if len(e) == 1 else f"{base}^{{{e}}}"


@dataclass(frozen=True)
class GenusClosedForm:
    g: int
    c_g: Fraction
    t2_power: int
    s_power: Fraction  # exponent of s = 1 - 2 t0 t2
    extra: bool  # the 1/t2 term present only at g = 0

    def expand(self, D: int) -> TruncatedSeries:
        """Series in (t0, t2) to total degree D, tagged with genus g."""
        coeffs = {}
        j = 1 if self.extra else 0  # at g = 0 the j = 0 term cancels 1/t2
        while self.t2_power + 2 * j <= D:
            c = self.c_g * _binom(self.s_power, j) * (-2) ** j
            coeffs[(self.g, (j, self.t2_power + j))] = c
            j += 1
        return TruncatedSeries(VARS, D, self.g, coeffs)

    def to_latex(self) -> str:
        if self.g == 0:
            return "\\frac{1-(1-2t_0t_2)^{1/2}}{t_2}"
        c = self.c_g
        coeff = str(c) if c.denominator == 1 else f"\\frac{{{c.numerator}}}{{{c.denominator}}}"
        return f"{coeff} {_latex_power('t_2', self.t2_power)} {_latex_power('(1-2t_0t_2)', self.s_power)}"

    def to_text(self) -> str:
        if self.g == 0:
            return "(1 - (1-2*t0*t2)^(1/2)) / t2"
        return f"{self.c_g} * t2^{self.t2_power} * (1-2*t0*t2)^({self.s_power})"


def closed_form_ug(g: int, c: list[Fraction] | None = None) -> GenusClosedForm:
    if g < 0:
        raise ValueError("genus must be non-negative")
    c = c if c is not None and len(c) > g else c_sequence(g)
    return GenusClosedForm(
        g=g,
        c_g=c[g],
        t2_power=3 * g - 1,
        s_power=Fraction(-(5 * g - 1), 2),
        extra=g == 0,
    )


def closed_form_series(G: int, D: int, slack: int = 0) -> TruncatedSeries:
    """sum_{g <= G} lambda^{2g} u_g expanded; genus-h kept to D + slack (G - h)."""
    c = c_sequence(G)
    coeffs = {}
    for g in range(G + 1):
        coeffs.update(closed_form_ug(g, c).expand(D + slack * (G - g)).coeffs)
    return TruncatedSeries(VARS, D, G, coeffs, slack)


# -- the recursive solution ------------------------------------------------------


def _genus_zero_u0(D: int) -> TruncatedSeries:
    # u0 = t0 + t2 u0^2 / 2
    t0 = TruncatedSeries.variable(0, VARS, D, 0)
    u = t0
    for _ in range(D + 1):
        u = t0 + (u * u * Fraction(1, 2)).times_var(2)
    return u


def ug_by_recursion(g: int, D: int) -> TruncatedSeries:
    """u_g from u_g = t2/(1 - t2 u0) (1/2 sum u_h u_{g-h} + 1/12 d^2 u_{g-1}/dt0^2).

    Each genus step loses one degree (two derivatives, one factor t2), so
    the work runs at degree D + g and is cut back to D."""
    if g < 0 or D < 0:
        raise ValueError("g and D must be non-negative")
    W = D + g
    u = [_genus_zero_u0(W)]
    if g:
        one = TruncatedSeries.constant(1, VARS, W, 0)
        prefactor = (one - u[0].times_var(2)).inverse().times_var(2)
        for h in range(1, g + 1):
            conv = TruncatedSeries.zero(VARS, W, 0)
            for h1 in range(1, h):
                conv = conv + u[h1] * u[h - h1]
            inner = conv * Fraction(1, 2) + u[h - 1].diff(0, 2) * Fraction(1, 12)
            u.append(prefactor * inner)
    coeffs = {(g, exp): c for (_, exp), c in u[g].coeffs.items()}
    return TruncatedSeries(VARS, D, g, coeffs)


def check_restricted_string(G: int, D: int) -> tuple | None:
    """Plug the closed forms into u = t0 + t2 (u^2/2 + lambda^2/12 u'');
    return the first unbalanced coefficient or None."""
    u = closed_form_series(G, D, slack=1)
    rhs = TruncatedSeries.variable(0, VARS, D, G, 1) + (
        u * u * Fraction(1, 2) + u.diff(0, 2).shift_genus(1) * Fraction(1, 12)
    ).times_var(2)
    return rhs.first_difference(u, D, G)


# -- asymptotics ---------------------------------------------------------------


@dataclass
class AsymptoticsReport:
    """Float diagnostics derived from the exact a_n.

    ratios[n-1] = r_n = a_n / (50^(n-1) ((n-1)!)^2) and
    root_ratios[n-1] = rho_n = c_n^(1/n) / n^2, for n = 1..n_max."""

    n_max: int
    ratios: list[float]
    root_ratios: list[float]
    beta: float = BETA
    target: float = ROOT_TARGET
    tail_monotone: bool = False
    tail_start: int = 0

    def r(self, n: int) -> float:
        return self.ratios[n - 1]

    def rho(self, n: int) -> float:
        return self.root_ratios[n - 1]

    def step_deviation(self, n: int) -> float:
        """|r_{n+1}/r_n - 1|."""
        return abs(self.r(n + 1) / self.r(n) - 1)

    @property
    def beta_distance(self) -> float:
        return abs(self.r(self.n_max) / self.beta - 1)

    @property
    def root_distance(self) -> float:
        return abs(self.rho(self.n_max) / self.target - 1)

    def csv(self) -> str:
        rows = ["n,r_n,rho_n"]
        for n in range(1, self.n_max + 1):
            rows.append(f"{n},{self.r(n)!r},{self.rho(n)!r}")
        return "\n".join(rows) + "\n"


def asymptotics(n_max: int, seq: ASequence | None = None) -> AsymptoticsReport:
    if n_max < 5:
        raise ValueError("n_max must be at least 5")
    seq = seq if seq is not None and seq.n_max >= n_max else a_sequence(n_max)
    ratios, roots = [], []
    fact = 1
    for n in range(1, n_max + 1):
        if n > 1:
            fact *= n - 1
        a = seq[n]
        # exact ratio, rounded once
        ratios.append(float(Fraction(a, 50 ** (n - 1) * fact * fact)))
        log_c = math.log(2 * a) - n * math.log(24)
        roots.append(math.exp(log_c / n) / n ** 2)
    report = AsymptoticsReport(n_max, ratios, roots)
    tail = max(1, (3 * n_max) // 5)
    devs = [report.step_deviation(n) for n in range(tail, n_max)]
    report.tail_start = tail
    report.tail_monotone = all(b <= a for a, b in zip(devs, devs[1:]))
    return report


# -- divergence ----------------------------------------------------------------


@dataclass
class DivergenceVerdict:
    radius: Fraction
    point: tuple[Fraction, Fraction]
    witness: int
    method: str  # "exact" or "lower-bound"
    log10_term: float = field(default=0.0)

    def describe(self) -> str:
        t0, t2 = self.point
        return (
            f"radius {self.radius}: |lambda^(2n) u_n(t0={t0}, t2={t2})| > 1 at n = {self.witness} "
            f"({self.method}; log10 of term >= {self.log10_term:.3f})"
        )


def _ilog(x: int) -> float:
    return math.log(x) if x > 0 else float("-inf")


def divergence_certificate(
    R,
    n_max: int = 10000,
    t0=0,
    t2=1,
    exact_limit: int = 200,
) -> DivergenceVerdict:
    """Find n <= n_max with |u_n(t0, t2)| R^(2n) > 1.

    u_n(t0, t2) = c_n t2^(3n-1) s^(-(5n-1)/2) with s = 1 - 2 t0 t2, so the
    inequality is decided exactly in squared form
        4 a_n^2 t2^(6n-2) R^(4n) > 576^n s^(5n-1).
    a_n is used exactly for n <= exact_limit; beyond that the lower bound
    a_n >= (2 + 2(5n-4)(5n-6)) a_{n-1} (valid for n >= 3, all a_k > 0) keeps
    the check O(n).
    """
    # floats go through their shortest repr, so 0.1 means 1/10
    R, t0, t2 = (Fraction(repr(v)) if isinstance(v, float) else Fraction(v) for v in (R, t0, t2))
    if R <= 0:
        raise ValueError("radius must be positive")
    if t2 == 0:
        raise ValueError("t2 must be nonzero")
    s = 1 - 2 * t0 * t2
    if s <= 0:
        raise ValueError("need 1 - 2 t0 t2 > 0")
    t2a = abs(t2)
    exact_limit = max(exact_limit, 2)  # the lower bound needs n >= 3
    exact = a_sequence(min(exact_limit, n_max)) if n_max >= 1 else None
    # per-step factors of the squared inequality, as integer fractions
    step_num = t2a.numerator ** 6 * R.numerator ** 4 * s.denominator ** 5
    step_den = 576 * t2a.denominator ** 6 * R.denominator ** 4 * s.numerator ** 5
    # the n-independent corrections t2^-2 and s^-(-1) = s
    num = 4 * t2a.denominator ** 2 * s.numerator
    den = t2a.numerator ** 2 * s.denominator
    a = 0
    for n in range(1, n_max + 1):
        num *= step_num
        den *= step_den
        if n <= exact_limit:
            a = exact[n]
            method = "exact"
        else:
            a = (2 + 2 * (5 * n - 4) * (5 * n - 6)) * a
            method = "lower-bound"
        lhs_log = 2 * _ilog(a) + _ilog(num)
        rhs_log = _ilog(den)
        if lhs_log - rhs_log > -1e-6 and a * a * num > den:
            return DivergenceVerdict(R, (t0, t2), n, method, (lhs_log - rhs_log) / (2 * math.log(10)))
    raise InsufficientDepth(f"no witness with n <= {n_max} for radius {R}; raise n_max")
