"""Differential polynomials in one field u with exact rational coefficients.

A monomial is ``c * L^(2g) * u0^e0 * u1^e1 * ...`` where ``u_k`` stands for the
k-th x-derivative of u and ``L`` is the genus parameter lambda.  Only even
powers of lambda occur, so each monomial carries the integer genus ``g``.

The algebra is graded by degree (number of u-factors) and by weight (total
number of derivatives); ``dx`` preserves degree and raises weight by one.
"""

from __future__ import annotations

import heapq
import json
import random
import re
from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

Jet = tuple  # tuple of (order, exponent) pairs, sorted by order, exponents > 0
Key = tuple  # (genus, Jet)


class NotATotalDerivative(ValueError):
    """Raised when a differential polynomial has no antiderivative in A."""

    def __init__(self, poly: "DiffPoly", message: str | None = None):
        self.poly = poly
        super().__init__(message or f"not a total derivative: {poly}")


def _jet_from_mapping(mapping: Mapping[int, int]) -> Jet:
    items = []
    for k, e in mapping.items():
        k, e = int(k), int(e)
        if k < 0 or e < 0:
            raise ValueError(f"negative jet order or exponent: u{k}^{e}")
        if e:
            items.append((k, e))
    return tuple(sorted(items))


def jet_degree(jet: Jet) -> int:
    return sum(e for _, e in jet)


def jet_weight(jet: Jet) -> int:
    return sum(k * e for k, e in jet)


def _jet_mul(a: Jet, b: Jet) -> Jet:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


def _jet_vector(jet: Jet) -> tuple:
    if not jet:
        return ()
    vec = [0] * (jet[-1][0] + 1)
    for k, e in jet:
        vec[k] = e
    return tuple(vec)


def _sort_key(key: Key):
    # genus-major, then graded-lex (higher degree first, u0 > u1 > ...)
    g, jet = key
    return (g, -jet_degree(jet), tuple(-e for e in _jet_vector(jet)))


class DiffPoly:
    """Immutable element of A[lambda^2] in canonical sparse form."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Key, Fraction] | None = None):
        clean = {}
        if terms:
            for key, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[key] = c
        self._terms = {k: clean[k] for k in sorted(clean, key=_sort_key)}
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "DiffPoly":
        return cls()

    @classmethod
    def const(cls, c) -> "DiffPoly":
        return cls({(0, ()): Fraction(c)})

    @classmethod
    def monomial(cls, coeff=1, genus: int = 0, jet: Mapping[int, int] | None = None) -> "DiffPoly":
        if genus < 0:
            raise ValueError("genus must be non-negative")
        return cls({(genus, _jet_from_mapping(jet or {})): Fraction(coeff)})

    @classmethod
    def u(cls, k: int = 0, power: int = 1) -> "DiffPoly":
        """The jet variable u_k raised to ``power``."""
        return cls.monomial(1, 0, {k: power})

    # -- container protocol ----------------------------------------------
    def terms(self) -> Iterator[tuple[int, Jet, Fraction]]:
        for (g, jet), c in self._terms.items():
            yield g, jet, c

    def items(self):
        return self._terms.items()

    def coeff(self, genus: int = 0, jet: Mapping[int, int] | None = None) -> Fraction:
        return self._terms.get((genus, _jet_from_mapping(jet or {})), Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"DiffPoly({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    # -- ring operations ---------------------------------------------------
    @staticmethod
    def _coerce(other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return DiffPoly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return DiffPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return DiffPoly({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, DiffPoly):
            return NotImplemented
        out: dict = defaultdict(Fraction)
        for (g1, j1), c1 in self._terms.items():
            for (g2, j2), c2 in other._terms.items():
                out[(g1 + g2, _jet_mul(j1, j2))] += c1 * c2
        return DiffPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (Fraction(1) / Fraction(other))

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = DiffPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- grading -------------------------------------------------------------
    def genus_part(self, g: int) -> "DiffPoly":
        """The coefficient of lambda^(2g), still tagged with genus g."""
        return DiffPoly({k: c for k, c in self._terms.items() if k[0] == g})

    def genera(self) -> list[int]:
        return sorted({g for g, _ in self._terms})

    def max_genus(self) -> int:
        return max((g for g, _ in self._terms), default=0)

    def lower_genus(self, g: int) -> "DiffPoly":
        """Strip lambda^(2g) from every term (terms of smaller genus are dropped)."""
        return DiffPoly({(h - g, j): c for (h, j), c in self._terms.items() if h >= g})

    def raise_genus(self, g: int) -> "DiffPoly":
        """Multiply by lambda^(2g)."""
        return DiffPoly({(h + g, j): c for (h, j), c in self._terms.items()})

    def constant_term(self) -> Fraction:
        return Fraction(sum(c for (g, j), c in self._terms.items() if not j))

    def max_order(self) -> int:
        return max((j[-1][0] for (_, j) in self._terms if j), default=-1)

    # -- text format ---------------------------------------------------------
    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, ((g, jet), c) in enumerate(self._terms.items()):
            factors = [str(abs(c))]
            if g:
                factors.append(f"L^{2 * g}")
            for k, e in jet:
                factors.append(f"u{k}" if e == 1 else f"u{k}^{e}")
            body = "*".join(factors)
            if i == 0:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str) -> "DiffPoly":
        return parse(text)

    # -- JSON format ---------------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "terms": [
                {
                    "coeff": str(c),
                    "genus": g,
                    "jet": {str(k): e for k, e in jet},
                }
                for (g, jet), c in self._terms.items()
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "DiffPoly":
        terms: dict = defaultdict(Fraction)
        for t in obj["terms"]:
            genus = int(t.get("genus", 0))
            if genus < 0:
                raise ValueError("negative genus in JSON term")
            terms[(genus, _jet_from_mapping(t.get("jet", {})))] += Fraction(t["coeff"])
        return cls(terms)

    @classmethod
    def from_json(cls, text: str) -> "DiffPoly":
        return cls.from_json_obj(json.loads(text))


ONE = DiffPoly.const(1)
U = DiffPoly.u(0)


_TERM_RE = re.compile(r"\s*([+-])?\s*([^+-]+)")
_FACTOR_RE = re.compile(
    r"^(?:(?P<num>\d+(?:/\d+)?)|L\^(?P<lam>\d+)|L|u(?P<k>\d+)(?:\^(?P<e>\d+))?)$"
)


def parse(text: str) -> DiffPoly:
    """Parse the ``1/2*u0^2 + 1/12*L^2*u2`` text syntax."""
    s = text.strip()
    if not s:
        raise ValueError("empty polynomial text")
    if s == "0":
        return DiffPoly()
    terms: dict = defaultdict(Fraction)
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial at {s[pos:]!r}")
        sign, body = m.group(1), m.group(2).strip()
        if sign is None and not first:
            raise ValueError(f"missing operator before {body!r}")
        first = False
        coeff = Fraction(-1 if sign == "-" else 1)
        genus = 0
        jet: dict = defaultdict(int)
        for raw in body.split("*"):
            f = _FACTOR_RE.match(raw.strip())
            if not f:
                raise ValueError(f"bad factor {raw.strip()!r} in {body!r}")
            if f.group("num") is not None:
                coeff *= Fraction(f.group("num"))
            elif f.group("k") is not None:
                jet[int(f.group("k"))] += int(f.group("e") or 1)
            else:
                lam = int(f.group("lam") or 1)
                if lam % 2:
                    raise ValueError("odd powers of L are not representable")
                genus += lam // 2
        terms[(genus, _jet_from_mapping(jet))] += coeff
        pos = m.end()
    return DiffPoly(terms)


# -- operators ------------------------------------------------------------


def pd(p: DiffPoly, k: int) -> DiffPoly:
    """Formal partial derivative with respect to u_k."""
    if k < 0:
        raise ValueError("jet order must be non-negative")
    out: dict = defaultdict(Fraction)
    for (g, jet), c in p.items():
        d = dict(jet)
        e = d.get(k)
        if not e:
            continue
        if e == 1:
            del d[k]
        else:
            d[k] = e - 1
        out[(g, tuple(sorted(d.items())))] += c * e
    return DiffPoly(out)


def dx(p: DiffPoly, times: int = 1) -> DiffPoly:
    """Total x-derivative: sum_k u_{k+1} d/du_k, applied ``times`` times."""
    for _ in range(times):
        out: dict = defaultdict(Fraction)
        for (g, jet), c in p.items():
            d = dict(jet)
            for k, e in jet:
                nd = dict(d)
                if e == 1:
                    del nd[k]
                else:
                    nd[k] = e - 1
                nd[k + 1] = nd.get(k + 1, 0) + 1
                out[(g, tuple(sorted(nd.items())))] += c * e
        p = DiffPoly(out)
    return p


def var_delta(p: DiffPoly) -> DiffPoly:
    """Variational derivative sum_k (-1)^k dx^k (dp/du_k)."""
    result = DiffPoly()
    for k in range(p.max_order() + 1):
        term = dx(pd(p, k), k)
        result = result + term if k % 2 == 0 else result - term
    return result


def euler_lambda(p: DiffPoly) -> DiffPoly:
    """Apply (1 - lambda d/dlambda): the lambda^(2g) part is scaled by 1 - 2g."""
    return DiffPoly({(g, j): c * (1 - 2 * g) for (g, j), c in p.items()})


def half_lambda_dlambda(p: DiffPoly) -> DiffPoly:
    """Apply (1/2) lambda d/dlambda: the lambda^(2g) part is scaled by g."""
    return DiffPoly({(g, j): c * g for (g, j), c in p.items()})


def grading(p: DiffPoly) -> set[tuple[int, int, int]]:
    """Set of (genus, degree, weight) slots occupied by p."""
    return {(g, jet_degree(j), jet_weight(j)) for (g, j) in p._terms}


def homogeneous_parts(p: DiffPoly) -> dict[tuple[int, int, int], DiffPoly]:
    parts: dict = defaultdict(dict)
    for (g, j), c in p.items():
        parts[(g, jet_degree(j), jet_weight(j))][(g, j)] = c
    return {slot: DiffPoly(t) for slot, t in sorted(parts.items())}


# -- antiderivative --------------------------------------------------------


def slot_basis(degree: int, weight: int) -> list[Jet]:
    """All jets with the given degree and weight (partitions of weight
    into at most ``degree`` parts, zeros allowed)."""

    def parts(remaining_deg, remaining_wt, max_part):
        if remaining_deg == 0:
            if remaining_wt == 0:
                yield ()
            return
        # largest part first, bounded by max_part
        for top in range(min(max_part, remaining_wt), -1, -1):
            if top * remaining_deg < remaining_wt:
                break
            for rest in parts(remaining_deg - 1, remaining_wt - top, top):
                yield (top,) + rest

    out = []
    for orders in parts(degree, weight, weight):
        d: dict = defaultdict(int)
        for k in orders:
            d[k] += 1
        out.append(tuple(sorted(d.items())))
    return out


def _ibp_key(jet: Jet) -> tuple:
    # derivative orders listed in decreasing order; dx of a jet has a unique
    # largest term (raise the top order) and dx is monotone in this order
    return tuple(k for k, e in reversed(jet) for _ in range(e))


def _antiderivative_reduce(p: DiffPoly) -> DiffPoly:
    remaining = dict(p.items())
    # max-heap on (genus, degree, decreasing orders); within a (genus, degree)
    # block all order tuples have the same length, so negating is monotone
    heap = [_heap_key(k) for k in remaining]
    heapq.heapify(heap)
    q: dict = {}
    while heap:
        _, key = heapq.heappop(heap)
        c = remaining.pop(key, None)
        if not c:
            continue
        g, jet = key
        top, top_e = jet[-1]
        if top == 0 or top_e != 1:
            raise NotATotalDerivative(p)
        d = dict(jet)
        del d[top]
        d[top - 1] = d.get(top - 1, 0) + 1
        prev = tuple(sorted(d.items()))
        a = c / d[top - 1]
        q[(g, prev)] = q.get((g, prev), 0) + a
        # the u_{top-1} terms of dx(prev) rebuild the current key; every
        # other term sorts strictly below it
        for k, e in prev:
            if k == top - 1:
                continue
            nd = dict(prev)
            if e == 1:
                del nd[k]
            else:
                nd[k] = e - 1
            nd[k + 1] = nd.get(k + 1, 0) + 1
            kk = (g, tuple(sorted(nd.items())))
            if kk not in remaining:
                heapq.heappush(heap, _heap_key(kk))
                remaining[kk] = -a * e
            else:
                remaining[kk] -= a * e
    return DiffPoly(q)


def _heap_key(key: Key):
    g, jet = key
    return ((-g, -jet_degree(jet), tuple(-k for k in _ibp_key(jet))), key)


def _solve_exact(columns: list[dict], rhs: dict) -> list[Fraction] | None:
    """Solve sum_j x_j columns[j] = rhs exactly; None if inconsistent.

    Sparse Gauss-Jordan over Fraction.  Rows are indexed by arbitrary
    hashable keys."""
    n = len(columns)
    rows: dict = defaultdict(dict)
    for j, col in enumerate(columns):
        for r, v in col.items():
            rows[r][j] = Fraction(v)
    aug = {r: dict(row) for r, row in rows.items()}
    b = {r: Fraction(rhs.get(r, 0)) for r in set(rows) | set(rhs)}
    for r in b:
        aug.setdefault(r, {})
    pivots: dict[int, object] = {}
    used: set = set()
    for j in range(n):
        pivot_row = None
        for r in aug:
            if r in used:
                continue
            if aug[r].get(j):
                pivot_row = r
                break
        if pivot_row is None:
            continue
        pivots[j] = pivot_row
        used.add(pivot_row)
        pv = aug[pivot_row][j]
        prow = {jj: v / pv for jj, v in aug[pivot_row].items()}
        pb = b[pivot_row] / pv
        aug[pivot_row], b[pivot_row] = prow, pb
        for r in aug:
            if r == pivot_row:
                continue
            f = aug[r].get(j)
            if not f:
                continue
            row = aug[r]
            for jj, v in prow.items():
                nv = row.get(jj, 0) - f * v
                if nv:
                    row[jj] = nv
                else:
                    row.pop(jj, None)
            b[r] -= f * pb
    for r in aug:
        if r not in used and b[r]:
            return None
    x = [Fraction(0)] * n
    for j, r in pivots.items():
        x[j] = b[r]
    return x


def _antiderivative_linear(p: DiffPoly) -> DiffPoly:
    result = DiffPoly()
    for (g, deg, wt), part in homogeneous_parts(p).items():
        if wt == 0:
            raise NotATotalDerivative(p)
        basis = slot_basis(deg, wt - 1)
        columns = [dict(dx(DiffPoly({(g, jet): 1})).items()) for jet in basis]
        sol = _solve_exact(columns, dict(part.items()))
        if sol is None:
            raise NotATotalDerivative(p)
        result = result + DiffPoly({(g, jet): c for jet, c in zip(basis, sol)})
    return result


def antiderivative(p: DiffPoly, method: str = "reduce") -> DiffPoly:
    """Return q with dx(q) == p and zero constant term.

    ``method="linear"`` solves the exact linear system of dx on each finite
    (genus, degree, weight) slot; ``method="reduce"`` peels off leading
    terms by integration by parts.  Both raise NotATotalDerivative exactly
    when var_delta(p) != 0.
    """
    if p.constant_term():
        raise ValueError("antiderivative requires zero constant term")
    if method == "reduce":
        return _antiderivative_reduce(p)
    if method == "linear":
        return _antiderivative_linear(p)
    raise ValueError(f"unknown antiderivative method {method!r}")


# -- random generation -----------------------------------------------------


def random_poly(
    rng: random.Random,
    max_terms: int = 5,
    max_degree: int = 4,
    max_order: int = 4,
    max_genus: int = 2,
    max_num: int = 5,
    max_den: int = 4,
    degree: int | None = None,
    genus: int | None = None,
) -> DiffPoly:
    """Random polynomial with small rational coefficients.

    Fixing ``degree`` gives a homogeneous element of A_degree."""
    terms: dict = defaultdict(Fraction)
    for _ in range(rng.randint(1, max_terms)):
        d = degree if degree is not None else rng.randint(1, max_degree)
        jet: dict = defaultdict(int)
        for _ in range(d):
            jet[rng.randint(0, max_order)] += 1
        g = genus if genus is not None else rng.randint(0, max_genus)
        num = rng.randint(-max_num, max_num) or 1
        terms[(g, _jet_from_mapping(jet))] += Fraction(num, rng.randint(1, max_den))
    return DiffPoly(terms)


def from_terms(items: Iterable[tuple]) -> DiffPoly:
    """Build from (coeff, genus, {order: exponent}) triples."""
    out: dict = defaultdict(Fraction)
    for c, g, jet in items:
        out[(g, _jet_from_mapping(jet))] += Fraction(c)
    return DiffPoly(out)
