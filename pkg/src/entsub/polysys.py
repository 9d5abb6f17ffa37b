"""Exact multivariate polynomials over Q(i) and a Buchberger Groebner engine.

Coefficients are ``fractions.Fraction`` when real and :class:`GaussianRational`
otherwise; both support the field operations the engine needs, so every
computation here is exact.
"""
from __future__ import annotations

import dataclasses
import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .config import tolerances


class IrrationalEntryError(ValueError):
    """An amplitude could not be identified as a (Gaussian) rational."""


class NonHomogeneousError(ValueError):
    pass


class GroebnerLimitError(RuntimeError):
    """Buchberger exceeded the S-pair reduction cap."""


# ----------------------------------------------------------- Gaussian rationals

class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @staticmethod
    def _lift(x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational((self.re * o.re + self.im * o.im) / den,
                                (self.im * o.re - self.re * o.im) / den)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o / self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash(self.re) if not self.im else hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        if self.im:
            raise TypeError("Gaussian rational with nonzero imaginary part")
        return float(self.re)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return f"({self.re.numerator}/{self.re.denominator})+({self.im.numerator}/{self.im.denominator})i"


def _real_exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not amplitudes")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            raise IrrationalEntryError(f"non-finite entry {x!r}")
        f = Fraction(x).limit_denominator(10**6)
        if float(f) != x:
            raise IrrationalEntryError(f"{x!r} is not a small-denominator rational")
        return f
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def exact_scalar(x):
    """Exact field element for ``x``: ``Fraction`` if real, else ``GaussianRational``.

    Floats are accepted only when they are exactly a rational with denominator
    at most 10**6 (e.g. ``0.5``, ``1/3``); anything else raises
    :class:`IrrationalEntryError`.
    """
    if isinstance(x, GaussianRational):
        return x.re if not x.im else x
    if isinstance(x, (complex, np.complexfloating)):
        re_, im_ = _real_exact(x.real), _real_exact(x.imag)
        return re_ if not im_ else GaussianRational(re_, im_)
    return _real_exact(x)


def exact_matrix(m) -> np.ndarray:
    """Object array of exact scalars (any shape)."""
    a = np.asarray(m, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = exact_scalar(v)
    return out


def to_complex_array(m) -> np.ndarray:
    a = np.asarray(m, dtype=object)
    return np.vectorize(complex, otypes=[complex])(a) if a.size else a.astype(complex)


# ---------------------------------------------------------------- orders

@dataclasses.dataclass(frozen=True)
class MonomialOrder:
    kind: str = "grevlex"

    def __post_init__(self):
        if self.kind not in ("grevlex", "lex"):
            raise ValueError(f"unknown monomial order {self.kind!r}")

    def key(self, mon: tuple[int, ...]):
        if self.kind == "lex":
            return mon
        return (sum(mon), tuple(-e for e in reversed(mon)))


GREVLEX = MonomialOrder("grevlex")
LEX = MonomialOrder("lex")


# ---------------------------------------------------------------- polynomials

def _mon_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _mon_div(a, b):
    """``a / b`` if ``b`` divides ``a`` else None."""
    q = tuple(x - y for x, y in zip(a, b))
    return q if min(q, default=0) >= 0 else None


def _mon_divides(b, a):
    return all(y <= x for x, y in zip(a, b))


def _mon_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


class Polynomial:
    """Sparse polynomial: ``terms`` maps exponent tuples to nonzero coefficients."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms=None):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean = {}
        for mon, c in (terms or {}).items():
            mon = tuple(int(e) for e in mon)
            if len(mon) != n or min(mon, default=0) < 0:
                raise ValueError(f"bad exponent vector {mon} for {n} variables")
            c = exact_scalar(c)
            if c:
                clean[mon] = clean.get(mon, 0) + c
                if not clean[mon]:
                    del clean[mon]
        self.terms = clean

    @classmethod
    def _raw(cls, variables, terms):
        p = cls.__new__(cls)
        p.variables = variables
        p.terms = terms
        return p

    @classmethod
    def constant(cls, variables, c) -> "Polynomial":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def variable(cls, variables, name_or_index) -> "Polynomial":
        variables = tuple(variables)
        i = variables.index(name_or_index) if isinstance(name_or_index, str) else name_or_index
        mon = tuple(1 if j == i else 0 for j in range(len(variables)))
        return cls._raw(variables, {mon: Fraction(1)})

    def _check(self, other):
        if isinstance(other, Polynomial):
            if other.variables != self.variables:
                raise ValueError("polynomials over different variable lists")
            return other
        return Polynomial.constant(self.variables, other)

    def __add__(self, other):
        other = self._check(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m, 0) + c
            if v:
                t[m] = v
            else:
                t.pop(m, None)
        return Polynomial._raw(self.variables, t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.variables, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = exact_scalar(other)
            if not c:
                return Polynomial._raw(self.variables, {})
            return Polynomial._raw(self.variables, {m: v * c for m, v in self.terms.items()})
        other = self._check(other)
        t = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mon_mul(m1, m2)
                v = t.get(m, 0) + c1 * c2
                if v:
                    t[m] = v
                else:
                    t.pop(m, None)
        return Polynomial._raw(self.variables, t)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.variables == other.variables and self.terms == other.terms
        return self == self._check(other)

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(m) for m in self.terms}) <= 1

    def leading_monomial(self, order: MonomialOrder = GREVLEX):
        return max(self.terms, key=order.key)

    def leading_coefficient(self, order: MonomialOrder = GREVLEX):
        return self.terms[self.leading_monomial(order)]

    def monic(self, order: MonomialOrder = GREVLEX) -> "Polynomial":
        if not self.terms:
            return self
        lc = self.leading_coefficient(order)
        return Polynomial._raw(self.variables, {m: c / lc for m, c in self.terms.items()})

    def substitute(self, index: int, value) -> "Polynomial":
        """Set variable ``index`` to an exact value and drop it from the ring."""
        value = exact_scalar(value)
        variables = self.variables[:index] + self.variables[index + 1:]
        t = {}
        for m, c in self.terms.items():
            e = m[index]
            if e and not value:
                continue
            v = c * value ** e if e else c
            mm = m[:index] + m[index + 1:]
            v = t.get(mm, 0) + v
            if v:
                t[mm] = v
            else:
                t.pop(mm, None)
        return Polynomial._raw(variables, t)

    def evaluate(self, point: Sequence[complex]) -> complex:
        return sum(complex(c) * math.prod(complex(x) ** e for x, e in zip(point, m))
                   for m, c in self.terms.items())

    def dump(self, order: MonomialOrder = GREVLEX) -> str:
        """Debug text, e.g. ``(1/2)+(0/1)i * b1^2*b3``; not a stable format."""
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=order.key, reverse=True):
            c = self.terms[m]
            g = c if isinstance(c, GaussianRational) else GaussianRational(c, 0)
            mon = "*".join(v if e == 1 else f"{v}^{e}"
                           for v, e in zip(self.variables, m) if e)
            parts.append(str(g) + (f" * {mon}" if mon else ""))
        return " + ".join(parts)

    __str__ = dump

    def __repr__(self):
        return f"Polynomial({self.dump()})"


_TERM_RE = re.compile(r"^\(([-\d/]+)\)\+\(([-\d/]+)\)i(?: \* (.+))?$")


def parse_dump(text: str, variables: Sequence[str]) -> Polynomial:
    """Inverse of :meth:`Polynomial.dump` (debugging aid)."""
    variables = tuple(variables)
    terms = {}
    if text.strip() == "0":
        return Polynomial(variables)
    for chunk in text.split(" + "):
        mt = _TERM_RE.match(chunk.strip())
        if not mt:
            raise ValueError(f"cannot parse term {chunk!r}")
        c = exact_scalar(GaussianRational(Fraction(mt.group(1)), Fraction(mt.group(2))))
        mon = [0] * len(variables)
        if mt.group(3):
            for factor in mt.group(3).split("*"):
                name, _, exp = factor.partition("^")
                mon[variables.index(name)] += int(exp or 1)
        terms[tuple(mon)] = c
    return Polynomial(variables, terms)


# ---------------------------------------------------------------- reduction

class _Poly:
    """Internal monic polynomial with cached leading monomial."""

    __slots__ = ("lm", "terms")

    def __init__(self, terms, key):
        lm = max(terms, key=key)
        lc = terms[lm]
        if lc != 1:
            terms = {m: c / lc for m, c in terms.items()}
        self.lm = lm
        self.terms = terms


def _normal_form(f: dict, basis: Sequence[_Poly], key) -> dict:
    f = dict(f)
    rem = {}
    while f:
        m = max(f, key=key)
        c = f.pop(m)
        for g in basis:
            q = _mon_div(m, g.lm)
            if q is None:
                continue
            for mg, cg in g.terms.items():
                if mg == g.lm:
                    continue
                mm = _mon_mul(mg, q)
                v = f.get(mm, 0) - c * cg
                if v:
                    f[mm] = v
                else:
                    f.pop(mm, None)
            break
        else:
            rem[m] = c
    return rem


def _spoly(f: _Poly, g: _Poly) -> dict:
    lcm = _mon_lcm(f.lm, g.lm)
    qf, qg = _mon_div(lcm, f.lm), _mon_div(lcm, g.lm)
    out = {}
    for m, c in f.terms.items():
        out[_mon_mul(m, qf)] = c
    for m, c in g.terms.items():
        mm = _mon_mul(m, qg)
        v = out.get(mm, 0) - c
        if v:
            out[mm] = v
        else:
            out.pop(mm, None)
    return out


def _update(polys, G: set, B: set, ih: int):
    """Gebauer-Moeller installation of a new basis element ``ih``."""
    mh = polys[ih].lm
    C = sorted(G)
    D = []
    while C:
        ig = C.pop()
        mg = polys[ig].lm
        lcm_hg = _mon_lcm(mh, mg)
        coprime = _mon_mul(mh, mg) == lcm_hg
        if coprime or (
            not any(_mon_divides(_mon_lcm(mh, polys[i].lm), lcm_hg) for i in C)
            and not any(_mon_divides(_mon_lcm(mh, polys[j].lm), lcm_hg) for _, j in D)
        ):
            D.append((ih, ig))
    E = {(ih, ig) for ih_, ig in D
         if _mon_mul(mh, polys[ig].lm) != _mon_lcm(mh, polys[ig].lm)}
    B_new = set()
    for i1, i2 in B:
        m1, m2 = polys[i1].lm, polys[i2].lm
        lcm12 = _mon_lcm(m1, m2)
        if (not _mon_divides(mh, lcm12) or _mon_lcm(m1, mh) == lcm12
                or _mon_lcm(m2, mh) == lcm12):
            B_new.add((i1, i2))
    B_new |= E
    G_new = {ig for ig in G if not _mon_divides(mh, polys[ig].lm)}
    G_new.add(ih)
    return G_new, B_new


def _linear_interreduce(gens: Sequence[dict], key) -> list[dict]:
    """Reduced row echelon form of the generators viewed as coefficient rows.

    Spans the same ideal; leading monomials become distinct and no leading
    monomial appears in another generator, which keeps later coefficients
    small.
    """
    monos = sorted({m for g in gens for m in g}, key=key, reverse=True)
    rows = [dict(g) for g in gens if g]
    pivots: list[tuple[tuple, dict]] = []
    for m in monos:
        idx = next((i for i, r in enumerate(rows) if m in r), None)
        if idx is None:
            continue
        row = rows.pop(idx)
        inv = 1 / row[m]
        row = {mm: c * inv for mm, c in row.items()}
        for i, r in enumerate(rows):
            c = r.get(m)
            if c:
                for mm, v in row.items():
                    w = r.get(mm, 0) - c * v
                    if w:
                        r[mm] = w
                    else:
                        r.pop(mm, None)
        rows = [r for r in rows if r]
        for _, prow in pivots:
            c = prow.get(m)
            if c:
                for mm, v in row.items():
                    w = prow.get(mm, 0) - c * v
                    if w:
                        prow[mm] = w
                    else:
                        prow.pop(mm, None)
        pivots.append((m, row))
    return [r for _, r in pivots]


@dataclasses.dataclass
class GroebnerStats:
    spairs: int = 0
    unit: bool = False


def _groebner_raw(gens: Sequence[dict], key, nvars: int, stop_on_unit: bool,
                  cap: int | None, stats: GroebnerStats) -> list[_Poly]:
    cap = tolerances().spair_cap if cap is None else cap
    zero = (0,) * nvars
    unit = [_Poly({zero: Fraction(1)}, key)]
    polys: list[_Poly] = []
    G: set = set()
    B: set = set()

    def install(h):
        nonlocal G, B
        p = _Poly(h, key)
        polys.append(p)
        G, B = _update(polys, G, B, len(polys) - 1)
        return p

    for g in sorted(_linear_interreduce(gens, key), key=lambda g: key(max(g, key=key))):
        h = _normal_form(g, [polys[i] for i in sorted(G)], key)
        if h:
            if max(h, key=key) == zero:
                stats.unit = True
                if stop_on_unit:
                    return unit
            install(h)

    lcm_key = {}

    def pair_key(pr):
        k = lcm_key.get(pr)
        if k is None:
            k = lcm_key[pr] = (key(_mon_lcm(polys[pr[0]].lm, polys[pr[1]].lm)), pr)
        return k

    while B:
        pr = min(B, key=pair_key)
        B.remove(pr)
        stats.spairs += 1
        if stats.spairs > cap:
            raise GroebnerLimitError(f"exceeded {cap} S-pair reductions")
        h = _normal_form(_spoly(polys[pr[0]], polys[pr[1]]), [polys[i] for i in sorted(G)], key)
        if h:
            if max(h, key=key) == zero:
                stats.unit = True
                if stop_on_unit:
                    return unit
            install(h)

    # reduced basis
    basis = sorted((polys[i] for i in G), key=lambda p: key(p.lm))
    minimal = [p for i, p in enumerate(basis)
               if not any(_mon_divides(q.lm, p.lm) for j, q in enumerate(basis) if j != i)]
    out = []
    for i, p in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1:]
        tail = {m: c for m, c in p.terms.items() if m != p.lm}
        red = _normal_form(tail, others, key)
        red[p.lm] = Fraction(1)
        out.append(_Poly(red, key))
    if any(not any(p.lm) for p in out):
        stats.unit = True
        return unit
    return out


def _common_vars(polys: Sequence[Polynomial]) -> tuple[str, ...]:
    if not polys:
        raise ValueError("empty generator list")
    variables = polys[0].variables
    if any(p.variables != variables for p in polys):
        raise ValueError("all generators must share one variable list")
    return variables


def buchberger(gens: Sequence[Polynomial], order: MonomialOrder = GREVLEX,
               cap: int | None = None, stats: GroebnerStats | None = None) -> list[Polynomial]:
    """Reduced Groebner basis, monic, sorted by increasing leading monomial.

    Raises :class:`GroebnerLimitError` after ``cap`` S-pair reductions
    (default from :func:`entsub.config.tolerances`).
    """
    if not gens:
        return []
    variables = _common_vars(gens)
    stats = stats if stats is not None else GroebnerStats()
    raw = _groebner_raw([p.terms for p in gens], order.key, len(variables), False, cap, stats)
    if not any(p.terms for p in gens):
        return []
    return [Polynomial._raw(variables, dict(p.terms)) for p in raw]


def contains_unit(gens: Sequence[Polynomial], order: MonomialOrder = GREVLEX,
                  cap: int | None = None, stats: GroebnerStats | None = None) -> bool:
    """Whether 1 lies in the ideal, stopping as soon as a constant appears."""
    variables = _common_vars(gens)
    stats = stats if stats is not None else GroebnerStats()
    _groebner_raw([p.terms for p in gens], order.key, len(variables), True, cap, stats)
    return stats.unit


def reduce(p: Polynomial, basis: Sequence[Polynomial],
           order: MonomialOrder = GREVLEX) -> Polynomial:
    """Normal form of ``p`` modulo ``basis`` (multivariate division remainder)."""
    key = order.key
    internal = [_Poly(dict(g.terms), key) for g in basis if g.terms]
    return Polynomial._raw(p.variables, _normal_form(p.terms, internal, key))


def s_polynomial(f: Polynomial, g: Polynomial, order: MonomialOrder = GREVLEX) -> Polynomial:
    key = order.key
    return Polynomial._raw(f.variables, _spoly(_Poly(dict(f.terms), key), _Poly(dict(g.terms), key)))


def is_groebner_basis(basis: Sequence[Polynomial], order: MonomialOrder = GREVLEX) -> bool:
    """Buchberger criterion: every S-polynomial reduces to zero."""
    basis = [g for g in basis if g.terms]
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            if not reduce(s_polynomial(basis[i], basis[j], order), basis, order).is_zero():
                return False
    return True


# ---------------------------------------------------------------- projective roots

@dataclasses.dataclass
class ChartReport:
    """Outcome of the per-chart test; ``failing_chart`` names a chart with roots."""

    trivial_only: bool
    charts_checked: int
    failing_chart: str | None = None
    failing_basis: list[str] | None = None
    spairs: int = 0

    def summary(self) -> str:
        if self.trivial_only:
            return "{1} on all charts"
        return f"chart {self.failing_chart}: basis != {{1}}"


def analyze_charts(polys: Sequence[Polynomial], variables: Sequence[str] | None = None,
                   order: MonomialOrder = GREVLEX, cap: int | None = None,
                   keep_basis: bool = True) -> ChartReport:
    """Decide whether a homogeneous system has only the zero solution over C.

    For each variable ``v_k`` the chart ``v_k = 1`` is checked for
    inconsistency (Groebner basis {1}). The affine cone's only root is the
    origin iff every chart is inconsistent.
    """
    polys = [p for p in polys]
    if variables is None:
        variables = _common_vars(polys) if polys else ()
    variables = tuple(variables)
    for p in polys:
        if p.variables != variables:
            raise ValueError("polynomial variables do not match")
        if not p.is_homogeneous():
            raise NonHomogeneousError(f"non-homogeneous polynomial {p.dump()}")
    polys = [p for p in polys if p.terms]
    report = ChartReport(True, 0)
    for k, name in enumerate(variables):
        report.charts_checked += 1
        chart = [p.substitute(k, 1) for p in polys]
        chart = [q for q in chart if q.terms]
        stats = GroebnerStats()
        if chart and len(variables) == 1:
            unit = True  # nonzero constants only
        elif chart:
            unit = contains_unit(chart, order, cap, stats)
        else:
            unit = False
        report.spairs += stats.spairs
        if not unit:
            report.trivial_only = False
            report.failing_chart = f"{name}=1"
            if keep_basis and chart:
                report.failing_basis = [g.dump() for g in buchberger(chart, order, cap)]
            elif keep_basis:
                report.failing_basis = ["0"]
            return report
    return report


def only_trivial_root(polys: Sequence[Polynomial], variables: Sequence[str] | None = None,
                      order: MonomialOrder = GREVLEX, cap: int | None = None) -> bool:
    return analyze_charts(polys, variables, order, cap, keep_basis=False).trivial_only


def linear_form(variables: Sequence[str], coeffs: Iterable) -> Polynomial:
    n = len(variables)
    terms = {}
    for i, c in enumerate(coeffs):
        if c:
            terms[tuple(1 if j == i else 0 for j in range(n))] = c
    return Polynomial(tuple(variables), terms)
