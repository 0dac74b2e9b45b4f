"""Exact scalar ring: parameters, coordinates, jets and parameter-valued powers.

A :class:`ScalarExpr` is a finite sum of terms ``coeff * prod(c ** e)`` where
``coeff`` and every exponent ``e`` are :class:`ParamRational` values, i.e.
rational functions of the symbolic parameters with exact rational
coefficients.  Zero testing is structural on a canonical normal form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Union

from sympy import QQ
from sympy.polys.rings import ring as _sympy_ring

INDEPENDENT = ("x", "t")
MAX_JET_ORDER = 3


class CaseSplitError(ValueError):
    """Raised when a decision depends on parameter values not fixed by the assumptions."""

    def __init__(self, message: str, differences: Iterable["ParamRational"] = ()):
        self.differences = tuple(differences)
        if self.differences:
            message += ": " + ", ".join(d.render() for d in self.differences)
        super().__init__(message)


class JetOrderError(ValueError):
    def __init__(self, coordinate: str):
        self.coordinate = coordinate
        super().__init__(f"jet order exceeds {MAX_JET_ORDER} when differentiating {coordinate}")


class UnsupportedSubstitution(ValueError):
    pass


class Decision(str, enum.Enum):
    YES = "yes"
    NO = "no"
    AMBIGUOUS = "ambiguous"


# --------------------------------------------------------------------------
# polynomials in the parameters

def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for name, k in b:
        d[name] = d.get(name, 0) + k
    return tuple(sorted(d.items()))


def _mono_key(mono: tuple):
    return (sum(k for _, k in mono), mono)


class Poly:
    """Sparse multivariate polynomial over Q; monomials are sorted ``((name, exp), ...)``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None):
        self._terms = {k: v if type(v) is Fraction else Fraction(v) for k, v in (terms or {}).items() if v}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Poly":
        """Trusted constructor for arithmetic results whose values are already Fractions."""
        p = cls.__new__(cls)
        p._terms = {k: v for k, v in terms.items() if v}
        p._hash = None
        return p

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): Fraction(c)})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({((name, 1),): Fraction(1)})

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def is_const(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    def const_value(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def variables(self) -> frozenset:
        return frozenset(name for mono in self._terms for name, _ in mono)

    def degree_in(self, name: str) -> int:
        return max((dict(m).get(name, 0) for m in self._terms), default=0)

    def lead(self):
        mono = max(self._terms, key=_mono_key)
        return mono, self._terms[mono]

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out[k] + v if k in out else v
        return Poly._raw(out)

    def __neg__(self) -> "Poly":
        return Poly._raw({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        out: dict = {}
        for ka, va in self._terms.items():
            for kb, vb in other._terms.items():
                k = _mono_mul(ka, kb)
                out[k] = out[k] + va * vb if k in out else va * vb
        return Poly._raw(out)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        return Poly._raw({k: v * c for k, v in self._terms.items()})

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            # Fraction.__hash__ takes a modular inverse; hash the integer pair instead
            self._hash = hash(frozenset((k, v.numerator, v.denominator) for k, v in self._terms.items()))
        return self._hash

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for mono, c in self._terms.items():
            v = c
            for name, k in mono:
                v *= Fraction(values[name]) ** k
            total += v
        return total

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda kv: (-_mono_key(kv[0])[0], kv[0]))

    def render(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            body = "*".join(n if k == 1 else f"{n}^{k}" for n, k in mono)
            mag = abs(c)
            if not body:
                s = _frac_str(mag)
            elif mag == 1:
                s = body
            else:
                s = f"{_frac_str(mag)}*{body}"
            parts.append(("-" if c < 0 else "+", s))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, s in parts[1:]:
            out += f" {sign} {s}"
        return out


POLY_ONE = Poly.const(1)


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


@lru_cache(maxsize=None)
def _ring(gens: tuple):
    R, *_ = _sympy_ring(",".join(gens), QQ)
    return R


def _to_sympy(p: Poly, gens: tuple):
    R = _ring(gens)
    index = {g: i for i, g in enumerate(gens)}
    data = {}
    for mono, c in p.items():
        expv = [0] * len(gens)
        for name, k in mono:
            expv[index[name]] = k
        data[tuple(expv)] = QQ(c.numerator, c.denominator)
    return R.from_dict(data) if data else R.zero


def _from_sympy(pe, gens: tuple) -> Poly:
    out = {}
    for expv, c in pe.terms():
        mono = tuple((gens[i], k) for i, k in enumerate(expv) if k)
        out[mono] = Fraction(int(c.numerator), int(c.denominator))
    return Poly(out)


@lru_cache(maxsize=1 << 14)
def _cancel(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    gens = tuple(sorted(num.variables() | den.variables()))
    p, q = _to_sympy(num, gens).cancel(_to_sympy(den, gens))
    return _from_sympy(p, gens), _from_sympy(q, gens)


@lru_cache(maxsize=4096)
def _irreducible_factors(p: Poly) -> tuple[Poly, ...]:
    """Monic irreducible factors of a non-constant polynomial."""
    gens = tuple(sorted(p.variables()))
    _, factors = _to_sympy(p, gens).factor_list()
    out = []
    for f, _ in factors:
        fp = _from_sympy(f, gens)
        if fp.is_const():
            continue
        _, lc = fp.lead()
        out.append(fp.scale(1 / lc))
    return tuple(out)


class ParamRational:
    """Rational function of parameters in canonical form (reduced, monic denominator)."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly | None = None, _normalized: bool = False):
        if den is None:
            den = POLY_ONE
        if not _normalized:
            num, den = self._normalize(num, den)
        self.num = num
        self.den = den
        self._hash = None

    @staticmethod
    def _normalize(num: Poly, den: Poly):
        if den.is_zero():
            raise ZeroDivisionError("parameter expression with zero denominator")
        if num.is_zero():
            return Poly(), POLY_ONE
        if den.is_const():
            return num.scale(1 / den.const_value()), POLY_ONE
        num, den = _cancel(num, den)
        if den.is_const():
            return num.scale(1 / den.const_value()), POLY_ONE
        _, lc = den.lead()
        return num.scale(1 / lc), den.scale(1 / lc)

    @classmethod
    def of(cls, value) -> "ParamRational":
        if isinstance(value, ParamRational):
            return value
        if isinstance(value, str):
            return cls(Poly.var(value), _normalized=True)
        return cls(Poly.const(Fraction(value)), _normalized=True)

    # arithmetic -----------------------------------------------------------
    def _den_one(self) -> bool:
        return self.den.is_const()

    def __add__(self, other) -> "ParamRational":
        other = _pr(other)
        if other is NotImplemented:
            return other
        if self._den_one() and other._den_one():
            return ParamRational(self.num + other.num, _normalized=True)
        # adding a polynomial keeps a reduced fraction reduced: gcd(a + p*b, b) = gcd(a, b)
        if other._den_one():
            return ParamRational(self.num + other.num * self.den, self.den,
                                 _normalized=True)
        if self._den_one():
            return other + self
        if self.den == other.den:
            return ParamRational(self.num + other.num, self.den)
        return ParamRational(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "ParamRational":
        return ParamRational(-self.num, self.den, _normalized=True)

    def __sub__(self, other) -> "ParamRational":
        other = _pr(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "ParamRational":
        return _pr(other) - self

    def __mul__(self, other) -> "ParamRational":
        other = _pr(other)
        if other is NotImplemented:
            return other
        if self._den_one() and other._den_one():
            return ParamRational(self.num * other.num, _normalized=True)
        # a nonzero constant factor keeps a reduced fraction reduced
        for a, b in ((self, other), (other, self)):
            if b._den_one() and b.num.is_const():
                c = b.num.const_value()
                return ParamRational(a.num.scale(c) if c else Poly(), a.den if c else POLY_ONE, _normalized=True)
        return ParamRational(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ParamRational":
        other = _pr(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by zero parameter expression")
        return ParamRational(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "ParamRational":
        return _pr(other) / self

    def __pow__(self, k: int) -> "ParamRational":
        if k < 0:
            return ParamRational.of(1) / (self ** (-k))
        return ParamRational(self.num ** k, self.den ** k, _normalized=self._den_one())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamRational):
            other = _pr(other)
            if other is NotImplemented:
                return False
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __repr__(self) -> str:
        return f"ParamRational({self.render()!r})"

    # queries -------------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self.render()} is not constant")
        return self.num.const_value()

    def is_integer(self) -> bool:
        return self.is_constant() and self.value().denominator == 1

    def is_nonneg_integer(self) -> bool:
        return self.is_integer() and self.value() >= 0

    def variables(self) -> frozenset:
        return self.num.variables() | self.den.variables()

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        d = self.den.evaluate(values)
        if d == 0:
            raise ZeroDivisionError(f"denominator {self.den.render()} vanishes")
        return self.num.evaluate(values) / d

    def subs(self, mapping: Mapping[str, "ParamRational"]) -> "ParamRational":
        if not (self.variables() & mapping.keys()):
            return self
        return _poly_subs(self.num, mapping) / _poly_subs(self.den, mapping)

    def sort_key(self):
        return (tuple(sorted(self.num.items())), tuple(sorted(self.den.items())))

    def is_simple(self) -> bool:
        """Single term, no denominator: prints without parentheses."""
        return self._den_one() and len(self.num._terms) <= 1

    def negative_lead(self) -> bool:
        return not self.num.is_zero() and self.num.sorted_terms()[0][1] < 0

    def render(self) -> str:
        num, den = self.num, self.den
        if self._den_one():
            k = _lcm_denominators(num)
            if k == 1 or len(num._terms) < 2:
                return num.render()
            return f"({num.scale(k).render()})/{k}"
        k = _lcm_denominators(den)
        g = math.gcd(*(int(c * k) for _, c in den.items()))
        num, den = num.scale(Fraction(k, g)), den.scale(Fraction(k, g))
        k = _lcm_denominators(num)
        num, den = num.scale(k), den.scale(k)
        n = num.render()
        d = den.render()
        if len(self.den._terms) > 1 or "*" in d or "^" in d:
            d = f"({d})"
        if len(num._terms) > 1:
            n = f"({n})"
        return f"{n}/{d}"


def _lcm_denominators(p: Poly) -> int:
    return math.lcm(*(c.denominator for _, c in p.items())) if p._terms else 1


def _poly_subs(p: Poly, mapping) -> ParamRational:
    total = ParamRational.of(0)
    for mono, c in p.items():
        term = ParamRational.of(c)
        for name, k in mono:
            base = mapping.get(name)
            term = term * (base ** k if base is not None else ParamRational.of(name) ** k)
        total = total + term
    return total


def _pr(value):
    if isinstance(value, ParamRational):
        return value
    if isinstance(value, (int, Fraction)):
        return ParamRational.of(value)
    return NotImplemented


ZERO = ParamRational.of(0)
ONE = ParamRational.of(1)


def param(name: str) -> ParamRational:
    return ParamRational.of(name)


@dataclass(frozen=True)
class Parameter:
    name: str
    flags: frozenset = frozenset()

    @property
    def nonzero(self) -> bool:
        return "nonzero" in self.flags


# --------------------------------------------------------------------------
# coordinates

@dataclass(frozen=True)
class Coordinate:
    """A chart coordinate.

    ``kind`` is ``base``, ``jet`` (``base`` names the differentiated coordinate and
    ``index`` the multi-index, x's before t's) or ``aux`` (a named composite base
    ``definition = ((coord, coeff), ...)`` meaning ``sum coeff * coord``).
    """

    name: str
    kind: str = "base"
    base: str = ""
    index: str = ""
    definition: tuple = ()

    @classmethod
    def jet(cls, base: str, index: str) -> "Coordinate":
        index = "x" * index.count("x") + "t" * index.count("t")
        if len(index) > MAX_JET_ORDER:
            raise JetOrderError(f"{base}_{index}")
        return cls(f"{base}_{index}", "jet", base, index)

    @classmethod
    def aux(cls, definition: Mapping[str, Fraction], name: str | None = None) -> "Coordinate":
        items = tuple((c, Fraction(v)) for c, v in definition.items() if v)
        if len(items) < 2:
            raise ValueError("an auxiliary coordinate needs at least two base coordinates")
        if name is None:
            name = "(" + _render_linear(items) + ")"
        return cls(name, "aux", definition=items)

    @property
    def order(self) -> int:
        return len(self.index)

    def aux_coefficient(self, base: str) -> Fraction:
        for name, c in self.definition:
            if name == base:
                return c
        return Fraction(0)

    def __hash__(self) -> int:
        # equal coordinates share a name; str hashes are cached, Fraction hashes are not
        return hash(self.name)

    def __repr__(self) -> str:
        return f"Coordinate({self.name!r})"


def _render_linear(items) -> str:
    out = ""
    for i, (name, c) in enumerate(items):
        mag = abs(c)
        body = name if mag == 1 else f"{_frac_str(mag)}*{name}"
        if i == 0:
            out = ("-" if c < 0 else "") + body
        else:
            out += (" - " if c < 0 else " + ") + body
    return out


def coord(name: str) -> Coordinate:
    return Coordinate(name)


# --------------------------------------------------------------------------
# scalar expressions

def _ck(item):
    return item[0].name


@lru_cache(maxsize=1 << 16)
def _key_mul(k1: tuple, k2: tuple) -> tuple:
    if not k1:
        return k2
    if not k2:
        return k1
    d = dict(k1)
    for c, e in k2:
        if c in d:
            s = d[c] + e
            if s.is_zero():
                del d[c]
            else:
                d[c] = s
        else:
            d[c] = e
    return tuple(sorted(d.items(), key=_ck))


def _raw_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = _key_mul(ka, kb)
            out[k] = out[k] + va * vb if k in out else va * vb
    return out


def _raw_add_into(acc: dict, key: tuple, coeff: ParamRational) -> None:
    if key in acc:
        acc[key] = acc[key] + coeff
    else:
        acc[key] = coeff


def _integer_offset(e: "ParamRational", r: "ParamRational"):
    """``k`` with ``e = r + k`` for an integer ``k``, else None.

    Both are reduced with monic denominators, and adding an integer keeps the
    denominator, so only ``e.num - r.num = k * den`` needs checking.
    """
    if e.den != r.den:
        return None
    diff = e.num - r.num
    if diff.is_zero():
        return 0
    mono, c = diff.lead()
    dc = r.den._terms.get(mono)
    if dc is None:
        return None
    k = c / dc
    if k.denominator != 1 or diff != r.den.scale(k):
        return None
    return int(k)


@lru_cache(maxsize=1 << 14)
def _exponent_classes(exponents: frozenset) -> dict:
    """Map each exponent to the least member of its class modulo integer constants.

    The class of integer exponents always contains 0, so nonnegative integer
    powers are expanded completely.
    """
    reps: list = [ZERO]
    low: dict = {ZERO: 0}
    of: dict = {}
    for e in sorted(exponents, key=lambda x: x.render()):
        for r in reps:
            k = _integer_offset(e, r)
            if k is not None:
                of[e] = (r, k)
                low[r] = min(low[r], k)
                break
        else:
            reps.append(e)
            low[e] = 0
            of[e] = (e, 0)
    return {e: (r + low[r] if low[r] else r) for e, (r, _) in of.items()}


def _rewrite_aux(terms: dict) -> dict:
    """Normal form for expressions containing an auxiliary coordinate.

    For ``xi = lc*u + ...`` the powers of the lead base ``u`` are grouped in
    classes modulo integers; every power ``u^(r + k)`` with ``r`` the least
    exponent of its class is written ``u^r * (xi/lc - ...)^k``.  Afterwards each
    class carries one power of ``u`` times a polynomial in the auxiliary and
    the other coordinates, whose monomials are independent functions, so a
    difference is zero exactly when its normal form is empty.
    """
    auxes = {c for key in terms for c, _ in key if c.kind == "aux"}
    for a in sorted(auxes, key=lambda c: c.name):
        lead, lc = a.definition[0]
        lead_c = Coordinate(lead)
        repl = {((a, ONE),): ParamRational.of(1 / lc)}
        for name, c in a.definition[1:]:
            repl[((Coordinate(name), ONE),)] = ParamRational.of(-c / lc)
        exps = [dict(key).get(lead_c, ZERO) for key in terms]
        least = _exponent_classes(frozenset(exps))
        if all(least[e] == e for e in exps):
            continue
        powers = {0: {(): ONE}}
        out: dict = {}
        for (key, coeff), e in zip(terms.items(), exps):
            r = least[e]
            if r == e:
                _raw_add_into(out, key, coeff)
                continue
            d = dict(key)
            if r.is_zero():
                d.pop(lead_c, None)
            else:
                d[lead_c] = r
            k = int((e - r).value())
            while k not in powers:
                top = max(powers)
                powers[top + 1] = _raw_mul(powers[top], repl)
            rest = _raw_mul({tuple(sorted(d.items(), key=_ck)): coeff}, powers[k])
            for k, v in rest.items():
                _raw_add_into(out, k, v)
        terms = {k: v for k, v in out.items() if not v.is_zero()}
    return terms


class Term(NamedTuple):
    coeff: ParamRational
    powers: tuple  # ((Coordinate, ParamRational exponent), ...) sorted by name

    def exponent(self, c: Coordinate) -> ParamRational:
        for v, e in self.powers:
            if v == c:
                return e
        return ZERO


Scalarish = Union["ScalarExpr", ParamRational, int, Fraction]


class ScalarExpr:
    """Immutable sum of terms with distinct power maps."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple, ParamRational] | None = None):
        t = {k: v for k, v in (terms or {}).items() if not v.is_zero()}
        if any(c.kind == "aux" for key in t for c, _ in key):
            t = _rewrite_aux(t)
        self._terms = t
        self._hash = None

    # constructors --------------------------------------------------------
    @classmethod
    def const(cls, value) -> "ScalarExpr":
        v = ParamRational.of(value)
        return cls({(): v}) if not v.is_zero() else cls()

    @classmethod
    def of(cls, value) -> "ScalarExpr":
        if isinstance(value, ScalarExpr):
            return value
        if isinstance(value, Coordinate):
            return cls.power(value, ONE)
        return cls.const(value)

    @classmethod
    def power(cls, c: Coordinate, exponent=1, coeff=1) -> "ScalarExpr":
        e = ParamRational.of(exponent)
        key = ((c, e),) if not e.is_zero() else ()
        return cls({key: ParamRational.of(coeff)})

    @classmethod
    def from_term(cls, term: Term) -> "ScalarExpr":
        return cls({tuple(sorted(term.powers, key=_ck)): term.coeff})

    # structure -----------------------------------------------------------
    def items(self):
        return self._terms.items()

    def terms(self) -> list[Term]:
        return [Term(v, k) for k, v in sorted(self._terms.items(), key=lambda kv: _term_key(kv[0]))]

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def as_term(self) -> Term:
        if len(self._terms) != 1:
            raise ValueError("expression is not a single term")
        (k, v), = self._terms.items()
        return Term(v, k)

    def as_constant(self) -> ParamRational | None:
        if not self._terms:
            return ZERO
        if len(self._terms) == 1 and () in self._terms:
            return self._terms[()]
        return None

    def is_constant(self) -> bool:
        return self.as_constant() is not None

    def coordinates(self) -> frozenset:
        return frozenset(c for key in self._terms for c, _ in key)

    def effective_coordinates(self) -> frozenset:
        """Non-auxiliary coordinates plus the bases of any auxiliary coordinates."""
        out = set()
        for c in self.coordinates():
            if c.kind == "aux":
                out.update(Coordinate(name) for name, _ in c.definition)
            else:
                out.add(c)
        return frozenset(out)

    def parameters(self) -> frozenset:
        out = set()
        for key, v in self._terms.items():
            out |= v.variables()
            for _, e in key:
                out |= e.variables()
        return frozenset(out)

    def exponent(self, c: Coordinate) -> ParamRational:
        if len(self._terms) != 1:
            raise ValueError("exponent() needs a single term")
        return self.as_term().exponent(c)

    # arithmetic ------------------------------------------------------------
    def __add__(self, other) -> "ScalarExpr":
        other = _sx(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for k, v in other._terms.items():
            _raw_add_into(out, k, v)
        return ScalarExpr(out)

    __radd__ = __add__

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr({k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "ScalarExpr":
        other = _sx(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "ScalarExpr":
        return _sx(other) - self

    def __mul__(self, other) -> "ScalarExpr":
        other = _sx(other)
        if other is NotImplemented:
            return other
        return ScalarExpr(_raw_mul(self._terms, other._terms))

    __rmul__ = __mul__

    def inverse(self) -> "ScalarExpr":
        if len(self._terms) != 1:
            raise ZeroDivisionError("only single-term expressions are invertible")
        (k, v), = self._terms.items()
        return ScalarExpr({tuple((c, -e) for c, e in k): ONE / v})

    def __truediv__(self, other) -> "ScalarExpr":
        other = _sx(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other) -> "ScalarExpr":
        return _sx(other) * self.inverse()

    def __pow__(self, exponent) -> "ScalarExpr":
        e = ParamRational.of(exponent)
        if e.is_nonneg_integer():
            out = ScalarExpr.const(1)
            for _ in range(int(e.value())):
                out = out * self
            return out
        if len(self._terms) != 1:
            raise UnsupportedSubstitution("non-integer power of a sum needs an auxiliary coordinate")
        (k, v), = self._terms.items()
        if e.is_integer():
            coeff = v ** int(e.value())
        elif v == ONE:
            coeff = ONE
        else:
            raise UnsupportedSubstitution(f"cannot raise coefficient {v.render()} to {e.render()}")
        return ScalarExpr({tuple((c, x * e) for c, x in k): coeff})

    def __eq__(self, other) -> bool:
        other = _sx(other)
        if other is NotImplemented:
            return False
        return self._terms == other._terms

    def equals(self, other) -> bool:
        """Semantic equality.

        ``==`` compares representations, and an expression only rewrites
        powers of a lead base once its auxiliary coordinate is present, so
        ``u`` and ``(u - q) + q`` differ structurally.  The difference of the
        two contains the auxiliary and therefore reduces to zero.
        """
        return (self - _sx(other)).is_zero()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"ScalarExpr({self.render()!r})"

    # calculus ----------------------------------------------------------------
    def diff(self, c: Coordinate) -> "ScalarExpr":
        """Partial derivative; auxiliary coordinates contribute through their definitions."""
        out: dict = {}
        for key, coeff in self._terms.items():
            for i, (v, e) in enumerate(key):
                if v == c:
                    factor = ONE
                elif v.kind == "aux" and c.kind == "base":
                    f = v.aux_coefficient(c.name)
                    if not f:
                        continue
                    factor = ParamRational.of(f)
                else:
                    continue
                ne = e - ONE
                rest = key[:i] + (((v, ne),) if not ne.is_zero() else ()) + key[i + 1:]
                _raw_add_into(out, rest, coeff * e * factor)
        return ScalarExpr(out)

    def total_diff(self, direction: str) -> "ScalarExpr":
        if direction not in INDEPENDENT:
            raise ValueError(f"unknown direction {direction!r}")
        result = ScalarExpr()
        for c in sorted(self.effective_coordinates(), key=lambda c: c.name):
            part = self.diff(c)
            if part.is_zero():
                continue
            result = result + part * _total_of_coordinate(c, direction)
        return result

    def subst(self, target: Coordinate, replacement) -> "ScalarExpr":
        """Replace every ``target**e`` by ``replacement**e`` for a single-term replacement."""
        if isinstance(replacement, Term):
            replacement = ScalarExpr.from_term(replacement)
        replacement = _sx(replacement)
        if replacement is NotImplemented or len(replacement) != 1:
            raise UnsupportedSubstitution("replacement must be a single power-product term")
        if target in replacement.coordinates():
            raise UnsupportedSubstitution(f"{target.name} occurs in its own replacement")
        out = ScalarExpr()
        for key, coeff in self._terms.items():
            d = dict(key)
            e = d.pop(target, None)
            rest = ScalarExpr({tuple(sorted(d.items(), key=_ck)): coeff})
            out = out + (rest if e is None else rest * replacement ** e)
        return out

    def substitute(self, target: Coordinate, expr) -> "ScalarExpr":
        """Replace ``target`` by an arbitrary expression (integer exponents are expanded)."""
        expr = _sx(expr)
        if expr.is_monomial():
            return self.subst(target, expr)
        out = ScalarExpr()
        for key, coeff in self._terms.items():
            d = dict(key)
            e = d.pop(target, None)
            rest = ScalarExpr({tuple(sorted(d.items(), key=_ck)): coeff})
            if e is None:
                out = out + rest
            elif e.is_nonneg_integer():
                out = out + rest * expr ** e
            else:
                raise UnsupportedSubstitution(f"{target.name}^({e.render()}) with a multi-term replacement")
        return out

    def subs_params(self, mapping: Mapping[str, ParamRational]) -> "ScalarExpr":
        if not mapping:
            return self
        out: dict = {}
        for key, coeff in self._terms.items():
            nk = []
            for c, e in key:
                ne = e.subs(mapping)
                if not ne.is_zero():
                    nk.append((c, ne))
            _raw_add_into(out, tuple(nk), coeff.subs(mapping))
        return ScalarExpr(out)

    def apply(self, assumptions: "AssumptionSet | None") -> "ScalarExpr":
        if assumptions is None:
            return self
        return self.subs_params(assumptions.substitution)

    # rendering -----------------------------------------------------------
    def sort_key(self):
        return tuple((_term_key(k), v.sort_key()) for k, v in sorted(self._terms.items(), key=lambda kv: _term_key(kv[0])))

    def render(self) -> str:
        if not self._terms:
            return "0"
        pieces = [render_term(t.coeff, t.powers) for t in self.terms()]
        out = pieces[0]
        for p in pieces[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    __str__ = render


def _term_key(key: tuple):
    return tuple((c.name, e.sort_key()) for c, e in key)


def render_power(c: Coordinate, e: ParamRational) -> str:
    if e == ONE:
        return c.name
    if e.is_integer() and e.value() > 0:
        return f"{c.name}^{e.value()}"
    return f"{c.name}^({e.render()})"


def coefficient_text(coeff: ParamRational) -> tuple[bool, str]:
    """Sign and magnitude text of a coefficient, safe to juxtapose with ``*``."""
    neg = coeff.negative_lead()
    mag = -coeff if neg else coeff
    text = mag.render()
    if mag._den_one() and len(mag.num._terms) > 1:
        text = f"({text})"
    return neg, text


def render_term(coeff: ParamRational, powers: tuple) -> str:
    body = "*".join(render_power(c, e) for c, e in powers)
    neg, text = coefficient_text(coeff)
    sign = "-" if neg else ""
    if not body:
        return sign + text
    if text == "1":
        return sign + body
    return f"{sign}{text}*{body}"


def _sx(value):
    if isinstance(value, ScalarExpr):
        return value
    if isinstance(value, (int, Fraction, ParamRational)):
        return ScalarExpr.const(value)
    if isinstance(value, Coordinate):
        return ScalarExpr.power(value)
    return NotImplemented


def _total_of_coordinate(c: Coordinate, direction: str) -> ScalarExpr:
    if c.name == direction:
        return ScalarExpr.const(1)
    if c.name in INDEPENDENT:
        return ScalarExpr()
    if c.kind == "base":
        return ScalarExpr.power(Coordinate.jet(c.name, direction))
    if c.kind == "jet":
        if c.order >= MAX_JET_ORDER:
            raise JetOrderError(c.name)
        return ScalarExpr.power(Coordinate.jet(c.base, c.index + direction))
    raise ValueError(f"cannot differentiate through {c.name}")


# --------------------------------------------------------------------------
# assumptions

@dataclass(frozen=True)
class AssumptionSet:
    """Equalities (``expr = 0``) applied as substitutions, then disequalities (``expr != 0``).

    ``solve_for`` optionally names, per equality, the parameter to eliminate.
    """

    equalities: tuple = ()
    disequalities: tuple = ()
    nonzero_params: frozenset = frozenset()
    solve_for: tuple = ()

    def __post_init__(self):
        both = set(self.equalities) & set(self.disequalities)
        if both:
            raise ValueError("expression both = 0 and != 0: " + ", ".join(b.render() for b in both))

    @classmethod
    def empty(cls) -> "AssumptionSet":
        return cls()

    def merged(self, other: "AssumptionSet | None") -> "AssumptionSet":
        if other is None:
            return self
        return AssumptionSet(
            self.equalities + other.equalities,
            self.disequalities + other.disequalities,
            self.nonzero_params | other.nonzero_params,
            _pad(self.solve_for, len(self.equalities)) + _pad(other.solve_for, len(other.equalities)),
        )

    def with_equality(self, expr: ParamRational, solve_for: str | None = None) -> "AssumptionSet":
        return AssumptionSet(self.equalities + (expr,), self.disequalities, self.nonzero_params,
                             _pad(self.solve_for, len(self.equalities)) + (solve_for,))

    def with_disequality(self, expr: ParamRational) -> "AssumptionSet":
        return AssumptionSet(self.equalities, self.disequalities + (expr,), self.nonzero_params, self.solve_for)

    @property
    def substitution(self) -> dict:
        return _solve_equalities(self.equalities, _pad(self.solve_for, len(self.equalities)))

    def apply(self, value: ParamRational) -> ParamRational:
        return value.subs(self.substitution)

    @property
    def _known_nonzero(self) -> frozenset:
        return _nonzero_factors(self)

    def nonzero(self, value: ParamRational) -> bool:
        """True if ``value`` is provably nonzero under these assumptions."""
        v = self.apply(value)
        if v.is_zero():
            return False
        if v.num.is_const():
            return True
        known = self._known_nonzero
        return all(f in known for f in _irreducible_factors(v.num))

    def decide(self, value: ParamRational) -> Decision:
        v = self.apply(value)
        if v.is_zero():
            return Decision.YES
        return Decision.NO if self.nonzero(v) else Decision.AMBIGUOUS


def _pad(t: tuple, n: int) -> tuple:
    return tuple(t) + (None,) * (n - len(t))


@lru_cache(maxsize=512)
def _solve_equalities(equalities: tuple, solve_for: tuple) -> dict:
    subst: dict = {}
    for eq, pref in zip(equalities, solve_for):
        v = eq.subs(subst)
        if v.is_zero():
            continue
        p = v.num
        candidates = []
        for name in sorted(p.variables()):
            if p.degree_in(name) != 1:
                continue
            coef = Poly({tuple(x for x in m if x[0] != name): c for m, c in p.items() if dict(m).get(name) == 1})
            if coef.is_const():
                candidates.append((name, coef.const_value()))
        if not candidates:
            continue
        chosen = next((c for c in candidates if c[0] == pref), candidates[-1])
        name, a = chosen
        rest = Poly({m: c for m, c in p.items() if dict(m).get(name, 0) == 0})
        value = ParamRational(rest.scale(-1 / a))
        subst = {k: x.subs({name: value}) for k, x in subst.items()}
        subst[name] = value
    return subst


@lru_cache(maxsize=512)
def _nonzero_factors(a: AssumptionSet) -> frozenset:
    subst = a.substitution
    known = set()
    for name in a.nonzero_params:
        v = ParamRational.of(name).subs(subst)
        if not v.num.is_const():
            known.update(_irreducible_factors(v.num))
    for d in a.disequalities:
        v = d.subs(subst)
        if not v.num.is_const():
            known.update(_irreducible_factors(v.num))
    return frozenset(known)


# --------------------------------------------------------------------------
# module-level operations

def add(a: Scalarish, b: Scalarish) -> ScalarExpr:
    return _sx(a) + _sx(b)


def mul(a: Scalarish, b: Scalarish) -> ScalarExpr:
    return _sx(a) * _sx(b)


def diff(e: ScalarExpr, c: Coordinate) -> ScalarExpr:
    return _sx(e).diff(c)


def total_diff(e: ScalarExpr, direction: str) -> ScalarExpr:
    return _sx(e).total_diff(direction)


def subst(e: ScalarExpr, target: Coordinate, replacement) -> ScalarExpr:
    return _sx(e).subst(target, replacement)


def exponents_distinct(e1: ParamRational, e2: ParamRational, a: AssumptionSet) -> Decision:
    """YES if provably different, NO if equal, AMBIGUOUS otherwise."""
    d = a.decide(e1 - e2)
    return {Decision.YES: Decision.NO, Decision.NO: Decision.YES}.get(d, Decision.AMBIGUOUS)


def is_zero(e: ScalarExpr, a: AssumptionSet | None = None) -> Decision:
    a = a or AssumptionSet()
    e = _sx(e).apply(a)
    if e.is_zero():
        return Decision.YES
    keys = list(e._terms)
    for key in keys:
        if not a.nonzero(e._terms[key]):
            continue
        if all(_keys_distinct(key, other, a) for other in keys if other is not key):
            return Decision.NO
    return Decision.AMBIGUOUS


def _keys_distinct(k1: tuple, k2: tuple, a: AssumptionSet) -> bool:
    d1, d2 = dict(k1), dict(k2)
    for c in set(d1) | set(d2):
        if a.nonzero(d1.get(c, ZERO) - d2.get(c, ZERO)):
            return True
    return False


def partition_exponents(exponents: Iterable[ParamRational], a: AssumptionSet) -> list[ParamRational]:
    """Distinct representatives, raising :class:`CaseSplitError` on undecided equalities."""
    reps: list[ParamRational] = []
    undecided = []
    for e in exponents:
        e = a.apply(e)
        if any(e == r for r in reps):
            continue
        for r in reps:
            if not a.nonzero(e - r):
                undecided.append(e - r)
        reps.append(e)
    if undecided:
        raise CaseSplitError("exponent equality undecided", _unique(undecided))
    return sorted(reps, key=lambda r: r.sort_key())


def _unique(values):
    seen = []
    for v in values:
        if v not in seen and -v not in seen:
            seen.append(v)
    return seen


def group_by_power(e: ScalarExpr, c: Coordinate, a: AssumptionSet | None = None) -> list[tuple[ParamRational, ScalarExpr]]:
    a = a or AssumptionSet()
    e = _sx(e).apply(a)
    split: dict = {}
    for key, coeff in e._terms.items():
        d = dict(key)
        exp = d.pop(c, ZERO)
        rest = tuple(sorted(d.items(), key=_ck))
        split.setdefault(exp, {})
        _raw_add_into(split[exp], rest, coeff)
    reps = partition_exponents(split, a)
    return [(r, ScalarExpr(split[r])) for r in reps]
