"""Lie-valued expressions over a partial bracket table.

Basis elements are generator names (``str``) or formal brackets, stored as
ordered pairs ``(a, b)`` of basis elements with ``key(a) < key(b)``.  Brackets
that the table does not resolve stay formal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .scalar import AssumptionSet, Decision, ParamRational, ScalarExpr, _sx, is_zero, render_term


def basis_key(b):
    if isinstance(b, str):
        return (0, _natural(b))
    return (1, basis_key(b[0]), basis_key(b[1]))


def _natural(name: str):
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return (head, int(tail) if tail else -1, name)


def render_basis(b) -> str:
    if isinstance(b, str):
        return b
    return f"[{render_basis(b[0])}, {render_basis(b[1])}]"


def ordered_pair(a, b):
    """Canonical ``(pair, sign)`` with ``[a, b] = sign * [pair]``; ``None`` pair when a == b."""
    if a == b:
        return None, 0
    if basis_key(a) < basis_key(b):
        return (a, b), 1
    return (b, a), -1


class LieExpr:
    """Finite combination ``sum coeff * basis`` with :class:`ScalarExpr` coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        self._terms = {k: _sx(v) for k, v in (terms or {}).items() if not _sx(v).is_zero()}
        self._hash = None

    @classmethod
    def generator(cls, name: str, coeff=1) -> "LieExpr":
        return cls({name: _sx(coeff)})

    @classmethod
    def formal(cls, a, b) -> "LieExpr":
        pair, sign = ordered_pair(a, b)
        if pair is None:
            return cls()
        return cls({pair: ScalarExpr.const(sign)})

    @classmethod
    def zero(cls) -> "LieExpr":
        return cls()

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: basis_key(kv[0]))

    def basis(self) -> list:
        return sorted(self._terms, key=basis_key)

    def coefficient(self, b) -> ScalarExpr:
        return self._terms.get(b, ScalarExpr())

    def is_zero(self) -> bool:
        return not self._terms

    def generators(self) -> set:
        out = set()

        def walk(b):
            if isinstance(b, str):
                out.add(b)
            else:
                walk(b[0])
                walk(b[1])

        for b in self._terms:
            walk(b)
        return out

    def has_formal(self) -> bool:
        return any(not isinstance(b, str) for b in self._terms)

    def __add__(self, other) -> "LieExpr":
        if not isinstance(other, LieExpr):
            if other == 0:
                return self
            return NotImplemented
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out[k] + v if k in out else v
        return LieExpr(out)

    __radd__ = __add__

    def __neg__(self) -> "LieExpr":
        return LieExpr({k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "LieExpr":
        return self + (-other)

    def scale(self, c) -> "LieExpr":
        c = _sx(c)
        return LieExpr({k: v * c for k, v in self._terms.items()})

    def __mul__(self, c) -> "LieExpr":
        if isinstance(c, LieExpr):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "LieExpr":
        return self.scale(_sx(1) / _sx(c))

    def map_coefficients(self, fn) -> "LieExpr":
        return LieExpr({k: fn(v) for k, v in self._terms.items()})

    def diff(self, c) -> "LieExpr":
        return self.map_coefficients(lambda v: v.diff(c))

    def total_diff(self, direction: str) -> "LieExpr":
        return self.map_coefficients(lambda v: v.total_diff(direction))

    def apply(self, assumptions) -> "LieExpr":
        return self.map_coefficients(lambda v: v.apply(assumptions))

    def subs_params(self, mapping) -> "LieExpr":
        return self.map_coefficients(lambda v: v.subs_params(mapping))

    def coordinates(self) -> frozenset:
        out = frozenset()
        for v in self._terms.values():
            out |= v.coordinates()
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        return isinstance(other, LieExpr) and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"LieExpr({self.render()!r})"

    def render(self) -> str:
        if not self._terms:
            return "0"
        out = ""
        for i, (b, c) in enumerate(self.items()):
            name = render_basis(b)
            if c.is_monomial():
                text = render_term(*c.as_term())
                neg = text.startswith("-")
                text = text[1:] if neg else text
                body = name if text == "1" else f"{text}*{name}"
            else:
                neg = False
                body = f"({c.render()})*{name}"
            if i == 0:
                out = ("-" if neg else "") + body
            else:
                out += (" - " if neg else " + ") + body
        return out

    __str__ = render


def lie(value) -> LieExpr:
    if isinstance(value, LieExpr):
        return value
    if isinstance(value, str):
        return LieExpr.generator(value)
    if value == 0:
        return LieExpr()
    raise TypeError(f"cannot interpret {value!r} as a Lie expression")


class RelationTable:
    """Partial bracket table ``[a, b] = rhs`` keyed on canonical ordered pairs."""

    def __init__(self, entries: Mapping | Iterable = (), name: str = ""):
        self.name = name
        self._entries: dict = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for (a, b), rhs in items:
            self.set(a, b, rhs)

    def set(self, a, b, rhs) -> None:
        pair, sign = ordered_pair(a, b)
        if pair is None:
            raise ValueError(f"[{render_basis(a)}, {render_basis(a)}] is zero by antisymmetry")
        rhs = lie(rhs)
        if pair in rhs._terms:
            raise ValueError(f"relation for {render_basis(pair)} refers to itself")
        self._entries[pair] = rhs if sign > 0 else -rhs

    def entries(self) -> list:
        return sorted(self._entries.items(), key=lambda kv: basis_key(kv[0]))

    def lookup(self, pair):
        return self._entries.get(pair)

    def copy(self, name: str | None = None) -> "RelationTable":
        t = RelationTable(name=self.name if name is None else name)
        t._entries = dict(self._entries)
        return t

    def merged(self, other: "RelationTable", name: str | None = None) -> "RelationTable":
        t = self.copy(name)
        for pair, rhs in other._entries.items():
            t._entries[pair] = rhs
        return t

    def generators(self) -> list:
        out = set()
        for pair, rhs in self._entries.items():
            out |= LieExpr({pair: 1}).generators() | rhs.generators()
        return sorted(out, key=_natural)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, RelationTable) and self._entries == other._entries

    def render(self) -> list[str]:
        return [f"{render_basis(pair)} = {rhs.render()}" for pair, rhs in self.entries()]


EMPTY_TABLE = RelationTable()


def _basis_bracket(a, b, table: RelationTable, depth: int = 0) -> LieExpr:
    pair, sign = ordered_pair(a, b)
    if pair is None:
        return LieExpr()
    rhs = table.lookup(pair)
    if rhs is None:
        return LieExpr({pair: ScalarExpr.const(sign)})
    return resolve(rhs, table, depth + 1).scale(sign)


def resolve(e: LieExpr, table: RelationTable, depth: int = 0) -> LieExpr:
    """Rewrite formal brackets that the table can evaluate."""
    if depth > 64:
        raise RecursionError("bracket table does not terminate")
    if not e.has_formal():
        return e
    out = LieExpr()
    for b, c in e.items():
        if isinstance(b, str):
            out = out + LieExpr({b: c})
        else:
            left = resolve(lie_basis(b[0]), table, depth + 1)
            right = resolve(lie_basis(b[1]), table, depth + 1)
            out = out + _bracket(left, right, table, depth + 1).scale(c)
    return out


def lie_basis(b) -> LieExpr:
    return LieExpr({b: ScalarExpr.const(1)})


def _bracket(a: LieExpr, b: LieExpr, table: RelationTable, depth: int) -> LieExpr:
    out: dict = {}
    for ba, ca in a._terms.items():
        for bb, cb in b._terms.items():
            br = _basis_bracket(ba, bb, table, depth)
            if br.is_zero():
                continue
            coeff = ca * cb
            for k, v in br._terms.items():
                out[k] = out[k] + v * coeff if k in out else v * coeff
    return LieExpr(out)


def bracket(a, b, table: RelationTable | None = None) -> LieExpr:
    """Bilinear bracket, resolving through ``table`` and leaving unknown pairs formal."""
    return _bracket(lie(a), lie(b), table or EMPTY_TABLE, 0)


@dataclass
class JacobiAudit:
    violations: list = field(default_factory=list)    # (triple, residual)
    undecidable: list = field(default_factory=list)   # (triple, residual with formal brackets)

    @property
    def consistent(self) -> bool:
        return not self.violations


def jacobiator(x, y, z, table: RelationTable) -> LieExpr:
    return (bracket(x, bracket(y, z, table), table)
            + bracket(y, bracket(z, x, table), table)
            + bracket(z, bracket(x, y, table), table))


def jacobi_audit(table: RelationTable, gens: Iterable[str] | None = None,
                 assumptions: AssumptionSet | None = None) -> JacobiAudit:
    gens = sorted(gens if gens is not None else table.generators(), key=_natural)
    report = JacobiAudit()
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            for k in range(j + 1, len(gens)):
                triple = (gens[i], gens[j], gens[k])
                r = jacobiator(*triple, table).apply(assumptions)
                if r.is_zero():
                    continue
                if r.has_formal():
                    report.undecidable.append((triple, r))
                else:
                    report.violations.append((triple, r))
    return report


class Realization:
    """Substitution of generators by Lie expressions; must be acyclic."""

    def __init__(self, mapping: Mapping[str, LieExpr], name: str = ""):
        self.name = name
        self.mapping = {g: lie(v) for g, v in mapping.items()}
        self._order = self._check_acyclic()

    def _check_acyclic(self) -> list:
        order, state = [], {}

        def visit(g, path):
            if state.get(g) == 1:
                raise ValueError("cyclic realization: " + " -> ".join(path + [g]))
            if state.get(g) == 2 or g not in self.mapping:
                return
            state[g] = 1
            for h in sorted(self.mapping[g].generators(), key=_natural):
                visit(h, path + [g])
            state[g] = 2
            order.append(g)

        for g in sorted(self.mapping, key=_natural):
            visit(g, [])
        return order

    def closure(self) -> dict:
        """Fully substituted images, so that no mapped generator remains on a right side."""
        done: dict = {}
        for g in self._order:
            done[g] = _substitute_generators(self.mapping[g], done, None)
        return done

    def mapped(self) -> set:
        return set(self.mapping)


def _substitute_generators(e: LieExpr, images: Mapping[str, LieExpr], table) -> LieExpr:
    out = LieExpr()
    for b, c in e.items():
        out = out + _substitute_basis(b, images, table).scale(c)
    return out


def _substitute_basis(b, images, table) -> LieExpr:
    if isinstance(b, str):
        return images.get(b, lie_basis(b))
    left = _substitute_basis(b[0], images, table)
    right = _substitute_basis(b[1], images, table)
    if table is None:
        if left == lie_basis(b[0]) and right == lie_basis(b[1]):
            return lie_basis(b)
        return bracket(left, right, EMPTY_TABLE)
    return bracket(left, right, table)


@dataclass
class RealizedTable:
    table: RelationTable
    checks: list          # (pair, lhs image, rhs image, satisfied)

    @property
    def satisfied(self) -> bool:
        return all(ok for *_, ok in self.checks)


def realize_table(table: RelationTable, r: Realization, assumptions: AssumptionSet | None = None) -> RealizedTable:
    """Push a table through a realization.

    Relations between unmapped basis elements survive (with substituted right
    sides); every relation touching a mapped generator becomes a check.
    """
    images = r.closure()
    kept = RelationTable(name=table.name)
    touched = []
    for pair, rhs in table.entries():
        if lie_basis(pair).generators() & set(images):
            touched.append((pair, rhs))
        else:
            kept._entries[pair] = _substitute_generators(rhs, images, None)
    for pair in list(kept._entries):
        kept._entries[pair] = resolve(_substitute_generators(kept._entries[pair], images, kept), kept).apply(assumptions)
    checks = []
    for pair, rhs in touched:
        lhs_img = _substitute_basis(pair, images, kept).apply(assumptions)
        rhs_img = resolve(_substitute_generators(rhs, images, kept), kept).apply(assumptions)
        diff = lhs_img - rhs_img
        checks.append((pair, lhs_img, rhs_img, _lie_is_zero(diff, assumptions)))
    return RealizedTable(kept, checks)


def _lie_is_zero(e: LieExpr, assumptions) -> bool:
    return all(is_zero(c, assumptions) == Decision.YES for _, c in e.items())


def apply_realization(e, r: Realization, table: RelationTable | None = None,
                      assumptions: AssumptionSet | None = None):
    """Apply ``r`` to a :class:`LieExpr` (brackets re-expanded in ``table``) or to a table."""
    if isinstance(e, RelationTable):
        return realize_table(e, r, assumptions).table
    realized = realize_table(table, r, assumptions).table if table is not None else EMPTY_TABLE
    images = r.closure()
    return resolve(_substitute_generators(lie(e), images, realized), realized).apply(assumptions)


def proportional(a: LieExpr, b: LieExpr, assumptions: AssumptionSet | None = None):
    """Return ``k`` with ``a = k * b`` and ``k`` provably nonzero, else ``None``."""
    assumptions = assumptions or AssumptionSet()
    a, b = a.apply(assumptions), b.apply(assumptions)
    if a.is_zero() or b.is_zero():
        return ParamRational.of(1) if a.is_zero() and b.is_zero() else None
    if set(a._terms) != set(b._terms):
        return None
    first = b.basis()[0]
    ca, cb = a.coefficient(first), b.coefficient(first)
    if not cb.is_monomial():
        return None
    k = ca / cb
    if (a - b.scale(k)).apply(assumptions).is_zero():
        kc = k.as_constant()
        if kc is not None and assumptions.nonzero(kc):
            return kc
    return None
