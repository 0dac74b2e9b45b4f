"""Line-oriented ``.eds`` format: parser and renderer.

Statements (one per line, ``#`` starts a comment)::

    system NAME
    param IDENT [nonzero] [integer] [= expr]
    assume expr != 0 | expr = 0
    coord IDENT ...          |  coord IDENT = linear-expr
    generator IDENT ...
    table NAME
    bracket [A, B] = lie-expr
    form NAME = form-expr
    connection NAME : A = expr ; B = expr [; table = NAME]
    realize NAME : Xi -> lie-expr, ...
    conservation NAME : g = (expr, ...) [; omega = form-expr]
    backlund NAME : F = expr ; G = expr
    case NAME : expr = expr, expr != expr, ...
    relations NAME : lie-expr = lie-expr, ...

``^`` is the scalar power and ``/\\`` the wedge.  ``d(.)``, ``Dx(.)`` and
``Dt(.)`` are the exterior and total derivatives; ``[a, b]`` is a formal
bracket.  A parenthesized linear combination of coordinates raised to a
non-integer (or explicit first) power becomes an auxiliary coordinate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .exterior import BASIS_ORDER, DifferentialForm, ExteriorSystem, coord_key, d, wedge
from .liealg import LieExpr, Realization, RelationTable, bracket, ordered_pair, render_basis
from .scalar import (_render_linear, AssumptionSet, Coordinate, JetOrderError, ParamRational, Parameter, ScalarExpr,
                     UnsupportedSubstitution)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"line {line}, column {col}: {message}" if line else message)


_TOKEN = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>/\\|->|!=|[-+*/^()\[\],=;:])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    col: int


def tokenize(text: str, line: int = 0, offset: int = 0) -> list:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, offset + pos + 1)
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, m.group(), offset + pos + 1))
        pos = m.end()
    out.append(Token("end", "", offset + len(text) + 1))
    return out


@dataclass
class SystemFile:
    name: str = ""
    parameters: dict = field(default_factory=dict)        # name -> Parameter
    definitions: dict = field(default_factory=dict)       # param name -> ParamRational
    assumptions: list = field(default_factory=list)       # (ParamRational, "=" | "!=", solve_for)
    coordinates: list = field(default_factory=list)
    aux: dict = field(default_factory=dict)               # name -> Coordinate
    generators: list = field(default_factory=list)        # Lie generator names
    forms: dict = field(default_factory=dict)             # ordered, name -> DifferentialForm
    tables: dict = field(default_factory=dict)            # name -> RelationTable
    connections: dict = field(default_factory=dict)       # name -> (A, B, table name | None)
    realizations: dict = field(default_factory=dict)      # name -> Realization
    conservations: dict = field(default_factory=dict)     # name -> (tuple of ScalarExpr, form | None)
    backlunds: dict = field(default_factory=dict)         # name -> (F, G)
    cases: dict = field(default_factory=dict)             # name -> list of (ParamRational, op, solve_for)
    relations: dict = field(default_factory=dict)         # name -> list of LieExpr (each = 0)

    # -- derived objects ------------------------------------------------
    def assumption_set(self, facts=None) -> AssumptionSet:
        facts = self.assumptions if facts is None else facts
        eqs, solve, dis = [], [], []
        for name, value in self.definitions.items():
            eqs.append(ParamRational.of(name) - value)
            solve.append(name)
        for expr, op, pref in facts:
            if op == "=":
                eqs.append(expr)
                solve.append(pref)
            else:
                dis.append(expr)
        nonzero = frozenset(n for n, p in self.parameters.items() if p.nonzero)
        return AssumptionSet(tuple(eqs), tuple(dis), nonzero, tuple(solve))

    def case(self, name: str) -> AssumptionSet:
        if name not in self.cases:
            raise KeyError(f"unknown case {name!r}")
        facts = self.cases[name]
        eqs = tuple(e for e, op, _ in facts if op == "=")
        return AssumptionSet(eqs, tuple(e for e, op, _ in facts if op == "!="),
                             frozenset(), tuple(p for _, op, p in facts if op == "="))

    def system(self) -> ExteriorSystem:
        return ExteriorSystem(self.name, tuple(self.coordinates), list(self.forms.items()),
                              dict(self.parameters), self.assumption_set())

    def table(self, name: str | None) -> RelationTable:
        if name is None:
            return RelationTable()
        if name not in self.tables:
            raise KeyError(f"unknown table {name!r}")
        return self.tables[name]

    def _canonical(self):
        return (self.name, self.parameters, self.definitions, self.assumptions, self.coordinates, self.aux,
                self.generators, list(self.forms.items()),
                {k: v.entries() for k, v in self.tables.items()}, self.connections,
                {k: sorted(v.mapping.items()) for k, v in self.realizations.items()},
                self.conservations, self.backlunds, self.cases, self.relations)

    def __eq__(self, other) -> bool:
        return isinstance(other, SystemFile) and self._canonical() == other._canonical()


# --------------------------------------------------------------------------
# expressions

class _Parser:
    def __init__(self, sf: SystemFile, tokens: list, line: int):
        self.sf, self.toks, self.i, self.line = sf, tokens, 0, line

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        return ParseError(msg, self.line, tok.col)

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of line'!r}", self.line, t.col)
        return t

    def at_end(self) -> bool:
        return self.peek().kind == "end"

    # grammar --------------------------------------------------------
    def expr(self):
        value = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next()
            rhs = self.term()
            value = self.combine(op, value, rhs)
        return value

    def term(self):
        value = self.unary()
        while self.peek().text in ("*", "/", "/\\"):
            op = self.next()
            rhs = self.unary()
            value = self.combine(op, value, rhs)
        return value

    def unary(self):
        if self.peek().text == "-":
            self.next()
            return _neg(self.unary())
        if self.peek().text == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        start = self.peek()
        base, composite = self.atom()
        if self.peek().text != "^":
            return base
        op = self.next()
        exp_tok = self.peek()
        if exp_tok.text == "-":
            self.next()
            exponent = _neg(self.power())
        else:
            exponent = self.power()
        if not isinstance(exponent, ScalarExpr) or not exponent.is_constant():
            raise self.error("exponent must be a parameter expression", exp_tok)
        e = exponent.as_constant()
        if not isinstance(base, ScalarExpr):
            raise self.error("only scalars can be raised to a power", op)
        if composite and not base.is_monomial() and (not e.is_nonneg_integer() or e == 1):
            base = ScalarExpr.power(self.aux_for(base, start), 1)
        try:
            return base ** e
        except UnsupportedSubstitution as exc:
            raise self.error(str(exc), op) from None

    def atom(self):
        t = self.next()
        if t.kind == "num":
            return ScalarExpr.const(Fraction(t.text)), False
        if t.text == "(":
            value = self.expr()
            self.expect(")")
            return value, True
        if t.text == "[":
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect("]")
            if not isinstance(a, LieExpr) or not isinstance(b, LieExpr):
                raise self.error("brackets take Lie expressions", t)
            return bracket(a, b), False
        if t.kind == "ident":
            if self.peek().text == "(" and t.text in ("d", "Dx", "Dt"):
                self.next()
                arg = self.expr()
                self.expect(")")
                return self.call(t, arg), False
            return self.identifier(t), False
        raise ParseError(f"unexpected {t.text or 'end of line'!r}", self.line, t.col)

    def call(self, t: Token, arg):
        try:
            if t.text == "d":
                if isinstance(arg, LieExpr):
                    raise self.error("d() of a Lie expression is not supported here", t)
                return d(arg if isinstance(arg, DifferentialForm) else DifferentialForm.function(arg))
            if not isinstance(arg, (ScalarExpr, LieExpr)):
                raise self.error(f"{t.text}() needs a scalar", t)
            return arg.total_diff("x" if t.text == "Dx" else "t")
        except JetOrderError as exc:
            raise self.error(str(exc), t) from None

    def identifier(self, t: Token):
        name, sf = t.text, self.sf
        if name in sf.parameters:
            return ScalarExpr.const(ParamRational.of(name))
        if name in sf.coordinates:
            return ScalarExpr.power(Coordinate(name))
        if name in sf.aux:
            return ScalarExpr.power(sf.aux[name])
        if name in sf.generators:
            return LieExpr.generator(name)
        if name in sf.forms:
            return sf.forms[name]
        if name.startswith("d") and name[1:] in sf.coordinates:
            return DifferentialForm.basis(name[1:])
        if "_" in name:
            base, _, idx = name.rpartition("_")
            if base in sf.coordinates and idx and set(idx) <= {"x", "t"}:
                try:
                    return ScalarExpr.power(Coordinate.jet(base, idx))
                except JetOrderError as exc:
                    raise self.error(str(exc), t) from None
        raise ParseError(f"undeclared identifier {name!r}", self.line, t.col)

    def aux_for(self, base: ScalarExpr, tok: Token) -> Coordinate:
        items = {}
        for term in base.terms():
            if len(term.powers) != 1 or term.powers[0][1] != 1 or term.powers[0][0].kind != "base" \
                    or not term.coeff.is_constant():
                raise self.error("composite base must be a linear combination of coordinates", tok)
            items[term.powers[0][0].name] = term.coeff.value()
        ordered = dict(sorted(items.items(), key=lambda kv: coord_key(kv[0])))
        c = Coordinate.aux(ordered)
        existing = self.sf.aux.get(c.name)
        if existing is not None:
            return existing
        self.sf.aux[c.name] = c
        return c

    def combine(self, op: Token, a, b):
        try:
            if op.text == "+":
                return _add(a, b)
            if op.text == "-":
                return _add(a, _neg(b))
            if op.text == "*":
                return _mul(a, b)
            if op.text == "/":
                if not isinstance(b, ScalarExpr):
                    raise TypeError("division by a non-scalar")
                if not b.is_monomial():
                    raise TypeError("division by a sum")
                return _mul(a, b.inverse())
            if op.text == "/\\":
                fa = a if isinstance(a, DifferentialForm) else DifferentialForm.function(a)
                fb = b if isinstance(b, DifferentialForm) else DifferentialForm.function(b)
                return wedge(fa, fb)
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), self.line, op.col) from None
        raise ParseError(f"unknown operator {op.text}", self.line, op.col)


def _neg(v):
    return -v


def _is_zero_scalar(v) -> bool:
    return isinstance(v, ScalarExpr) and v.is_zero()


def _add(a, b):
    if _is_zero_scalar(a):
        return b
    if _is_zero_scalar(b):
        return a
    if type(a) is not type(b):
        raise TypeError(f"cannot add {_kind(a)} and {_kind(b)}")
    return a + b


def _mul(a, b):
    if isinstance(a, ScalarExpr) and isinstance(b, ScalarExpr):
        return a * b
    if isinstance(a, ScalarExpr):
        a, b = b, a
    if isinstance(b, ScalarExpr):
        return a.scale(b)
    raise TypeError(f"cannot multiply {_kind(a)} by {_kind(b)}; use /\\ for forms")


def _kind(v) -> str:
    return {ScalarExpr: "a scalar", LieExpr: "a Lie expression", DifferentialForm: "a form"}.get(type(v), "?")


def _split_top(tokens: list, sep: str) -> list:
    parts, cur, depth = [], [], 0
    for t in tokens:
        if t.kind == "end":
            break
        if t.text in ("(", "["):
            depth += 1
        elif t.text in (")", "]"):
            depth -= 1
        if t.text == sep and depth == 0:
            parts.append(cur)
            cur = []
        else:
            cur.append(t)
    parts.append(cur)
    return parts


def _eval_tokens(sf: SystemFile, tokens: list, line: int, want=None):
    if not tokens:
        raise ParseError("missing expression", line, 0)
    end = Token("end", "", tokens[-1].col + len(tokens[-1].text))
    p = _Parser(sf, list(tokens) + [end], line)
    value = p.expr()
    if not p.at_end():
        raise p.error(f"unexpected {p.peek().text!r}")
    if want is not None:
        value = _coerce(value, want, line, tokens[0].col)
    return value


def _coerce(value, want, line, col):
    if want is LieExpr and _is_zero_scalar(value):
        return LieExpr()
    if want is DifferentialForm and isinstance(value, ScalarExpr):
        if value.is_zero():
            return DifferentialForm.zero(0)
        return DifferentialForm.function(value)
    if want is ParamRational:
        if isinstance(value, ScalarExpr) and value.is_constant():
            return value.as_constant()
        raise ParseError("expected a parameter expression", line, col)
    if not isinstance(value, want):
        raise ParseError(f"expected {_kind_name(want)}, found {_kind(value)}", line, col)
    return value


def _kind_name(t) -> str:
    return {ScalarExpr: "a scalar", LieExpr: "a Lie expression", DifferentialForm: "a form"}[t]


# --------------------------------------------------------------------------
# statements

def parse(source: str) -> SystemFile:
    sf = SystemFile()
    current_table = None
    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = raw.split("#", 1)[0].rstrip()
        if not text.strip():
            continue
        toks = tokenize(text, lineno)
        head = toks[0]
        if head.kind != "ident":
            raise ParseError("statement must start with a keyword", lineno, head.col)
        body = toks[1:-1]
        handler = _STATEMENTS.get(head.text)
        if handler is None:
            raise ParseError(f"unknown statement {head.text!r}", lineno, head.col)
        if head.text == "table":
            current_table = _table(sf, body, lineno)
        elif head.text == "bracket":
            if current_table is None:
                current_table = "default"
                sf.tables.setdefault("default", RelationTable(name="default"))
            _bracket(sf, body, lineno, sf.tables[current_table])
        else:
            handler(sf, body, lineno)
    return sf


def _ident(tokens, idx, line, what="identifier") -> str:
    if idx >= len(tokens) or tokens[idx].kind != "ident":
        col = tokens[idx].col if idx < len(tokens) else 0
        raise ParseError(f"expected {what}", line, col)
    return tokens[idx].text


def _check_new(sf: SystemFile, name: str, line: int, col: int):
    taken = set(sf.parameters) | set(sf.coordinates) | set(sf.aux) | set(sf.generators) | set(sf.forms)
    if name in taken:
        raise ParseError(f"{name!r} is already declared", line, col)


def _system(sf, body, line):
    sf.name = _ident(body, 0, line, "system name")


def _param(sf, body, line):
    name = _ident(body, 0, line, "parameter name")
    _check_new(sf, name, line, body[0].col)
    flags, i = set(), 1
    while i < len(body) and body[i].kind == "ident":
        if body[i].text not in ("nonzero", "integer"):
            raise ParseError(f"unknown parameter flag {body[i].text!r}", line, body[i].col)
        flags.add(body[i].text)
        i += 1
    sf.parameters[name] = Parameter(name, frozenset(flags))
    if i < len(body):
        if body[i].text != "=":
            raise ParseError("expected '=' or end of line", line, body[i].col)
        value = _eval_tokens(sf, body[i + 1:], line, ParamRational)
        if name in value.variables():
            raise ParseError(f"{name} defined in terms of itself", line, body[i].col)
        sf.definitions[name] = value


def _fact(sf, tokens, line):
    for op in ("!=", "="):
        parts = _split_top(tokens + [Token("end", "", 0)], op)
        if len(parts) == 2:
            lhs = _eval_tokens(sf, parts[0], line, ParamRational)
            rhs = _eval_tokens(sf, parts[1], line, ParamRational)
            pref = None
            if op == "=" and len(parts[0]) == 1 and parts[0][0].kind == "ident":
                pref = parts[0][0].text
            expr = lhs - rhs
            if expr.is_zero():
                raise ParseError("relation is trivially true", line, tokens[0].col)
            return expr, op, pref
    raise ParseError("expected 'expr = expr' or 'expr != expr'", line, tokens[0].col if tokens else 0)


def _assume(sf, body, line):
    sf.assumptions.append(_fact(sf, body, line))


def _coord(sf, body, line):
    if len(body) >= 2 and body[1].text == "=":
        name = _ident(body, 0, line)
        _check_new(sf, name, line, body[0].col)
        value = _eval_tokens(sf, body[2:], line, ScalarExpr)
        p = _Parser(sf, [], line)
        c = p.aux_for(value, body[2])
        del sf.aux[c.name]
        sf.aux[name] = Coordinate.aux(dict(c.definition), name=name)
        return
    for t in body:
        if t.kind != "ident":
            raise ParseError("expected coordinate name", line, t.col)
        _check_new(sf, t.text, line, t.col)
        sf.coordinates.append(t.text)
    sf.coordinates.sort(key=coord_key)


def _generator(sf, body, line):
    for t in body:
        if t.kind != "ident":
            raise ParseError("expected generator name", line, t.col)
        _check_new(sf, t.text, line, t.col)
        sf.generators.append(t.text)


def _table(sf, body, line) -> str:
    name = _ident(body, 0, line, "table name")
    sf.tables.setdefault(name, RelationTable(name=name))
    return name


def _basis_of(value, line, col):
    if not isinstance(value, LieExpr) or len(value.basis()) != 1:
        raise ParseError("bracket entries must be single generators or brackets", line, col)
    b = value.basis()[0]
    if value.coefficient(b) != ScalarExpr.const(1):
        raise ParseError("bracket entries must have unit coefficient", line, col)
    return b


def _bracket(sf, body, line, table: RelationTable):
    parts = _split_top(body + [Token("end", "", 0)], "=")
    if len(parts) != 2 or not parts[0] or parts[0][0].text != "[" or parts[0][-1].text != "]":
        raise ParseError("expected 'bracket [A, B] = expr'", line, body[0].col if body else 0)
    inner = _split_top(parts[0][1:-1] + [Token("end", "", 0)], ",")
    if len(inner) != 2:
        raise ParseError("bracket needs two entries", line, parts[0][0].col)
    a = _basis_of(_eval_tokens(sf, inner[0], line), line, inner[0][0].col)
    b = _basis_of(_eval_tokens(sf, inner[1], line), line, inner[1][0].col)
    rhs = _eval_tokens(sf, parts[1], line, LieExpr)
    try:
        table.set(a, b, rhs)
    except ValueError as exc:
        raise ParseError(str(exc), line, parts[0][0].col) from None


def _form(sf, body, line):
    name = _ident(body, 0, line, "form name")
    _check_new(sf, name, line, body[0].col)
    if len(body) < 3 or body[1].text != "=":
        raise ParseError("expected 'form NAME = expr'", line, body[0].col)
    value = _eval_tokens(sf, body[2:], line, DifferentialForm)
    sf.forms[name] = value


def _named_clauses(body, line):
    name = _ident(body, 0, line, "name")
    if len(body) < 2 or body[1].text != ":":
        raise ParseError("expected ':' after the name", line, body[0].col)
    return name, _split_top(body[2:] + [Token("end", "", 0)], ";")


def _keyed(clause, line):
    if len(clause) < 3 or clause[0].kind != "ident" or clause[1].text != "=":
        raise ParseError("expected 'key = value'", line, clause[0].col if clause else 0)
    return clause[0].text, clause[2:]


def _connection(sf, body, line):
    name, clauses = _named_clauses(body, line)
    got = {}
    for clause in clauses:
        key, toks = _keyed(clause, line)
        if key == "table":
            got["table"] = _ident(toks, 0, line, "table name")
            if got["table"] not in sf.tables:
                raise ParseError(f"unknown table {got['table']!r}", line, toks[0].col)
        elif key in ("A", "B"):
            got[key] = _eval_tokens(sf, toks, line, LieExpr)
        else:
            raise ParseError(f"unknown connection field {key!r}", line, clause[0].col)
    if "A" not in got or "B" not in got:
        raise ParseError("connection needs A and B", line, body[0].col)
    sf.connections[name] = (got["A"], got["B"], got.get("table"))


def _realize(sf, body, line):
    name = _ident(body, 0, line, "realization name")
    if len(body) < 2 or body[1].text != ":":
        raise ParseError("expected ':' after the name", line, body[0].col)
    mapping = {}
    for item in _split_top(body[2:] + [Token("end", "", 0)], ","):
        if len(item) < 3 or item[1].text != "->":
            raise ParseError("expected 'X -> expr'", line, item[0].col if item else 0)
        g = item[0].text
        if g not in sf.generators:
            raise ParseError(f"undeclared generator {g!r}", line, item[0].col)
        mapping[g] = _eval_tokens(sf, item[2:], line, LieExpr)
    try:
        sf.realizations[name] = Realization(mapping, name)
    except ValueError as exc:
        raise ParseError(str(exc), line, body[0].col) from None


def _conservation(sf, body, line):
    name, clauses = _named_clauses(body, line)
    g, omega = None, None
    for clause in clauses:
        key, toks = _keyed(clause, line)
        if key == "g":
            if toks[0].text != "(" or toks[-1].text != ")":
                raise ParseError("multipliers must be a parenthesized list", line, toks[0].col)
            g = tuple(_eval_tokens(sf, part, line, ScalarExpr)
                      for part in _split_top(toks[1:-1] + [Token("end", "", 0)], ","))
        elif key == "omega":
            omega = _eval_tokens(sf, toks, line, DifferentialForm)
        else:
            raise ParseError(f"unknown conservation field {key!r}", line, clause[0].col)
    if g is None:
        raise ParseError("conservation needs g", line, body[0].col)
    sf.conservations[name] = (g, omega)


def _backlund(sf, body, line):
    name, clauses = _named_clauses(body, line)
    got = {}
    for clause in clauses:
        key, toks = _keyed(clause, line)
        if key not in ("F", "G"):
            raise ParseError(f"unknown backlund field {key!r}", line, clause[0].col)
        got[key] = _eval_tokens(sf, toks, line, ScalarExpr)
    if set(got) != {"F", "G"}:
        raise ParseError("backlund needs F and G", line, body[0].col)
    sf.backlunds[name] = (got["F"], got["G"])


def _case(sf, body, line):
    name = _ident(body, 0, line, "case name")
    if len(body) < 2 or body[1].text != ":":
        raise ParseError("expected ':' after the name", line, body[0].col)
    facts = [_fact(sf, item, line) for item in _split_top(body[2:] + [Token("end", "", 0)], ",")]
    sf.cases[name] = facts


def _relations(sf, body, line):
    name = _ident(body, 0, line, "relations name")
    if len(body) < 2 or body[1].text != ":":
        raise ParseError("expected ':' after the name", line, body[0].col)
    rels = []
    for item in _split_top(body[2:] + [Token("end", "", 0)], ","):
        parts = _split_top(item + [Token("end", "", 0)], "=")
        if len(parts) != 2:
            raise ParseError("expected 'lhs = rhs'", line, item[0].col if item else 0)
        lhs = _eval_tokens(sf, parts[0], line, LieExpr)
        rhs = _eval_tokens(sf, parts[1], line, LieExpr)
        rels.append(lhs - rhs)
    sf.relations[name] = rels


_STATEMENTS = {
    "system": _system, "param": _param, "assume": _assume, "coord": _coord, "generator": _generator,
    "table": _table, "bracket": _bracket, "form": _form, "connection": _connection, "realize": _realize,
    "conservation": _conservation, "backlund": _backlund, "case": _case, "relations": _relations,
}


# --------------------------------------------------------------------------
# rendering

def _fact_text(expr: ParamRational, op: str, pref) -> str:
    if op == "=" and pref is not None:
        value = ParamRational.of(pref) - expr
        if pref not in value.variables():
            return f"{pref} = {value.render()}"
    return f"{expr.render()} {op} 0"


def _form_text(f: DifferentialForm) -> str:
    if f.degree == 0:
        c = f.coefficient()
        return c.render()
    return f.render(wedge_token=" /\\ ")


def render(sf: SystemFile) -> str:
    out = []
    if sf.name:
        out.append(f"system {sf.name}")
    for name, p in sf.parameters.items():
        line = f"param {name}" + "".join(f" {flag}" for flag in sorted(p.flags))
        if name in sf.definitions:
            line += f" = {sf.definitions[name].render()}"
        out.append(line)
    for fact in sf.assumptions:
        out.append("assume " + _fact_text(*fact))
    if sf.coordinates:
        out.append("coord " + " ".join(sf.coordinates))
    for name, c in sf.aux.items():
        if not name.startswith("("):
            out.append(f"coord {name} = {_render_linear(c.definition)}")
    if sf.generators:
        out.append("generator " + " ".join(sf.generators))
    for name, f in sf.forms.items():
        out.append(f"form {name} = {_form_text(f)}")
    for tname, table in sf.tables.items():
        out.append(f"table {tname}")
        for pair, rhs in table.entries():
            out.append(f"bracket {render_basis(pair)} = {rhs.render()}")
    for name, (a, b, tname) in sf.connections.items():
        line = f"connection {name} : A = {a.render()} ; B = {b.render()}"
        if tname:
            line += f" ; table = {tname}"
        out.append(line)
    for name, r in sf.realizations.items():
        items = ", ".join(f"{g} -> {v.render()}" for g, v in r.mapping.items())
        out.append(f"realize {name} : {items}")
    for name, (g, omega) in sf.conservations.items():
        line = f"conservation {name} : g = (" + ", ".join(x.render() for x in g) + ")"
        if omega is not None:
            line += f" ; omega = {_form_text(omega)}"
        out.append(line)
    for name, (F, G) in sf.backlunds.items():
        out.append(f"backlund {name} : F = {F.render()} ; G = {G.render()}")
    for name, facts in sf.cases.items():
        out.append(f"case {name} : " + ", ".join(_fact_text(*f) for f in facts))
    for name, rels in sf.relations.items():
        out.append(f"relations {name} : " + ", ".join(f"{r.render()} = 0" for r in rels))
    return "\n".join(out) + "\n"


def parse_fact(sf: SystemFile, text: str):
    """Parse ``expr = expr`` or ``expr != expr`` against the declarations of ``sf``."""
    toks = tokenize(text)
    return _fact(sf, toks[:-1], 0)


def parse_file(path) -> SystemFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
