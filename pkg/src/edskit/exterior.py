"""Differential forms, ideal membership certificates and sectioning."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

from .liealg import LieExpr
from .scalar import (AssumptionSet, CaseSplitError, Coordinate, Decision, ScalarExpr,
                     _sx, is_zero)

BASIS_ORDER = ("x", "t", "u", "p", "q", "v", "y")
MAX_DEGREE = 5


def coord_key(name: str):
    try:
        return (BASIS_ORDER.index(name), name)
    except ValueError:
        return (len(BASIS_ORDER), name)


def _sort_with_sign(names):
    """Sort differentials into basis order; sign is the permutation parity, 0 on repeats."""
    names = list(names)
    if len(set(names)) != len(names):
        return None, 0
    sign = 1
    for i in range(len(names)):
        for j in range(len(names) - 1 - i):
            if coord_key(names[j]) > coord_key(names[j + 1]):
                names[j], names[j + 1] = names[j + 1], names[j]
                sign = -sign
    return tuple(names), sign


class DegreeError(ValueError):
    pass


def _coeff_zero(c) -> bool:
    return c.is_zero()


def _coeff_coordinates(c) -> frozenset:
    if isinstance(c, LieExpr):
        out = frozenset()
        for _, v in c.items():
            out |= v.effective_coordinates()
        return out
    return c.effective_coordinates()


class DifferentialForm:
    """Homogeneous form; components map sorted differential tuples to coefficients.

    Coefficients are :class:`ScalarExpr` or, for connection curvature, :class:`LieExpr`.
    """

    __slots__ = ("degree", "_components")

    def __init__(self, degree: int, components: Mapping | None = None):
        if not 0 <= degree <= MAX_DEGREE:
            raise DegreeError(f"form degree {degree} outside 0..{MAX_DEGREE}")
        self.degree = degree
        comps: dict = {}
        for key, c in (components or {}).items():
            if len(key) != degree:
                raise DegreeError(f"component {key} in a {degree}-form")
            skey, sign = _sort_with_sign(key)
            if sign == 0:
                continue
            c = c if isinstance(c, LieExpr) else _sx(c)
            c = c if sign > 0 else -c
            comps[skey] = comps[skey] + c if skey in comps else c
        self._components = {k: v for k, v in comps.items() if not _coeff_zero(v)}

    @classmethod
    def zero(cls, degree: int) -> "DifferentialForm":
        return cls(degree)

    @classmethod
    def function(cls, f) -> "DifferentialForm":
        return cls(0, {(): f})

    @classmethod
    def basis(cls, *names: str, coeff=1) -> "DifferentialForm":
        return cls(len(names), {tuple(names): coeff})

    def components(self) -> list:
        return sorted(self._components.items(), key=lambda kv: [coord_key(n) for n in kv[0]])

    def coefficient(self, *names: str):
        key, sign = _sort_with_sign(names)
        c = self._components.get(key)
        if c is None or sign == 0:
            return ScalarExpr()
        return c if sign > 0 else -c

    def is_zero(self) -> bool:
        return not self._components

    def is_lie_valued(self) -> bool:
        return any(isinstance(c, LieExpr) for c in self._components.values())

    def differentials(self) -> set:
        return {n for k in self._components for n in k}

    def coordinates(self) -> frozenset:
        out = frozenset()
        for c in self._components.values():
            out |= _coeff_coordinates(c)
        return out

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        if other.degree != self.degree:
            if other.is_zero():
                return self
            if self.is_zero():
                return other
            raise DegreeError(f"adding a {self.degree}-form and a {other.degree}-form")
        out = dict(self._components)
        for k, v in other._components.items():
            out[k] = out[k] + v if k in out else v
        return DifferentialForm(self.degree, out)

    def __neg__(self) -> "DifferentialForm":
        return DifferentialForm(self.degree, {k: -v for k, v in self._components.items()})

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self + (-other)

    def scale(self, f) -> "DifferentialForm":
        if not isinstance(f, LieExpr):
            f = _sx(f)
        return DifferentialForm(self.degree, {k: _times(f, v) for k, v in self._components.items()})

    def __mul__(self, f):
        if isinstance(f, DifferentialForm):
            return NotImplemented
        return self.scale(f)

    __rmul__ = __mul__

    def wedge(self, other: "DifferentialForm") -> "DifferentialForm":
        return wedge(self, other)

    def map_coefficients(self, fn) -> "DifferentialForm":
        return DifferentialForm(self.degree, {k: fn(v) for k, v in self._components.items()})

    def apply(self, assumptions) -> "DifferentialForm":
        if assumptions is None:
            return self
        return self.map_coefficients(lambda c: c.apply(assumptions))

    def subs_params(self, mapping) -> "DifferentialForm":
        return self.map_coefficients(lambda c: c.subs_params(mapping))

    def __eq__(self, other) -> bool:
        return (isinstance(other, DifferentialForm) and self.degree == other.degree
                and self._components == other._components)

    def __hash__(self):
        return hash((self.degree, frozenset(self._components.items())))

    def __repr__(self) -> str:
        return f"DifferentialForm({self.render()!r})"

    def render(self, wedge_token: str = "^") -> str:
        if not self._components:
            return "0"
        parts = []
        for key, c in self.components():
            mono = wedge_token.join("d" + n for n in key)
            text = c.render()
            if c.is_zero():
                continue
            simple = isinstance(c, ScalarExpr) and c.is_monomial()
            neg = simple and text.startswith("-")
            if neg:
                text = text[1:]
            if not key:
                body = text if simple else f"({text})"
            elif text == "1" and simple:
                body = mono
            else:
                body = f"{text if simple else '(' + text + ')'} * {mono}"
            parts.append((neg, body))
        out = ("-" if parts[0][0] else "") + parts[0][1]
        for neg, body in parts[1:]:
            out += (" - " if neg else " + ") + body
        return out

    __str__ = render


def _times(a, b):
    if isinstance(a, LieExpr) and isinstance(b, LieExpr):
        raise TypeError("product of two Lie-valued coefficients; use a bracket")
    if isinstance(a, LieExpr):
        return a.scale(b)
    if isinstance(b, LieExpr):
        return b.scale(a)
    return a * b


def form(value) -> DifferentialForm:
    if isinstance(value, DifferentialForm):
        return value
    return DifferentialForm.function(value)


def wedge(f, g) -> DifferentialForm:
    f, g = form(f), form(g)
    deg = f.degree + g.degree
    if deg > MAX_DEGREE:
        raise DegreeError(f"wedge of degree {deg} exceeds {MAX_DEGREE}")
    out: dict = {}
    for kf, cf in f._components.items():
        for kg, cg in g._components.items():
            key, sign = _sort_with_sign(kf + kg)
            if sign == 0:
                continue
            c = _times(cf, cg)
            c = c if sign > 0 else -c
            out[key] = out[key] + c if key in out else c
    return DifferentialForm(deg, out)


def d(f) -> DifferentialForm:
    """Exterior derivative over the base coordinates that occur in the coefficients."""
    f = form(f)
    if f.degree >= MAX_DEGREE:
        raise DegreeError("exterior derivative of a top-degree form")
    out: dict = {}
    for key, c in f._components.items():
        for co in sorted(_coeff_coordinates(c), key=lambda co: coord_key(co.name)):
            if co.kind != "base" or co.name in key:
                continue
            part = c.diff(co)
            if part.is_zero():
                continue
            skey, sign = _sort_with_sign((co.name,) + key)
            part = part if sign > 0 else -part
            out[skey] = out[skey] + part if skey in out else part
    return DifferentialForm(f.degree + 1, out)


# --------------------------------------------------------------------------
# systems and certificates

@dataclass
class ExteriorSystem:
    name: str
    coordinates: tuple
    generators: list                       # [(name, DifferentialForm)]
    parameters: dict = field(default_factory=dict)
    assumptions: AssumptionSet = field(default_factory=AssumptionSet)

    def __post_init__(self):
        self.coordinates = tuple(sorted(self.coordinates, key=coord_key))
        chart = set(self.coordinates)
        for gname, g in self.generators:
            extra = g.differentials() - chart
            extra |= {c.name for c in g.coordinates() if c.kind == "base"} - chart
            if extra:
                raise ValueError(f"generator {gname} uses coordinates outside the chart: {sorted(extra)}")

    @property
    def forms(self) -> list:
        return [g for _, g in self.generators]

    @property
    def names(self) -> list:
        return [n for n, _ in self.generators]

    def generator(self, name: str) -> DifferentialForm:
        for n, g in self.generators:
            if n == name:
                return g
        raise KeyError(name)

    def degrees(self) -> list:
        return [g.degree for g in self.forms]

    def fibre_coordinates(self) -> list:
        return [c for c in self.coordinates if c not in ("x", "t")]

    def extended(self, coordinate: str | None = None, generators: Sequence = ()) -> "ExteriorSystem":
        coords = self.coordinates + ((coordinate,) if coordinate and coordinate not in self.coordinates else ())
        return ExteriorSystem(self.name, coords, list(self.generators) + list(generators),
                              dict(self.parameters), self.assumptions)

    def with_assumptions(self, extra: AssumptionSet | None) -> "ExteriorSystem":
        return ExteriorSystem(self.name, self.coordinates, list(self.generators), dict(self.parameters),
                              self.assumptions.merged(extra))

    def subs_params(self, mapping) -> "ExteriorSystem":
        return ExteriorSystem(self.name, self.coordinates,
                              [(n, g.subs_params(mapping)) for n, g in self.generators],
                              {k: v for k, v in self.parameters.items() if k not in mapping},
                              self.assumptions)


@dataclass
class IdealCertificate:
    """``target = sum_i multipliers[i] ^ generators[i] + remainder``; certified when remainder is 0."""

    target: DifferentialForm
    generators: list           # [(name, DifferentialForm)]
    multipliers: list          # DifferentialForm per generator
    assumptions: AssumptionSet = field(default_factory=AssumptionSet)
    label: str = ""

    def combination(self) -> DifferentialForm:
        total = DifferentialForm.zero(self.target.degree)
        for m, (_, g) in zip(self.multipliers, self.generators):
            if not m.is_zero():
                total = total + wedge(m, g)
        return total

    def residual(self) -> DifferentialForm:
        return (self.target - self.combination()).apply(self.assumptions)

    @property
    def verified(self) -> bool:
        return all(_coeff_decides_zero(c, self.assumptions) for _, c in self.residual().components())

    def render_multipliers(self) -> dict:
        return {name: m.render() for m, (name, _) in zip(self.multipliers, self.generators)}


def _coeff_decides_zero(c, a) -> bool:
    if isinstance(c, LieExpr):
        return all(is_zero(v, a) == Decision.YES for _, v in c.items())
    return is_zero(c, a) == Decision.YES


def _basis_monomials(coords: Sequence[str], k: int) -> list:
    return [tuple(c) for c in combinations(sorted(coords, key=coord_key), k)]


def _lie_split(target: DifferentialForm) -> tuple[list, dict]:
    """Split a Lie-valued form into scalar forms per Lie basis element."""
    if not target.is_lie_valued():
        return [None], {None: target}
    per: dict = {}
    for key, c in target._components.items():
        for b, v in c.items():
            per.setdefault(b, {})[key] = v
    from .liealg import basis_key
    basis = sorted(per, key=basis_key)
    return basis, {b: DifferentialForm(target.degree, per[b]) for b in basis}


def ideal_reduce(target: DifferentialForm, sys: ExteriorSystem,
                 assumptions: AssumptionSet | None = None, label: str = "") -> IdealCertificate:
    """Express ``target`` as ``sum sigma_i ^ alpha_i`` by exact elimination.

    Columns are (multiplier basis monomial, generator) with dx-type multipliers
    first; pivots must be single terms that are provably nonzero.  The returned
    certificate carries any irreducible remainder.
    """
    a = sys.assumptions.merged(assumptions)
    gens = sys.generators
    deg = target.degree
    lie_basis, parts = _lie_split(target)

    columns = []
    for k in sorted({deg - g.degree for g in sys.forms if deg >= g.degree}):
        for mono in _basis_monomials(sys.coordinates, k):
            for i, (_, g) in enumerate(gens):
                if g.degree == deg - k:
                    columns.append((i, mono))
    images = [wedge(DifferentialForm.basis(*mono), gens[i][1]).apply(a) for i, mono in columns]

    row_keys = _basis_monomials(sys.coordinates, deg)
    extra = set(target.differentials()) - set(sys.coordinates)
    if extra:
        row_keys = _basis_monomials(tuple(sys.coordinates) + tuple(sorted(extra)), deg)
    rhs_names = lie_basis
    rows = []
    for key in row_keys:
        entries = {j: img.coefficient(*key) for j, img in enumerate(images)}
        entries = {j: v for j, v in entries.items() if not v.is_zero()}
        rhs = {b: parts[b].apply(a).coefficient(*key) for b in rhs_names}
        rows.append([entries, rhs])

    pivots: dict = {}
    used = set()
    for j in range(len(columns)):
        candidates = []
        undecided = []
        for r, (entries, _) in enumerate(rows):
            if r in used or j not in entries:
                continue
            e = entries[j]
            if e.is_monomial() and a.nonzero(e.as_term().coeff):
                candidates.append(r)
            elif e.is_monomial():
                undecided.append(e.as_term().coeff)
        if not candidates:
            if undecided:
                raise CaseSplitError(f"pivot for column {j} needs a nonzero coefficient", undecided)
            continue
        r = max(candidates)
        used.add(r)
        pivots[j] = r
        entries, rhs = rows[r]
        inv = entries[j].inverse()
        rows[r] = [{k: v * inv for k, v in entries.items()}, {b: v * inv for b, v in rhs.items()}]
        prow, prhs = rows[r]
        for s, (ent, rh) in enumerate(rows):
            if s == r or j not in ent:
                continue
            f = ent[j]
            new = dict(ent)
            for k, v in prow.items():
                nv = (new[k] - f * v) if k in new else -(f * v)
                if nv.is_zero():
                    new.pop(k, None)
                else:
                    new[k] = nv
            new.pop(j, None)
            rows[s] = [new, {b: rh[b] - f * prhs[b] for b in rhs_names}]

    sol = {j: {b: rows[r][1][b].apply(a) for b in rhs_names} for j, r in pivots.items()}
    multipliers = []
    for i, (_, g) in enumerate(gens):
        k = deg - g.degree
        comps = {}
        if k >= 0:
            for j, (ci, mono) in enumerate(columns):
                if ci != i or j not in sol:
                    continue
                if lie_basis == [None]:
                    coeff = sol[j][None]
                else:
                    coeff = LieExpr({b: sol[j][b] for b in lie_basis})
                if not coeff.is_zero():
                    comps[mono] = coeff
        multipliers.append(DifferentialForm(max(k, 0), comps))
    return IdealCertificate(target, list(gens), multipliers, a, label)


def check_closed(sys: ExteriorSystem, assumptions: AssumptionSet | None = None) -> list:
    """One certificate per generator for ``d alpha_i`` in the ideal."""
    return [ideal_reduce(d(g), sys, assumptions, label=f"d{name}") for name, g in sys.generators]


# --------------------------------------------------------------------------
# sectioning

@dataclass
class JetSubstitution:
    images: dict                        # differential name -> 1-form in dx, dt

    @classmethod
    def for_system(cls, sys: ExteriorSystem) -> "JetSubstitution":
        images = {"x": DifferentialForm.basis("x"), "t": DifferentialForm.basis("t")}
        for c in sys.fibre_coordinates():
            images[c] = DifferentialForm(1, {("x",): ScalarExpr.power(Coordinate.jet(c, "x")),
                                             ("t",): ScalarExpr.power(Coordinate.jet(c, "t"))})
        return cls(images)

    def __post_init__(self):
        for name, img in self.images.items():
            if img.degree != 1 or img.differentials() - {"x", "t"}:
                raise ValueError(f"section image of d{name} must be a 1-form in dx, dt")

    def pull(self, f: DifferentialForm) -> DifferentialForm:
        total = DifferentialForm.zero(f.degree)
        for key, c in f.components():
            piece = form(c)
            for name in key:
                if name not in self.images:
                    raise KeyError(f"no section image for d{name}")
                piece = wedge(piece, self.images[name])
            total = total + piece
        return total


class SectionError(RuntimeError):
    pass


def section_form(f: DifferentialForm, s: JetSubstitution):
    pulled = s.pull(f)
    bad = [k for k, _ in pulled.components() if k != ("x", "t")]
    if bad:
        raise SectionError(f"sectioned form has components outside dx^dt: {bad}")
    return pulled.coefficient("x", "t")


def section(sys: ExteriorSystem, s: JetSubstitution | None = None) -> list:
    """Scalar multipliers of dx^dt for each sectioned generator."""
    s = s or JetSubstitution.for_system(sys)
    out = []
    for name, g in sys.generators:
        if g.degree != 2:
            raise SectionError(f"generator {name} has degree {g.degree}, expected 2")
        out.append(section_form(g, s))
    return out


# --------------------------------------------------------------------------
# elimination

class EliminationError(ValueError):
    pass


def replace_with_jets(e: ScalarExpr, name: str, rhs: ScalarExpr) -> ScalarExpr:
    """Replace a fibre coordinate and all of its jets by ``rhs`` and its total derivatives."""
    for c in sorted(e.coordinates(), key=lambda c: -c.order):
        if c.kind == "base" and c.name == name:
            e = e.substitute(c, rhs)
        elif c.kind == "jet" and c.base == name:
            image = rhs
            for direction in c.index:
                image = image.total_diff(direction)
            e = e.substitute(c, image)
    return e


def _mentions(e: ScalarExpr, name: str) -> bool:
    return any((c.kind == "base" and c.name == name) or (c.kind == "jet" and c.base == name)
               for c in e.effective_coordinates())


def derive_definitions(residuals: Sequence[ScalarExpr]) -> tuple[list, list]:
    """Pick residuals of the form ``c*w + rest`` solvable for a fibre coordinate ``w``.

    Returns ``(definitions, remaining residual indices)``.
    """
    definitions, remaining, taken = [], [], set()
    for idx, r in enumerate(residuals):
        choice = None
        for c in sorted(r.coordinates(), key=lambda c: coord_key(c.name), reverse=True):
            if c.kind != "base" or c.name in ("x", "t") or c.name in taken:
                continue
            terms_with = [t for t in r.terms() if any(v.name == c.name or (v.kind == "jet" and v.base == c.name)
                                                      for v, _ in t.powers)]
            if len(terms_with) == 1 and terms_with[0].powers == ((c, terms_with[0].exponent(c)),) \
                    and terms_with[0].exponent(c) == 1 and terms_with[0].coeff.is_constant():
                choice = (c, terms_with[0].coeff)
                break
        if choice is None:
            remaining.append(idx)
            continue
        c, k = choice
        rest = r - ScalarExpr.power(c, 1, k)
        definitions.append((c.name, rest * ScalarExpr.const(-1 / k.value())))
        taken.add(c.name)
    return definitions, remaining


def eliminate(residuals: Sequence[ScalarExpr], definitions: Sequence | None = None,
              lead: Coordinate | None = None) -> ScalarExpr:
    """Reduce a sectioned system to a single PDE residual in the remaining base jets.

    ``definitions`` is an ordered list ``[(name, rhs), ...]``; each right side may
    only mention coordinates defined earlier.  When omitted they are derived
    from the residuals.  The result is normalized so that ``lead`` (default
    ``u_t``) has coefficient 1 when that coefficient is a constant.
    """
    if definitions is None:
        definitions, remaining = derive_definitions(residuals)
        leftover = [residuals[i] for i in remaining]
    else:
        used = {n for n, _ in definitions}
        leftover = [r for r in residuals if not any(_solves(r, n, rhs) for n, rhs in definitions)]
        del used
    if len(leftover) != 1:
        raise EliminationError(f"expected one residual after elimination, found {len(leftover)}")
    resolved: list = []
    names = [n for n, _ in definitions]
    for i, (name, rhs) in enumerate(definitions):
        for later in names[i:]:
            if _mentions(rhs, later):
                raise EliminationError(f"definitions not triangular: {name} depends on {later}")
        for prev, prhs in resolved:
            rhs = replace_with_jets(rhs, prev, prhs)
        resolved.append((name, rhs))
    out = leftover[0]
    for name, rhs in reversed(resolved):
        out = replace_with_jets(out, name, rhs)
    lead = lead or Coordinate.jet("u", "t")
    for t in out.terms():
        if t.powers == ((lead, t.exponent(lead)),) and t.exponent(lead) == 1 and t.coeff.is_constant():
            out = out * ScalarExpr.const(1 / t.coeff.value())
            break
    return out


def _solves(r: ScalarExpr, name: str, rhs: ScalarExpr) -> bool:
    c = Coordinate(name)
    diff = (ScalarExpr.power(c) - rhs)
    if (r - diff).is_zero() or (r + diff).is_zero():
        return True
    k = r.diff(c)
    kc = k.as_constant()
    return kc is not None and not kc.is_zero() and (r - diff * k).is_zero()
