"""Constructible predicates: finite unions of cells ``P = 0 and not(S_1 = 0) and ...``.

An optional tuple of bound variables is existentially quantified over the
whole union.  Truth at a point is decided exactly over the algebraic closure:
after substituting the free variables, every remaining variable is
existential and a cell is satisfiable iff, for some choice of one polynomial
``q_i`` from each negated system, ``P`` together with ``1 - y*prod(q_i)`` is
consistent (Nullstellensatz with the Rabinowitsch variable ``y``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ScalarSyntaxError
from .field import inv
from .poly import MonomialOrder, Poly, PolySystem, _fresh, parse_poly, product_system


def _monic(p: Poly) -> Poly:
    # scale by a cyclotomic leading coefficient so that p and c*p coincide
    lc = MonomialOrder("grevlex", sorted(p.variables())).leading(p)[1]
    if not lc.has_t() and not lc.generators() and lc != 1:
        return p.scale(inv(lc))
    return p


def _polys(ps) -> tuple:
    out = []
    for p in ps:
        p = Poly.lift(p)
        if p.is_zero():
            continue
        p = _monic(p)
        if p not in out:
            out.append(p)
    return tuple(sorted(out, key=str))


@dataclass(frozen=True)
class Cell:
    positive: tuple
    negated: tuple  # tuple of tuples of Poly

    def __init__(self, positive: Iterable = (), negated: Iterable[Iterable] = ()):
        object.__setattr__(self, "positive", _polys(positive))
        groups = []
        for s in negated:
            g = _polys(s)
            if g not in groups:
                groups.append(g)
        object.__setattr__(self, "negated", tuple(sorted(groups, key=lambda g: [str(p) for p in g])))

    def variables(self) -> set[str]:
        vs = set()
        for p in self.positive:
            vs |= p.variables()
        for s in self.negated:
            for p in s:
                vs |= p.variables()
        return vs

    def subs(self, mapping) -> Cell:
        return Cell(
            (p.subs(mapping) for p in self.positive),
            ((p.subs(mapping) for p in s) for s in self.negated),
        )

    def is_trivially_false(self) -> bool:
        if any(p.is_constant() for p in self.positive):
            return True
        pos = set(self.positive)
        return any(all(p in pos for p in s) for s in self.negated)

    def simplify(self) -> Cell | None:
        """Drop decided constant pieces; None if the cell is empty for sure."""
        if self.is_trivially_false():
            return None
        neg = []
        for s in self.negated:
            if any(p.is_constant() for p in s):
                continue  # some member is a nonzero constant: negation holds
            neg.append(s)
        return Cell(self.positive, neg)

    def satisfiable(self) -> bool:
        c = self.simplify()
        if c is None:
            return False
        if not c.variables():
            return True
        vs = sorted(c.variables())
        base = PolySystem(c.positive, vs)
        if not c.negated:
            return base.is_consistent()
        if not base.is_consistent():
            return False
        y = _fresh("y", vs)
        for choice in itertools.product(*c.negated):
            prod = Poly.const(1)
            for q in choice:
                prod = prod * q
            sys = PolySystem(c.positive + (Poly.const(1) - Poly.var(y) * prod,), vs + [y])
            if sys.is_consistent():
                return True
        return False


class Constructible:
    """A finite union of cells with optional existentially bound variables."""

    __slots__ = ("cells", "variables", "bound")

    def __init__(self, cells: Iterable[Cell] = (), variables: Iterable[str] = (), bound: Iterable[str] = ()):
        self.cells = tuple(cells)
        self.bound = tuple(dict.fromkeys(bound))
        vs = list(dict.fromkeys(variables))
        for c in self.cells:
            for v in sorted(c.variables()):
                if v not in vs and v not in self.bound:
                    vs.append(v)
        self.variables = tuple(v for v in vs if v not in self.bound)

    # constructors ------------------------------------------------------------

    @classmethod
    def true(cls, variables: Iterable[str] = ()) -> Constructible:
        return cls([Cell()], variables)

    @classmethod
    def false(cls, variables: Iterable[str] = ()) -> Constructible:
        return cls([], variables)

    @classmethod
    def equations(cls, polys: Iterable, variables: Iterable[str] = ()) -> Constructible:
        return cls([Cell(polys)], variables)

    @classmethod
    def from_system(cls, sys: PolySystem) -> Constructible:
        return cls([Cell(sys.polys)], sys.variables)

    # structure ---------------------------------------------------------------

    def is_closed(self) -> bool:
        return not self.bound and all(not c.negated for c in self.cells)

    def is_true_syntactically(self) -> bool:
        return any(not c.positive and not c.negated for c in self.cells)

    def closed_system(self) -> PolySystem:
        """Equations of the union when every cell is closed."""
        if not self.is_closed():
            raise ValueError("predicate has negations or bound variables")
        return product_system([PolySystem(c.positive, self.variables) for c in self.cells])

    def with_variables(self, variables: Iterable[str]) -> Constructible:
        return Constructible(self.cells, variables, self.bound)

    # boolean operations ------------------------------------------------------

    def _rename_bound(self, taken: set[str]) -> Constructible:
        clash = [b for b in self.bound if b in taken]
        if not clash:
            return self
        mapping = {}
        used = set(taken) | set(self.bound) | set(self.variables)
        for b in clash:
            nb = _fresh(b, used)
            used.add(nb)
            mapping[b] = Poly.var(nb)
        bound = tuple(mapping[b].variables().pop() if b in mapping else b for b in self.bound)
        return Constructible((c.subs(mapping) for c in self.cells), self.variables, bound)

    def conj(self, other: Constructible) -> Constructible:
        o = other._rename_bound(set(self.bound) | set(self.variables))
        s = self._rename_bound(set(o.variables))
        cells = [
            Cell(a.positive + b.positive, a.negated + b.negated) for a in s.cells for b in o.cells
        ]
        return Constructible(cells, s.variables + o.variables, s.bound + o.bound)

    __and__ = conj

    def disj(self, other: Constructible) -> Constructible:
        o = other._rename_bound(set(self.bound) | set(self.variables))
        s = self._rename_bound(set(o.variables))
        return Constructible(s.cells + o.cells, s.variables + o.variables, s.bound + o.bound)

    __or__ = disj

    def negate(self) -> Constructible:
        if self.bound:
            raise ValueError("cannot negate a predicate with bound variables")
        out = Constructible.true(self.variables)
        for c in self.cells:
            pieces = [Cell((), [(p,)]) for p in c.positive]
            pieces += [Cell(s) for s in c.negated]
            out = out.conj(Constructible(pieces, self.variables))
        return out.pruned()

    def exists(self, names: Iterable[str]) -> Constructible:
        names = [n for n in names if n in self.variables]
        return Constructible(self.cells, [v for v in self.variables if v not in names], self.bound + tuple(names))

    def subs(self, mapping: Mapping[str, object]) -> Constructible:
        """Substitute free variables; variables introduced by the images stay free."""
        mapping = {k: v for k, v in mapping.items() if k not in self.bound}
        new_vars = set()
        for v in mapping.values():
            if isinstance(v, Poly):
                new_vars |= v.variables()
        s = self._rename_bound(new_vars)
        variables = [v for v in s.variables if v not in mapping] + sorted(new_vars)
        return Constructible((c.subs(mapping) for c in s.cells), variables, s.bound)

    def rename(self, mapping: Mapping[str, str]) -> Constructible:
        return self.subs({k: Poly.var(v) for k, v in mapping.items()})

    def pruned(self) -> Constructible:
        cells = []
        for c in self.cells:
            c2 = c.simplify()
            if c2 is not None and c2 not in cells:
                cells.append(c2)
        if any(not c.positive and not c.negated for c in cells):
            cells = [Cell()]
        return Constructible(cells, self.variables, self.bound)

    # semantics ---------------------------------------------------------------

    def holds(self, assignment: Mapping[str, object]) -> bool:
        """Truth at a point; unassigned and symbolic values are existential."""
        s = self._rename_bound(
            set().union(*(v.variables() for v in assignment.values() if isinstance(v, Poly)))
            if assignment
            else set()
        )
        mapping = {k: v for k, v in assignment.items() if k in s.variables}
        return any(c.subs(mapping).satisfiable() for c in s.cells)

    def is_satisfiable(self) -> bool:
        return any(c.satisfiable() for c in self.cells)

    def is_subset(self, other: Constructible) -> bool:
        """Exact containment over the algebraic closure (``other`` must be bound-free)."""
        if other.bound:
            raise ValueError("containment in a predicate with bound variables is not decided")
        return not self.conj(other.negate()).is_satisfiable()

    def set_equal(self, other: Constructible) -> bool:
        if self.bound or other.bound:
            return _structural_equal(self, other)
        return self.is_subset(other) and other.is_subset(self)

    # printing ----------------------------------------------------------------

    def __str__(self):
        return format_predicate(self)

    def __repr__(self):
        return f"Constructible({format_predicate(self)!r})"

    def __eq__(self, other):
        if not isinstance(other, Constructible):
            return NotImplemented
        return (
            set(self.cells) == set(other.cells)
            and self.bound == other.bound
            and set(self.variables) == set(other.variables)
        )

    def __hash__(self):
        return hash((frozenset(self.cells), self.bound))


def _cell_system_equal(a: Cell, b: Cell, variables) -> bool:
    if len(a.negated) != len(b.negated):
        return False
    vs = sorted(set(variables) | a.variables() | b.variables())
    if not PolySystem(a.positive, vs).radical_equal(PolySystem(b.positive, vs)):
        return False
    rest = list(b.negated)
    for s in a.negated:
        for k, t in enumerate(rest):
            if PolySystem(s, vs).radical_equal(PolySystem(t, vs)):
                rest.pop(k)
                break
        else:
            return False
    return True


def _structural_equal(x: Constructible, y: Constructible) -> bool:
    """Sufficient test for predicates with bound variables: matching cells."""
    if set(x.bound) != set(y.bound) or len(x.cells) != len(y.cells):
        return False
    vs = set(x.variables) | set(y.variables) | set(x.bound)
    rest = list(y.cells)
    for c in x.cells:
        for k, d in enumerate(rest):
            if _cell_system_equal(c, d, vs):
                rest.pop(k)
                break
        else:
            return False
    return True


# --------------------------------------------------------------------------
# text form:  [exists v, w .] cell | cell ;  cell := atom & atom ;
#             atom := poly = poly | poly != poly | ~(poly = 0 & ...) | true | false


def _cell_str(c: Cell) -> str:
    parts = [f"{p} = 0" for p in c.positive]
    for s in c.negated:
        if len(s) == 1:
            parts.append(f"{s[0]} != 0")
        else:
            parts.append("~(" + " & ".join(f"{p} = 0" for p in s) + ")")
    return " & ".join(parts) if parts else "true"


def format_predicate(r: Constructible) -> str:
    body = " | ".join(_cell_str(c) for c in r.cells) if r.cells else "false"
    if r.bound:
        return "exists " + ", ".join(r.bound) + " . " + body
    return body


def _split_top(text: str, sep: str) -> list[str]:
    out, depth, cur = [], 0, []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if depth == 0 and text.startswith(sep, i):
            out.append("".join(cur))
            cur = []
            i += len(sep)
            continue
        cur.append(ch)
        i += 1
    out.append("".join(cur))
    return out


def _parse_equation(text: str, N) -> tuple[str, Poly]:
    if "!=" in text:
        lhs, rhs = text.split("!=", 1)
        return "ne", parse_poly(lhs, N) - parse_poly(rhs, N)
    if "=" in text:
        lhs, rhs = text.split("=", 1)
        return "eq", parse_poly(lhs, N) - parse_poly(rhs, N)
    raise ScalarSyntaxError(f"expected an equation in {text!r}")


def parse_predicate(text: str, N=1, variables: Sequence[str] = ()) -> Constructible:
    text = text.strip()
    bound: list[str] = []
    if text.startswith("exists "):
        head, _, text = text[len("exists "):].partition(".")
        bound = [v.strip() for v in head.split(",") if v.strip()]
    text = text.strip()
    if text == "false":
        return Constructible([], variables, bound)
    cells = []
    for chunk in _split_top(text, "|"):
        pos, neg = [], []
        for atom in _split_top(chunk, "&"):
            atom = atom.strip()
            if atom == "true":
                continue
            if atom == "false":
                pos.append(Poly.const(1))
                continue
            if atom.startswith("~(") and atom.endswith(")"):
                inner = [_parse_equation(a.strip(), N) for a in _split_top(atom[2:-1], "&")]
                if any(k != "eq" for k, _ in inner):
                    raise ScalarSyntaxError(f"negated block must contain equations: {atom!r}")
                neg.append([p for _, p in inner])
                continue
            kind, p = _parse_equation(atom, N)
            (pos.append(p) if kind == "eq" else neg.append([p]))
        cells.append(Cell(pos, neg))
    return Constructible(cells, variables, bound)
