"""Sparse multivariate polynomials over the field tower and Groebner bases.

A monomial is a tuple of ``(variable, exponent)`` pairs sorted by variable
name, so polynomials do not carry a fixed ambient variable list.  Orders are
built from an explicit variable list.

Coefficients may involve the formal indeterminate ``t``, which is not
invertible.  Reduction then falls back to pseudo-division (scale the dividend
by the divisor's leading coefficient), which computes a Groebner basis over
the fraction field of the coefficient ring.  Ideal questions (membership,
consistency, dimension) are answered over that field, i.e. with ``t``
treated as a generic transcendental.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import GuardrailError, ScalarSyntaxError, TranscendentalInversion
from .field import Scalar, Tower, as_scalar, inv, parse_scalar

MAX_VARIABLES = 16
MAX_DEGREE = 8

Monomial = tuple  # tuple[tuple[str, int], ...]
ONE: Monomial = ()

_ZERO = Scalar.from_fraction(0)
_ONE = Scalar.from_fraction(1)


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def mono_div(m1: Monomial, m2: Monomial) -> Monomial | None:
    """m1 / m2 if m2 divides m1, else None."""
    d = dict(m1)
    for v, e in m2:
        r = d.get(v, 0) - e
        if r < 0:
            return None
        if r:
            d[v] = r
        else:
            del d[v]
    return tuple(sorted(d.items()))


def mono_lcm(m1: Monomial, m2: Monomial) -> Monomial:
    d = dict(m1)
    for v, e in m2:
        if e > d.get(v, 0):
            d[v] = e
    return tuple(sorted(d.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _unit_invertible(c: Scalar) -> bool:
    return not c.has_t()


class Poly:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if not c.is_zero()}
        self._hash = None

    # constructors ----------------------------------------------------------

    @classmethod
    def var(cls, name: str) -> Poly:
        return cls({((name, 1),): _ONE})

    @classmethod
    def const(cls, c) -> Poly:
        c = as_scalar(c)
        return cls({ONE: c})

    @classmethod
    def lift(cls, x) -> Poly:
        if isinstance(x, Poly):
            return x
        return cls.const(x)

    # queries ---------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == ONE for m in self.terms)

    def constant_value(self) -> Scalar:
        return self.terms.get(ONE, _ZERO)

    def variables(self) -> set[str]:
        return {v for m in self.terms for v, _ in m}

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def degree_in(self, var: str) -> int:
        return max((dict(m).get(var, 0) for m in self.terms), default=0)

    # arithmetic ------------------------------------------------------------

    def __add__(self, other):
        other = Poly.lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Poly.lift(other))

    def __rsub__(self, other):
        return Poly.lift(other) - self

    def __mul__(self, other):
        other = Poly.lift(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                c = c1 * c2
                out[m] = out[m] + c if m in out else c
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative polynomial power")
        out = Poly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c) -> Poly:
        c = as_scalar(c)
        return Poly({m: x * c for m, x in self.terms.items()})

    def mul_term(self, m: Monomial, c: Scalar) -> Poly:
        return Poly({mono_mul(m, k): x * c for k, x in self.terms.items()})

    # substitution ------------------------------------------------------------

    def subs(self, mapping: Mapping[str, object]) -> Poly:
        """Substitute variables by scalars or polynomials."""
        if not mapping:
            return self
        cache: dict = {}
        out = Poly()
        for m, c in self.terms.items():
            term = Poly.const(c)
            rest = []
            for v, e in m:
                if v in mapping:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = Poly.lift(mapping[v]) ** e
                    term = term * cache[key]
                else:
                    rest.append((v, e))
            if rest:
                term = term.mul_term(tuple(rest), _ONE)
            out = out + term
        return out

    def evaluate(self, mapping: Mapping[str, Scalar]) -> Scalar:
        p = self.subs(mapping)
        if not p.is_constant():
            missing = sorted(p.variables())
            raise KeyError(f"no value for {', '.join(missing)}")
        return p.constant_value()

    # comparison / printing -------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.lift(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"


# --------------------------------------------------------------------------
# monomial orders


class MonomialOrder:
    """Graded reverse lexicographic or lexicographic order on named variables.

    Earlier entries of ``variables`` are larger.  Variables missing from the
    list are appended in name order.
    """

    def __init__(self, kind: str, variables: Sequence[str]):
        if kind not in ("grevlex", "lex"):
            raise ValueError(f"unknown monomial order {kind!r}")
        self.kind = kind
        self.variables = list(dict.fromkeys(variables))
        self._pos = {v: i for i, v in enumerate(self.variables)}

    def _extend(self, v: str) -> int:
        if v not in self._pos:
            self._pos[v] = len(self.variables)
            self.variables.append(v)
        return self._pos[v]

    def key(self, m: Monomial):
        vec = [0] * len(self.variables)
        for v, e in m:
            i = self._extend(v)
            if i >= len(vec):
                vec.extend([0] * (i + 1 - len(vec)))
            vec[i] = e
        vec.extend([0] * (len(self.variables) - len(vec)))
        if self.kind == "lex":
            return tuple(vec)
        return (sum(vec), tuple(-e for e in reversed(vec)))

    def leading(self, p: Poly) -> tuple[Monomial, Scalar]:
        m = max(p.terms, key=self.key)
        return m, p.terms[m]

    def sorted_terms(self, p: Poly) -> list[tuple[Monomial, Scalar]]:
        return sorted(p.terms.items(), key=lambda mc: self.key(mc[0]), reverse=True)


# --------------------------------------------------------------------------
# reduction and Buchberger


def _normalize(p: Poly, order: MonomialOrder) -> Poly:
    """Make ``p`` monic when its leading coefficient is invertible."""
    if p.is_zero():
        return p
    _, lc = order.leading(p)
    if _unit_invertible(lc):
        return p.scale(inv(lc))
    return p


def reduce(f: Poly, basis: Sequence[Poly], order: MonomialOrder) -> Poly:
    """Full reduction of ``f`` modulo ``basis`` (pseudo-division when needed).

    The result is zero iff ``f`` lies in the ideal over the coefficient field
    of fractions, provided ``basis`` is a Groebner basis.
    """
    leads = [order.leading(g) for g in basis if not g.is_zero()]
    gs = [g for g in basis if not g.is_zero()]
    p = f
    rem = Poly()
    while not p.is_zero():
        m, c = order.leading(p)
        for g, (lm, lc) in zip(gs, leads):
            q = mono_div(m, lm)
            if q is None:
                continue
            if _unit_invertible(lc):
                p = p - g.mul_term(q, c * inv(lc))
            else:
                p = p.scale(lc) - g.mul_term(q, c)
                rem = rem.scale(lc)
            break
        else:
            rem = rem + Poly({m: c})
            p = p - Poly({m: c})
    return rem


def _spoly(f: Poly, g: Poly, order: MonomialOrder) -> Poly:
    mf, cf = order.leading(f)
    mg, cg = order.leading(g)
    lcm = mono_lcm(mf, mg)
    return f.mul_term(mono_div(lcm, mf), cg) - g.mul_term(mono_div(lcm, mg), cf)


def groebner(polys: Iterable[Poly], order: MonomialOrder) -> list[Poly]:
    """Reduced Groebner basis (monic where the leading coefficient is a unit)."""
    basis: list[Poly] = []
    for p in polys:
        p = Poly.lift(p)
        if not p.is_zero():
            basis.append(_normalize(p, order))
    if any(p.is_constant() for p in basis):
        return [Poly.const(1)]
    pairs = [(i, j) for j in range(len(basis)) for i in range(j)]
    while pairs:
        # smallest lcm first keeps intermediate degrees low
        pairs.sort(
            key=lambda ij: order.key(
                mono_lcm(order.leading(basis[ij[0]])[0], order.leading(basis[ij[1]])[0])
            )
        )
        i, j = pairs.pop(0)
        mi, _ = order.leading(basis[i])
        mj, _ = order.leading(basis[j])
        if mono_mul(mi, mj) == mono_lcm(mi, mj):
            continue
        r = reduce(_spoly(basis[i], basis[j], order), basis, order)
        if r.is_zero():
            continue
        r = _normalize(r, order)
        if r.is_constant():
            return [Poly.const(1)]
        basis.append(r)
        k = len(basis) - 1
        pairs.extend((a, k) for a in range(k))
    return _interreduce(basis, order)


def _interreduce(basis: list[Poly], order: MonomialOrder) -> list[Poly]:
    basis = [b for b in basis if not b.is_zero()]
    # drop elements whose leading monomial is divisible by another's
    keep: list[Poly] = []
    for i, g in enumerate(basis):
        mg, _ = order.leading(g)
        redundant = False
        for j, h in enumerate(basis):
            if i == j:
                continue
            mh, _ = order.leading(h)
            if mono_div(mg, mh) is not None and (mh != mg or j < i):
                redundant = True
                break
        if not redundant:
            keep.append(g)
    out = []
    for i, g in enumerate(keep):
        others = keep[:i] + keep[i + 1:]
        m, c = order.leading(g)
        tail = reduce(g - Poly({m: c}), others, order)
        r = _normalize(Poly({m: c}) + tail if _unit_invertible(c) else g, order)
        out.append(r)
    out.sort(key=lambda p: order.key(order.leading(p)[0]), reverse=True)
    return out


# --------------------------------------------------------------------------
# systems


def check_guardrails(polys: Iterable[Poly], variables: Sequence[str]):
    if len(variables) > MAX_VARIABLES:
        raise GuardrailError(f"{len(variables)} variables exceed the limit of {MAX_VARIABLES}")
    for p in polys:
        if p.degree() > MAX_DEGREE:
            raise GuardrailError(f"degree {p.degree()} of {p} exceeds the limit of {MAX_DEGREE}")


@dataclass(frozen=True)
class PolySystem:
    """A finite polynomial system with an explicit, ordered variable list."""

    polys: tuple
    variables: tuple

    def __init__(self, polys: Iterable = (), variables: Iterable[str] | None = None):
        ps = tuple(Poly.lift(p) for p in polys)
        ps = tuple(p for p in ps if not p.is_zero())
        used = set().union(*(p.variables() for p in ps)) if ps else set()
        if variables is None:
            variables = sorted(used)
        variables = tuple(dict.fromkeys(variables))
        missing = used - set(variables)
        if missing:
            raise ValueError(f"variables {sorted(missing)} not declared")
        object.__setattr__(self, "polys", ps)
        object.__setattr__(self, "variables", variables)

    def __str__(self):
        return "{" + ", ".join(str(p) for p in self.polys) + "}"

    def order(self, kind: str = "grevlex") -> MonomialOrder:
        return MonomialOrder(kind, self.variables)

    def guard(self) -> PolySystem:
        check_guardrails(self.polys, self.variables)
        return self

    def buchberger(self, order: str = "grevlex") -> PolySystem:
        self.guard()
        return PolySystem(groebner(self.polys, self.order(order)), self.variables)

    def basis(self) -> list[Poly]:
        return _cached_basis(self.polys, self.variables)

    def is_consistent(self) -> bool:
        """True iff the variety over the algebraic closure is nonempty."""
        gb = self.basis()
        return not (len(gb) == 1 and gb[0].is_constant())

    def contains(self, f: Poly) -> bool:
        return reduce(Poly.lift(f), self.basis(), self.order()).is_zero()

    def radical_contains(self, f: Poly) -> bool:
        f = Poly.lift(f)
        if f.is_zero():
            return True
        y = _fresh("rabinowitsch", self.variables)
        return not PolySystem(
            self.polys + (Poly.const(1) - Poly.var(y) * f,), self.variables + (y,)
        ).is_consistent()

    def ideal_equal(self, other: PolySystem) -> bool:
        return all(other.contains(p) for p in self.polys) and all(
            self.contains(p) for p in other.polys
        )

    def radical_equal(self, other: PolySystem) -> bool:
        return all(other.radical_contains(p) for p in self.polys) and all(
            self.radical_contains(p) for p in other.polys
        )

    def eliminate(self, drop: Iterable[str]) -> PolySystem:
        drop = list(dict.fromkeys(drop))
        bad = set(drop) - set(self.variables)
        if bad:
            raise ValueError(f"cannot eliminate undeclared variables {sorted(bad)}")
        self.guard()
        keep = [v for v in self.variables if v not in drop]
        if not drop:
            return PolySystem(self.basis(), keep)
        order = MonomialOrder("lex", drop + keep)
        gb = groebner(self.polys, order)
        kept = [p for p in gb if not (p.variables() & set(drop))]
        return PolySystem(kept, keep)

    def dimension(self) -> int:
        self.guard()
        return ideal_dimension_of(self.basis(), self.variables, self.order())

    def substitute(self, mapping: Mapping[str, object]) -> PolySystem:
        return PolySystem((p.subs(mapping) for p in self.polys), self.variables)

    def with_variables(self, variables: Iterable[str]) -> PolySystem:
        return PolySystem(self.polys, variables)

    def __and__(self, other: PolySystem) -> PolySystem:
        return PolySystem(
            self.polys + other.polys, tuple(dict.fromkeys(self.variables + other.variables))
        )


_BASIS_CACHE: dict = {}


def _cached_basis(polys: tuple, variables: tuple) -> list[Poly]:
    key = (polys, variables)
    hit = _BASIS_CACHE.get(key)
    if hit is None:
        hit = groebner(polys, MonomialOrder("grevlex", variables))
        if len(_BASIS_CACHE) > 20000:
            _BASIS_CACHE.clear()
        _BASIS_CACHE[key] = hit
    return hit


def _fresh(stem: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    k = 0
    while f"{stem}_{k}" in taken:
        k += 1
    return f"{stem}_{k}"


def ideal_dimension_of(gb: Sequence[Poly], variables: Sequence[str], order: MonomialOrder) -> int:
    """Krull dimension from the leading monomials of a Groebner basis."""
    if len(gb) == 1 and gb[0].is_constant():
        return -1
    leads = [set(v for v, _ in order.leading(g)[0]) for g in gb]
    vs = list(variables)
    for size in range(len(vs), -1, -1):
        for subset in itertools.combinations(vs, size):
            s = set(subset)
            if all(not lead <= s for lead in leads):
                return size
    return 0


def buchberger(sys: PolySystem, order: str = "grevlex") -> PolySystem:
    return sys.buchberger(order)


def eliminate(sys: PolySystem, drop: Iterable[str]) -> PolySystem:
    return sys.eliminate(drop)


def ideal_dimension(sys: PolySystem) -> int:
    return sys.dimension()


def substitute(sys: PolySystem, mapping: Mapping[str, object]) -> PolySystem:
    return sys.substitute(mapping)


def product_system(systems: Sequence[PolySystem]) -> PolySystem:
    """A system whose variety is the union of the given varieties."""
    variables = tuple(dict.fromkeys(v for s in systems for v in s.variables))
    if not systems:
        return PolySystem([Poly.const(1)], variables)
    gens = [Poly.const(1)]
    for s in systems:
        if not s.polys:
            return PolySystem([], variables)
        gens = [g * p for g in gens for p in s.polys]
    return PolySystem(gens, variables)


# --------------------------------------------------------------------------
# printing and parsing


def _mono_str(m: Monomial) -> str:
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


def _needs_parens(c: Scalar) -> bool:
    return len(c.terms) > 1


def format_poly(p: Poly, order: MonomialOrder | None = None) -> str:
    if p.is_zero():
        return "0"
    order = order or MonomialOrder("grevlex", sorted(p.variables()))
    out = []
    for m, c in order.sorted_terms(p):
        neg = False
        if not _needs_parens(c):
            s = str(c)
            if s.startswith("-"):
                neg = True
                c = -c
        cs = str(c)
        if m == ONE:
            body = cs if not _needs_parens(c) else f"({cs})"
        elif cs == "1":
            body = _mono_str(m)
        elif _needs_parens(c):
            body = f"({cs})*{_mono_str(m)}"
        else:
            body = f"{cs}*{_mono_str(m)}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


class _PolyParser:
    def __init__(self, text: str, tower: Tower):
        self.text = text
        self.pos = 0
        self.tower = tower

    def error(self, msg):
        raise ScalarSyntaxError(f"{msg} at offset {self.pos} in {self.text!r}")

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, s: str) -> bool:
        self.peek()
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    def parse(self) -> Poly:
        p = self.expr()
        if self.peek():
            self.error("unexpected trailing input")
        return p

    def expr(self) -> Poly:
        if self.take("-"):
            p = -self.term()
        else:
            self.take("+")
            p = self.term()
        while True:
            if self.take("+"):
                p = p + self.term()
            elif self.take("-"):
                p = p - self.term()
            else:
                return p

    def term(self) -> Poly:
        p = self.factor()
        while True:
            if self.take("*"):
                p = p * self.factor()
            elif self.take("/"):
                d = self.factor()
                if not d.is_constant() or d.is_zero():
                    self.error("division by a non-constant")
                p = p.scale(inv(d.constant_value()))
            else:
                return p

    def factor(self) -> Poly:
        p = self.atom()
        if self.take("^"):
            self.peek()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("expected exponent")
            p = p ** int(self.text[start:self.pos])
        return p

    def atom(self) -> Poly:
        c = self.peek()
        if c == "(":
            self.take("(")
            p = self.expr()
            if not self.take(")"):
                self.error("expected ')'")
            return p
        if c == "-":
            self.take("-")
            return -self.factor()
        if c.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return Poly.const(int(self.text[start:self.pos]))
        if self.text.startswith("sqrt{", self.pos):
            depth = 0
            for k in range(self.pos, len(self.text)):
                if self.text[k] == "{":
                    depth += 1
                elif self.text[k] == "}":
                    depth -= 1
                    if depth == 0:
                        break
            else:
                self.error("unbalanced braces")
            chunk = self.text[self.pos:k + 1]
            self.pos = k + 1
            x = parse_scalar(chunk, self.tower)
            if x.tower is not None:
                self.tower = x.tower
            return Poly.const(x)
        if c.isalpha():
            start = self.pos
            while self.pos < len(self.text) and (
                self.text[self.pos].isalnum() or self.text[self.pos] == "_"
            ):
                self.pos += 1
            name = self.text[start:self.pos]
            if name == "zeta":
                return Poly.const(self.tower.zeta(1))
            if name == "t":
                return Poly.const(Scalar.t())
            return Poly.var(name)
        self.error("unexpected token")


def parse_poly(text: str, N: int | Tower = 1) -> Poly:
    tower = Tower.base(N) if isinstance(N, int) else N
    return _PolyParser(text, tower).parse()


__all__ = [
    "Poly",
    "PolySystem",
    "MonomialOrder",
    "groebner",
    "reduce",
    "buchberger",
    "eliminate",
    "ideal_dimension",
    "substitute",
    "product_system",
    "parse_poly",
    "format_poly",
    "TranscendentalInversion",
]
