"""Exact arithmetic in Q(zeta_N)(sqrt r_1, ..., sqrt r_k)[t].

Elements are stored as sparse dictionaries mapping a monomial key
``(zeta exponent, square-root generators, t degree)`` to a rational
coefficient.  The zeta exponent is kept below phi(N), every generator appears
at most once per monomial (``g*g`` is rewritten to its radicand) and ``t`` is a
free indeterminate.  Generators are identified by their printed name
``sqrt{<radicand>}``, so the same root adjoined in two towers is the same
generator.

Towers are immutable.  Adjoining a root or splitting a branch returns a new
tower; scalars from an ancestor tower are coerced into a descendant one on
demand.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import mpmath

from .errors import (
    ScalarSyntaxError,
    TowerMismatch,
    TranscendentalInversion,
    ZeroInversion,
)

Key = tuple  # (int, tuple[str, ...], int)
Terms = dict  # Key -> Fraction

ONE_KEY: Key = (0, (), 0)

Number = Union[int, Fraction]


# --------------------------------------------------------------------------
# cyclotomic helpers


def _poly_divmod_int(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    assert not any(num), "inexact cyclotomic division"
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divmod_int(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


@lru_cache(maxsize=None)
def _zeta_table(n: int) -> tuple[tuple[tuple[int, Fraction], ...], ...]:
    """Row k expresses zeta^k (0 <= k < n) in the power basis of degree < phi(n)."""
    phi_poly = cyclotomic_polynomial(n)
    phi = len(phi_poly) - 1
    rows = []
    cur = [Fraction(0)] * phi
    cur[0] = Fraction(1)
    for _ in range(n):
        rows.append(tuple((i, c) for i, c in enumerate(cur) if c))
        top = cur[-1]
        cur = [Fraction(0)] + cur[:-1]
        if top:
            for i in range(phi):
                cur[i] -= top * phi_poly[i]
    return tuple(rows)


def euler_phi(n: int) -> int:
    return len(cyclotomic_polynomial(n)) - 1


def _factor_small(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _legendre(a: int, p: int) -> int:
    r = pow(a, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


# --------------------------------------------------------------------------
# towers


class Tower:
    """A triangular tower Q(zeta_N)(g_1, ..., g_k) with g_i^2 = r_i.

    ``generators`` lists ``(name, radicand terms)`` in adjunction order.
    ``resolved`` maps generator names fixed by a branch split to their value.
    """

    __slots__ = ("N", "generators", "resolved", "constraints", "_rad", "_index", "_hash")

    def __init__(self, N: int, generators=(), resolved=(), constraints=()):
        if N < 1:
            raise ValueError("cyclotomic order must be positive")
        self.N = N
        self.generators = tuple(generators)
        self.resolved = tuple(resolved)
        self.constraints = tuple(constraints)
        self._rad = {name: terms for name, terms in self.generators}
        self._index = {name: i for i, (name, _) in enumerate(self.generators)}
        self._hash = None

    # identity -------------------------------------------------------------

    def _content(self):
        return (
            self.N,
            tuple((n, frozenset(t.items())) for n, t in self.generators),
            tuple((n, frozenset(t.items())) for n, t in self.resolved),
        )

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Tower):
            return NotImplemented
        return self._content() == other._content()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._content())
        return self._hash

    def __repr__(self):
        gens = ", ".join(n for n, _ in self.generators)
        return f"Tower(N={self.N}, [{gens}])"

    @staticmethod
    @lru_cache(maxsize=None)
    def base(N: int) -> Tower:
        return Tower(N)

    @property
    def phi(self) -> int:
        return euler_phi(self.N)

    @property
    def generator_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.generators)

    def radicand(self, name: str) -> Scalar:
        return Scalar(self, self._rad[name])

    def is_resolved(self, name: str) -> bool:
        return any(n == name for n, _ in self.resolved)

    # element constructors -------------------------------------------------

    def zeta(self, k: int = 1) -> Scalar:
        return Scalar(self, self._reduce_zeta({(k % self.N, (), 0): Fraction(1)}))

    def t(self, k: int = 1) -> Scalar:
        return Scalar(self, {(0, (), k): Fraction(1)})

    def rational(self, q) -> Scalar:
        return Scalar(self, {ONE_KEY: Fraction(q)} if q else {})

    def roots_of_unity(self) -> list[Scalar]:
        return [self.zeta(k) for k in range(self.N)]

    # raw arithmetic on term dictionaries ----------------------------------

    def _reduce_zeta(self, terms: Terms) -> Terms:
        table = _zeta_table(self.N)
        out: Terms = {}
        for (z, g, t), c in terms.items():
            for e, m in table[z % self.N]:
                key = (e, g, t)
                v = out.get(key, 0) + c * m
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return out

    def _add(self, x: Terms, y: Terms, sign: int = 1) -> Terms:
        out = dict(x)
        for k, c in y.items():
            v = out.get(k, 0) + sign * c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return out

    def _mul(self, x: Terms, y: Terms) -> Terms:
        if not x or not y:
            return {}
        if len(y) == 1 and ONE_KEY in y:
            c = y[ONE_KEY]
            return {k: v * c for k, v in x.items()}
        if len(x) == 1 and ONE_KEY in x:
            c = x[ONE_KEY]
            return {k: v * c for k, v in y.items()}
        out: Terms = {}
        needs_zeta = False
        for (z1, g1, t1), c1 in x.items():
            for (z2, g2, t2), c2 in y.items():
                c = c1 * c2
                z = z1 + z2
                t = t1 + t2
                common = set(g1).intersection(g2) if g1 and g2 else ()
                if not common:
                    g = tuple(sorted(g1 + g2)) if g1 and g2 else (g1 or g2)
                    if z >= self.phi:
                        needs_zeta = True
                    key = (z, g, t)
                    v = out.get(key, 0) + c
                    if v:
                        out[key] = v
                    else:
                        out.pop(key, None)
                    continue
                sym = tuple(sorted(set(g1).symmetric_difference(g2)))
                prod: Terms = {(0, (), 0): c}
                for name in sorted(common):
                    prod = self._mul(prod, self._rad[name])
                prod = self._mul(prod, self._reduce_zeta({(z % self.N, sym, t): Fraction(1)}))
                out = self._add(out, prod)
        if needs_zeta:
            out = self._reduce_zeta(out)
        return out

    def coerce_terms(self, terms: Terms) -> Terms:
        """Rewrite terms so no resolved generator remains."""
        if not self.resolved:
            return terms
        values = dict(self.resolved)
        if not any(n in values for (_, g, _), _ in terms.items() for n in g):
            return terms
        out: Terms = {}
        for (z, g, t), c in terms.items():
            factor: Terms = {(z, tuple(n for n in g if n not in values), t): c}
            for n in g:
                if n in values:
                    factor = self._mul(factor, values[n])
            out = self._add(out, factor)
        return out

    # extension ------------------------------------------------------------

    def _with_generator(self, name: str, radicand: Terms) -> Tower:
        return Tower(
            self.N,
            self.generators + ((name, radicand),),
            self.resolved,
            self.constraints,
        )

    def _formal_root(self, r: Scalar, name: str | None = None) -> tuple[Tower, Scalar]:
        name = name or f"sqrt{{{r}}}"
        values = dict(self.resolved)
        if name in values:
            return self, Scalar(self, values[name])
        if name in self._rad:
            return self, Scalar(self, {(0, (name,), 0): Fraction(1)})
        tower = self._with_generator(name, self.coerce_terms(r._terms))
        return tower, Scalar(tower, {(0, (name,), 0): Fraction(1)})

    def _prime_root(self, p: int) -> tuple[Tower, Scalar]:
        """Square root of -1 or of a prime p, inside Q(zeta_N) when possible."""
        N = self.N
        if p == -1:
            if N % 4 == 0:
                return self, self.zeta(N // 4)
            return self._formal_root(self.rational(-1))
        if p == 2:
            if N % 8 == 0:
                return self, self.zeta(N // 8) + self.zeta(-(N // 8))
            return self._formal_root(self.rational(2))
        if N % p == 0:
            step = N // p
            gauss = self.rational(0)
            for a in range(1, p):
                gauss = gauss + _legendre(a, p) * self.zeta(a * step)
            if p % 4 == 1:
                return self, gauss
            # gauss^2 = -p, so sqrt(p) = gauss / sqrt(-1) = -sqrt(-1) * gauss
            tower, i = self._prime_root(-1)
            return tower, -(i * gauss)
        return self._formal_root(self.rational(p))

    def sqrt(self, r, formal: bool = False) -> tuple[Tower, Scalar]:
        """Return ``(tower', g)`` with ``g*g == r`` in ``tower'``.

        Rational radicands are reduced to square roots of -1 and primes so that
        multiplicative relations among rational roots are never lost.  Other
        radicands get a formal generator; re-adjoining the same radicand
        returns the same generator.
        """
        r = as_scalar(r, self)
        if r.tower is not None and r.tower != self:
            tower = join_towers(self, r.tower)
            return tower.sqrt(r, formal)
        if r.is_zero():
            return self, self.rational(0)
        if formal or not r.is_rational():
            return self._formal_root(r)
        q = r.as_fraction()
        tower = self
        out = self.rational(1)
        if q < 0:
            tower, i = tower._prime_root(-1)
            out = out * i
            q = -q
        square = Fraction(1)
        for part, sign in ((q.numerator, 1), (q.denominator, -1)):
            for p, e in _factor_small(part).items():
                square *= Fraction(p) ** (sign * (e // 2))
                if e % 2:
                    tower, root = tower._prime_root(p)
                    out = out * root
        # sqrt(a/b) for odd b: sqrt(1/p) = sqrt(p)/p
        for p, e in _factor_small(q.denominator).items():
            if e % 2:
                square /= p
        return tower, Scalar(tower, tower.coerce_terms((out * square)._terms))

    def resolve(self, name: str, value: Scalar, note: str = "") -> Tower:
        """Branch split: fix generator ``name`` to ``value`` (value^2 == radicand)."""
        vals = dict(self.resolved)
        vals[name] = self.coerce_terms(value._terms)
        tmp = Tower(self.N, self.generators, tuple(vals.items()), self.constraints)
        gens = tuple((n, tmp.coerce_terms(t)) for n, t in self.generators)
        res = tuple((n, tmp.coerce_terms(t)) for n, t in vals.items())
        msg = note or f"{name} := {value}"
        return Tower(self.N, gens, res, self.constraints + (msg,))


@lru_cache(maxsize=4096)
def _join_cached(a: Tower, b: Tower) -> Tower:
    if a.N != b.N:
        raise TowerMismatch(f"towers over different cyclotomic orders {a.N} and {b.N}")
    gens = list(a.generators)
    names = set(a.generator_names)
    for name, terms in b.generators:
        if name not in names:
            gens.append((name, terms))
            names.add(name)
    res = dict(a.resolved)
    for name, terms in b.resolved:
        if name in res and res[name] != terms:
            raise TowerMismatch(f"incompatible branch choices for {name}")
        res[name] = terms
    constraints = a.constraints + tuple(c for c in b.constraints if c not in a.constraints)
    tower = Tower(a.N, gens, tuple(res.items()), constraints)
    if res:
        tower = Tower(
            a.N,
            tuple((n, tower.coerce_terms(t)) for n, t in tower.generators),
            tuple((n, tower.coerce_terms(t)) for n, t in tower.resolved),
            constraints,
        )
    return tower


def join_towers(a: Tower | None, b: Tower | None) -> Tower | None:
    if a is None:
        return b
    if b is None or a is b or a == b:
        return a
    return _join_cached(a, b)


# --------------------------------------------------------------------------
# scalars


_RATIONAL_CTX = Tower(1)


class Scalar:
    """Immutable element of a tower.

    ``tower`` is ``None`` for elements free of zeta and square-root generators
    (rationals and polynomials in t); such elements combine with any tower.
    """

    __slots__ = ("tower", "_terms", "_hash")

    def __init__(self, tower: Tower | None, terms: Terms):
        tower_needed = tower is not None and (
            bool(tower.resolved) or any(k[0] or k[1] for k in terms)
        )
        self.tower = tower if tower_needed else None
        self._terms = terms
        self._hash = None

    # construction ---------------------------------------------------------

    @classmethod
    def from_fraction(cls, q) -> Scalar:
        q = Fraction(q)
        return cls(None, {ONE_KEY: q} if q else {})

    @classmethod
    def t(cls, k: int = 1) -> Scalar:
        return cls(None, {(0, (), k): Fraction(1)})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    # predicates -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE_KEY in self._terms)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._terms.get(ONE_KEY, Fraction(0))

    def is_integer(self) -> bool:
        return self.is_rational() and self.as_fraction().denominator == 1

    def has_t(self) -> bool:
        return any(k[2] for k in self._terms)

    def generators(self) -> set[str]:
        return {n for k in self._terms for n in k[1]}

    # arithmetic -----------------------------------------------------------

    def _ctx(self, other: Scalar) -> tuple[Tower | None, Terms, Terms]:
        tower = join_towers(self.tower, other.tower)
        if tower is None:
            return None, self._terms, other._terms
        x = self._terms if self.tower == tower else tower.coerce_terms(self._terms)
        y = other._terms if other.tower == tower else tower.coerce_terms(other._terms)
        return tower, x, y

    def __add__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        tower, x, y = self._ctx(other)
        return Scalar(tower, (tower or _RATIONAL_CTX)._add(x, y))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.tower, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        tower, x, y = self._ctx(other)
        return Scalar(tower, (tower or _RATIONAL_CTX)._add(x, y, -1))

    def __rsub__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        tower, x, y = self._ctx(other)
        return Scalar(tower, (tower or _RATIONAL_CTX)._mul(x, y))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self * inv(other)

    def __rtruediv__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return other * inv(self)

    def __pow__(self, k: int):
        if k < 0:
            return inv(self) ** (-k)
        out = Scalar.from_fraction(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison -----------------------------------------------------------

    def __eq__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        if self.tower == other.tower:
            return self._terms == other._terms
        _, x, y = self._ctx(other)
        return x == y

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def sort_key(self) -> str:
        """An arbitrary but fixed total order (fields of characteristic 0 have none)."""
        return format_scalar(self)

    # printing -------------------------------------------------------------

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return f"Scalar({format_scalar(self)!r})"

    # numerics -------------------------------------------------------------

    def to_complex(self, dps: int = 40, t_value=None):
        """Numeric embedding used only as a sanity harness."""
        with mpmath.workdps(dps):
            return _numeric(self, t_value)


def as_scalar(x, tower: Tower | None = None):
    if isinstance(x, Scalar):
        return x
    if isinstance(x, bool):
        return NotImplemented
    if isinstance(x, (int, Fraction)):
        return Scalar.from_fraction(x)
    if isinstance(x, str):
        return parse_scalar(x, tower or Tower.base(1))
    return NotImplemented


def _split_top(x: Scalar, name: str) -> tuple[Scalar, Scalar]:
    a: Terms = {}
    b: Terms = {}
    for (z, g, t), c in x._terms.items():
        if name in g:
            b[(z, tuple(n for n in g if n != name), t)] = c
        else:
            a[(z, g, t)] = c
    return Scalar(x.tower, a), Scalar(x.tower, b)


def _conjugate(x: Scalar, j: int) -> Scalar:
    tower = x.tower
    terms: Terms = {}
    for (z, g, t), c in x._terms.items():
        terms[(z * j % tower.N, g, t)] = terms.get((z * j % tower.N, g, t), 0) + c
    return Scalar(tower, tower._reduce_zeta(terms))


def _inv_base(x: Scalar) -> Scalar:
    if x.has_t():
        if len(x._terms) == 1:
            raise TranscendentalInversion(f"{x} is not invertible: t is a polynomial indeterminate")
        raise TranscendentalInversion(f"{x} involves t and has no polynomial inverse")
    if x.is_rational():
        return Scalar(x.tower, {ONE_KEY: 1 / x.as_fraction()})
    tower = x.tower
    others = Scalar.from_fraction(1)
    for j in range(2, tower.N):
        if math.gcd(j, tower.N) == 1:
            others = others * _conjugate(x, j)
    norm = x * others
    assert norm.is_rational(), "cyclotomic norm must be rational"
    return others * Scalar.from_fraction(1 / norm.as_fraction())


def inv(x) -> Scalar:
    """Exact inverse.

    When ``x = a + b*g`` turns out to be a zero divisor (``a^2 == b^2 * r``),
    the tower is split: the generator ``g`` is fixed to ``a/b``, the branch in
    which ``x`` is nonzero, and the inverse is returned in that branch.
    """
    x = as_scalar(x)
    if x.is_zero():
        raise ZeroInversion("inverse of zero")
    tower = x.tower
    if tower is None or not x.generators():
        return _inv_base(x)
    top = max(x.generators(), key=lambda n: tower._index[n])
    a, b = _split_top(x, top)
    r = tower.radicand(top)
    d = a * a - b * b * r
    if d.is_zero():
        value = a * inv(b)
        branch = join_towers(tower, value.tower).resolve(
            top, value, f"{top} := {value} (split of {top}^2 - ({r}))"
        )
        return inv(Scalar(branch, branch.coerce_terms(x._terms)))
    y = inv(d)
    g = Scalar(tower, {(0, (top,), 0): Fraction(1)})
    return (a - b * g) * y


def adjoin_sqrt(tower: Tower, r, formal: bool = False) -> tuple[Tower, Scalar]:
    return tower.sqrt(r, formal=formal)


def primitive_root_of_unity(N: int) -> Scalar:
    if N < 1:
        raise ValueError("N must be positive")
    return Tower.base(N).zeta(1)


def root_of_unity_index(x: Scalar, N: int) -> int | None:
    """Return k with ``x == zeta_N^k``, or None."""
    base = Tower.base(N)
    for k in range(N):
        if base.zeta(k) == x:
            return k
    return None


# --------------------------------------------------------------------------
# printing and parsing


def _monomial_str(z: int, g: tuple[str, ...], t: int, tower: Tower | None) -> list[str]:
    parts = []
    if z:
        parts.append("zeta" if z == 1 else f"zeta^{z}")
    if g:
        order = tower._index if tower is not None else {}
        parts.extend(sorted(g, key=lambda n: (order.get(n, 0), n)))
    if t:
        parts.append("t" if t == 1 else f"t^{t}")
    return parts


def _term_order(key: Key, tower: Tower | None):
    z, g, t = key
    order = tower._index if tower is not None else {}
    return (-t, len(g), tuple(sorted(order.get(n, 0) for n in g)), g, z)


def format_scalar(x: Scalar) -> str:
    if not x._terms:
        return "0"
    pieces = []
    for key in sorted(x._terms, key=lambda k: _term_order(k, x.tower)):
        c = x._terms[key]
        mono = _monomial_str(*key, x.tower)
        neg = c < 0
        a = -c if neg else c
        if not mono:
            body = str(a)
        elif a == 1:
            body = "*".join(mono)
        elif a.denominator == 1:
            body = f"{a}*" + "*".join(mono)
        else:
            body = f"{a.numerator}/{a.denominator}*" + "*".join(mono)
        if not pieces:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    return "".join(pieces)


class _ScalarParser:
    def __init__(self, text: str, tower: Tower):
        self.text = text
        self.pos = 0
        self.tower = tower

    def error(self, msg):
        raise ScalarSyntaxError(f"{msg} at offset {self.pos} in {self.text!r}")

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, s: str) -> bool:
        self.skip()
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    def lift(self, x: Scalar) -> Scalar:
        self.tower = join_towers(self.tower, x.tower) or self.tower
        return x

    def parse(self) -> Scalar:
        x = self.expr()
        if self.peek():
            self.error("unexpected trailing input")
        return x

    def expr(self) -> Scalar:
        if self.take("-"):
            x = -self.term()
        else:
            self.take("+")
            x = self.term()
        while True:
            if self.take("+"):
                x = x + self.term()
            elif self.take("-"):
                x = x - self.term()
            else:
                return x

    def term(self) -> Scalar:
        x = self.factor()
        while True:
            if self.take("*"):
                x = x * self.factor()
            elif self.take("/"):
                x = x / self.factor()
            else:
                return x

    def factor(self) -> Scalar:
        x = self.atom()
        if self.take("^"):
            self.skip()
            start = self.pos
            if self.text.startswith("-", self.pos):
                self.pos += 1
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("expected integer exponent")
            x = x ** int(self.text[start:self.pos])
        return x

    def atom(self) -> Scalar:
        c = self.peek()
        if c == "(":
            self.take("(")
            x = self.expr()
            if not self.take(")"):
                self.error("expected ')'")
            return x
        if c == "-":
            self.take("-")
            return -self.factor()
        if c.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return Scalar.from_fraction(int(self.text[start:self.pos]))
        if self.take("sqrt{"):
            inner = self.expr()
            if not self.take("}"):
                self.error("expected '}'")
            tower, root = join_towers(self.tower, inner.tower).sqrt(inner)
            self.tower = tower
            return root
        if self.take("zeta"):
            return self.lift(self.tower.zeta(1))
        if self.take("t"):
            return Scalar.t()
        self.error("unexpected token")


def parse_scalar(text: str, tower: Tower | int | None = None) -> Scalar:
    """Parse the textual scalar syntax: ``p/q``, ``zeta``, ``t``, ``sqrt{...}``."""
    if isinstance(tower, int):
        tower = Tower.base(tower)
    tower = tower or Tower.base(1)
    return _ScalarParser(text, tower).parse()


# --------------------------------------------------------------------------
# numeric harness

_DEFAULT_T = None


def _numeric(x: Scalar, t_value=None):
    global _DEFAULT_T
    if t_value is None:
        if _DEFAULT_T is None or _DEFAULT_T[0] != mpmath.mp.dps:
            _DEFAULT_T = (mpmath.mp.dps, mpmath.mpf(1) / 7 + mpmath.e * 1j / 3)
        t_value = _DEFAULT_T[1]
    tower = x.tower
    gen_values: dict[str, object] = {}
    if tower is not None:
        zeta = mpmath.expj(2 * mpmath.pi / tower.N)
        for name, rad in tower.generators:
            r = _numeric_terms(rad, zeta, gen_values, t_value)
            gen_values[name] = mpmath.sqrt(r)
        for name, val in tower.resolved:
            gen_values[name] = _numeric_terms(val, zeta, gen_values, t_value)
    else:
        zeta = mpmath.mpc(1)
    return _numeric_terms(x._terms, zeta, gen_values, t_value)


def _numeric_terms(terms: Terms, zeta, gens, t_value):
    total = mpmath.mpc(0)
    for (z, g, t), c in terms.items():
        v = mpmath.mpf(c.numerator) / c.denominator * zeta**z * t_value**t
        for n in g:
            v *= gens[n]
        total += v
    return total


def scalars_close(x: Scalar, y: Scalar, dps: int = 40) -> bool:
    with mpmath.workdps(dps):
        return abs(_numeric(x) - _numeric(y)) < mpmath.mpf(10) ** (-(dps - 10))


def sum_scalars(xs: Iterable[Scalar]) -> Scalar:
    out = Scalar.from_fraction(0)
    for x in xs:
        out = out + x
    return out
