"""Syntax trees, parser and printer for the two-sorted formula language.

Variables are sorted by the family prefix before the first underscore:
``e, f, g, h, p, q`` are vector (H) sort, everything else is field sort.
``h_i`` names parameters and is never counted as a free variable.

Terms: numbers, ``zeta``, ``t``, ``sqrt{...}``, variables, ``p(v)`` (base
point of a vector), ``a^n(v)`` / ``adag^n(v)`` (ladder maps), ``+ - * / ^``.
Atoms: ``E(v, x)``, ``lhs = rhs``, ``lhs != rhs``, ``true``, ``false``.
Formulas: ``~``, ``&``, ``|``, ``exists x, y (...)``, ``forall x (...)``.
See ``docs/grammar.ebnf``.

Constant subterms are folded into single ``Const`` nodes, both by the parser
and by the smart constructors, so that ``parse(print(x)) == x``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BadIndex, FormulaSyntaxError, ScalarSyntaxError
from .field import Scalar, Tower, inv, parse_scalar
from .poly import Poly, format_poly

H_FAMILIES = frozenset({"e", "f", "g", "h", "p", "q"})
PARAM_FAMILY = "h"


def family(name: str) -> str:
    return name.split("_", 1)[0]


def is_vector_var(name: str) -> bool:
    return family(name) in H_FAMILIES


# --------------------------------------------------------------------------
# terms


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: Scalar


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Proj(Expr):
    arg: Expr


@dataclass(frozen=True)
class Ladder(Expr):
    op: str  # "a" or "adag"
    power: int
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: int


def _is_const(x: Expr) -> bool:
    return isinstance(x, Const)


def const(v) -> Const:
    return Const(v if isinstance(v, Scalar) else Scalar.from_fraction(v))


def add(*terms: Expr) -> Expr:
    terms = tuple(terms)
    if len(terms) == 1:
        return terms[0]
    if all(_is_const(t) for t in terms):
        s = Scalar.from_fraction(0)
        for t in terms:
            s = s + t.value
        return Const(s)
    return Add(terms)


def neg(x: Expr) -> Expr:
    if _is_const(x):
        return Const(-x.value)
    return Neg(x)


def mul(*factors: Expr) -> Expr:
    factors = tuple(factors)
    if len(factors) == 1:
        return factors[0]
    if all(_is_const(f) for f in factors):
        s = Scalar.from_fraction(1)
        for f in factors:
            s = s * f.value
        return Const(s)
    return Mul(factors)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * inv(b.value))
    return Div(a, b)


def power(b: Expr, k: int) -> Expr:
    if _is_const(b):
        return Const(b.value ** k)
    return Pow(b, k)


# --------------------------------------------------------------------------
# formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class EAtom(Formula):
    vec: Expr
    base: Expr


@dataclass(frozen=True)
class Eq(Formula):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Ne(Formula):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class And(Formula):
    items: tuple


@dataclass(frozen=True)
class Or(Formula):
    items: tuple


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Exists(Formula):
    vars: tuple
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    vars: tuple
    body: Formula


def conj(items: Iterable[Formula]) -> Formula:
    items = tuple(i for i in items if not isinstance(i, Top))
    if not items:
        return Top()
    if len(items) == 1:
        return items[0]
    return And(items)


def disj(items: Iterable[Formula]) -> Formula:
    items = tuple(i for i in items if not isinstance(i, Bottom))
    if not items:
        return Bottom()
    if len(items) == 1:
        return items[0]
    return Or(items)


def exists(vars: Sequence[str], body: Formula) -> Formula:
    return Exists(tuple(vars), body) if vars else body


# --------------------------------------------------------------------------
# sorts and free variables


def expr_sort(x: Expr) -> str:
    """'H' for vector-valued terms, 'F' for field-valued terms."""
    if isinstance(x, Const):
        return "F"
    if isinstance(x, Var):
        return "H" if is_vector_var(x.name) else "F"
    if isinstance(x, Proj):
        if expr_sort(x.arg) != "H":
            raise FormulaSyntaxError("p(...) needs a vector argument")
        return "F"
    if isinstance(x, Ladder):
        if expr_sort(x.arg) != "H":
            raise FormulaSyntaxError(f"{x.op}(...) needs a vector argument")
        return "H"
    if isinstance(x, Add):
        sorts = {expr_sort(t) for t in x.terms}
        if len(sorts) > 1:
            raise FormulaSyntaxError("sum mixes vectors and scalars")
        return sorts.pop()
    if isinstance(x, Neg):
        return expr_sort(x.arg)
    if isinstance(x, Mul):
        hs = sum(1 for f in x.factors if expr_sort(f) == "H")
        if hs > 1:
            raise FormulaSyntaxError("product of two vectors")
        return "H" if hs else "F"
    if isinstance(x, Div):
        if expr_sort(x.den) == "H":
            raise FormulaSyntaxError("division by a vector")
        return expr_sort(x.num)
    if isinstance(x, Pow):
        if expr_sort(x.base) == "H":
            raise FormulaSyntaxError("power of a vector")
        return "F"
    raise TypeError(x)


def expr_vars(x: Expr) -> set[str]:
    if isinstance(x, Var):
        return {x.name}
    if isinstance(x, (Proj, Ladder, Neg)):
        return expr_vars(x.arg)
    if isinstance(x, Add):
        return set().union(*(expr_vars(t) for t in x.terms))
    if isinstance(x, Mul):
        return set().union(*(expr_vars(t) for t in x.factors))
    if isinstance(x, Div):
        return expr_vars(x.num) | expr_vars(x.den)
    if isinstance(x, Pow):
        return expr_vars(x.base)
    return set()


def free_variables(phi: Formula) -> set[str]:
    """Free variables, excluding parameters of the ``h`` family."""
    if isinstance(phi, (Top, Bottom)):
        return set()
    if isinstance(phi, EAtom):
        vs = expr_vars(phi.vec) | expr_vars(phi.base)
    elif isinstance(phi, (Eq, Ne)):
        vs = expr_vars(phi.lhs) | expr_vars(phi.rhs)
    elif isinstance(phi, (And, Or)):
        vs = set().union(*(free_variables(i) for i in phi.items))
    elif isinstance(phi, Not):
        vs = free_variables(phi.arg)
    elif isinstance(phi, (Exists, Forall)):
        vs = free_variables(phi.body) - set(phi.vars)
    else:
        raise TypeError(phi)
    return {v for v in vs if family(v) != PARAM_FAMILY}


def check_sorts(phi: Formula) -> Formula:
    """Raise FormulaSyntaxError on a sort clash; return phi."""
    if isinstance(phi, EAtom):
        if expr_sort(phi.vec) != "H" or expr_sort(phi.base) != "F":
            raise FormulaSyntaxError("E(v, x) needs a vector and a scalar")
    elif isinstance(phi, (Eq, Ne)):
        if expr_sort(phi.lhs) != expr_sort(phi.rhs):
            raise FormulaSyntaxError("equation between different sorts")
    elif isinstance(phi, (And, Or)):
        for i in phi.items:
            check_sorts(i)
    elif isinstance(phi, Not):
        check_sorts(phi.arg)
    elif isinstance(phi, (Exists, Forall)):
        check_sorts(phi.body)
    return phi


# --------------------------------------------------------------------------
# printing

_BARE_CONST = re.compile(r"^(sqrt\{[^{}]*\}|[0-9]+|zeta|t)$")


def _const_str(c: Scalar, top: bool) -> str:
    s = str(c)
    if _BARE_CONST.match(s):
        return s
    return f"({s})"


def print_expr(x: Expr) -> str:
    if isinstance(x, Const):
        return _const_str(x.value, False)
    if isinstance(x, Var):
        return x.name
    if isinstance(x, Proj):
        return f"p({print_expr(x.arg)})"
    if isinstance(x, Ladder):
        return f"{x.op}^{x.power}({print_expr(x.arg)})"
    if isinstance(x, Add):
        out = [_add_child(x.terms[0], first=True)]
        for t in x.terms[1:]:
            if isinstance(t, Const) and len(t.value.terms) == 1 and str(t.value).startswith("-"):
                out.append(" - " + _const_str(-t.value, False))
            elif isinstance(t, Neg):
                out.append(" - " + _add_child(t.arg, first=False, under_minus=True))
            else:
                out.append(" + " + _add_child(t, first=False))
        return "".join(out)
    if isinstance(x, Neg):
        inner = x.arg
        if isinstance(inner, (Add, Neg)):
            return f"-({print_expr(inner)})"
        return "-" + print_expr(inner)
    if isinstance(x, Mul):
        return "*".join(_mul_child(f) for f in x.factors)
    if isinstance(x, Div):
        num = print_expr(x.num) if not isinstance(x.num, (Add, Neg)) else f"({print_expr(x.num)})"
        den = x.den
        dens = print_expr(den) if isinstance(den, (Var, Const, Proj, Ladder, Pow)) else f"({print_expr(den)})"
        return f"{num}/{dens}"
    if isinstance(x, Pow):
        b = x.base
        bs = print_expr(b) if isinstance(b, (Var, Const, Proj, Ladder)) else f"({print_expr(b)})"
        return f"{bs}^{x.exp}"
    raise TypeError(x)


def _add_child(t: Expr, first: bool, under_minus: bool = False) -> str:
    if isinstance(t, Add) or (isinstance(t, Neg) and not first):
        return f"({print_expr(t)})"
    return print_expr(t)


def _mul_child(f: Expr) -> str:
    if isinstance(f, (Add, Neg, Mul, Div)):
        return f"({print_expr(f)})"
    return print_expr(f)


def print_formula(phi: Formula) -> str:
    return _pf(phi, 0)


# precedence: 0 top / or-operand, 1 and-operand, 2 unary operand
def _pf(phi: Formula, ctx: int) -> str:
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, EAtom):
        return f"E({print_expr(phi.vec)}, {print_expr(phi.base)})"
    if isinstance(phi, Eq):
        return f"{print_expr(phi.lhs)} = {print_expr(phi.rhs)}"
    if isinstance(phi, Ne):
        return f"{print_expr(phi.lhs)} != {print_expr(phi.rhs)}"
    if isinstance(phi, Or):
        s = " | ".join(_pf(i, 1) for i in phi.items)
        return s if ctx == 0 else f"({s})"
    if isinstance(phi, And):
        s = " & ".join(_pf(i, 2) for i in phi.items)
        return s if ctx <= 1 else f"({s})"
    if isinstance(phi, Not):
        return "~" + _pf(phi.arg, 3)
    if isinstance(phi, (Exists, Forall)):
        q = "exists" if isinstance(phi, Exists) else "forall"
        return f"{q} {', '.join(phi.vars)} ({_pf(phi.body, 0)})"
    raise TypeError(phi)


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<sqrt>sqrt\{)|(?P<num>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>!=|[()=,&|~*/^+\-]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        if m.lastgroup == "sqrt":
            depth, k = 0, start
            while k < len(text):
                if text[k] == "{":
                    depth += 1
                elif text[k] == "}":
                    depth -= 1
                    if depth == 0:
                        break
                k += 1
            else:
                raise FormulaSyntaxError("unbalanced braces", start)
            out.append(_Tok("sqrt", text[start:k + 1], start))
            pos = k + 1
            continue
        out.append(_Tok(m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(_Tok("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, N: int):
        self.toks = _tokenize(text)
        self.i = 0
        self.tower = Tower.base(N)

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str):
        raise FormulaSyntaxError(msg, self.tok.pos)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "name") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")

    # formulas ---------------------------------------------------------------

    def formula(self) -> Formula:
        items = [self.conjunction()]
        while self.accept("|"):
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self) -> Formula:
        items = [self.unary()]
        while self.accept("&"):
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self) -> Formula:
        if self.accept("~"):
            return Not(self.unary())
        if self.tok.kind == "name" and self.tok.text in ("exists", "forall"):
            q = self.tok.text
            self.i += 1
            names = [self.varname()]
            while self.accept(","):
                names.append(self.varname())
            body = self.unary()
            return (Exists if q == "exists" else Forall)(tuple(names), body)
        return self.atom()

    def varname(self) -> str:
        if self.tok.kind != "name":
            self.error("expected a variable name")
        name = self.tok.text
        self.i += 1
        return name

    def atom(self) -> Formula:
        if self.tok.kind == "name" and self.tok.text in ("true", "false"):
            v = self.tok.text
            self.i += 1
            return Top() if v == "true" else Bottom()
        if self.tok.kind == "name" and self.tok.text == "E" and self.toks[self.i + 1].text == "(":
            self.i += 2
            v = self.expr()
            self.expect(",")
            x = self.expr()
            self.expect(")")
            return EAtom(v, x)
        if self.tok.text == "(":
            save = self.i
            try:
                self.i += 1
                phi = self.formula()
                self.expect(")")
                if self.tok.kind == "op" and self.tok.text in ("=", "!=", "*", "/", "^", "+", "-"):
                    raise FormulaSyntaxError("term, not a formula")
                return phi
            except FormulaSyntaxError:
                self.i = save
        lhs = self.expr()
        if self.accept("="):
            return Eq(lhs, self.expr())
        if self.accept("!="):
            return Ne(lhs, self.expr())
        self.error("expected '=' or '!='")

    # terms -----------------------------------------------------------------

    def expr(self) -> Expr:
        if self.accept("-"):
            terms = [neg(self.term())]
        else:
            terms = [self.term()]
        while True:
            if self.accept("+"):
                terms.append(self.term())
            elif self.accept("-"):
                terms.append(neg(self.term()))
            else:
                break
        return add(*terms)

    def term(self) -> Expr:
        factors = [self.factor()]
        while True:
            if self.accept("*"):
                factors.append(self.factor())
            elif self.accept("/"):
                num = mul(*factors)
                factors = [div(num, self.factor())]
            else:
                break
        return mul(*factors)

    def factor(self) -> Expr:
        b = self.primary()
        if self.accept("^"):
            if self.tok.kind != "num":
                self.error("expected an integer exponent")
            k = int(self.tok.text)
            self.i += 1
            return power(b, k)
        return b

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(Scalar.from_fraction(int(tok.text)))
        if tok.kind == "sqrt":
            self.i += 1
            try:
                v = parse_scalar(tok.text, self.tower)
            except ScalarSyntaxError as exc:
                raise FormulaSyntaxError(str(exc), tok.pos) from None
            if v.tower is not None:
                self.tower = v.tower
            return Const(v)
        if tok.text == "-":
            self.i += 1
            return neg(self.factor())
        if tok.text == "(":
            self.i += 1
            x = self.expr()
            self.expect(")")
            return x
        if tok.kind == "name":
            name = tok.text
            self.i += 1
            if name == "zeta":
                return Const(self.tower.zeta(1))
            if name == "t":
                return Const(Scalar.t())
            if name in ("a", "adag") and self.tok.text in ("^", "("):
                k = 1
                if self.accept("^"):
                    if self.tok.kind != "num":
                        self.error("expected a ladder power")
                    k = int(self.tok.text)
                    self.i += 1
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Ladder(name, k, arg)
            if name == "p" and self.tok.text == "(":
                self.i += 1
                arg = self.expr()
                self.expect(")")
                return Proj(arg)
            return Var(name)
        self.error(f"unexpected token {tok.text or 'end of input'!r}")


def parse_formula(text: str, N: int = 1) -> Formula:
    p = _Parser(text, N)
    phi = p.formula()
    if p.tok.kind != "eof":
        p.error(f"unexpected trailing input {p.tok.text!r}")
    return check_sorts(phi)


def parse_expr(text: str, N: int = 1) -> Expr:
    p = _Parser(text, N)
    x = p.expr()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return x


# --------------------------------------------------------------------------
# polynomial conversion


def poly_to_expr(p: Poly) -> Expr:
    from .poly import MonomialOrder

    if p.is_zero():
        return const(0)
    order = MonomialOrder("grevlex", sorted(p.variables()))
    terms = []
    for m, c in order.sorted_terms(p):
        factors = [Var(v) if e == 1 else Pow(Var(v), e) for v, e in m]
        negative = len(c.terms) == 1 and str(c).startswith("-")
        if negative:
            c = -c
        if not factors:
            t = Const(c)
        elif c == 1:
            t = mul(*factors)
        else:
            t = mul(Const(c), *factors)
        terms.append(neg(t) if negative else t)
    return add(*terms)


def expr_to_poly(x: Expr) -> Poly:
    if isinstance(x, Const):
        return Poly.const(x.value)
    if isinstance(x, Var):
        if is_vector_var(x.name):
            raise FormulaSyntaxError(f"vector variable {x.name} in a field equation")
        return Poly.var(x.name)
    if isinstance(x, Add):
        out = Poly()
        for t in x.terms:
            out = out + expr_to_poly(t)
        return out
    if isinstance(x, Neg):
        return -expr_to_poly(x.arg)
    if isinstance(x, Mul):
        out = Poly.const(1)
        for f in x.factors:
            out = out * expr_to_poly(f)
        return out
    if isinstance(x, Div):
        d = expr_to_poly(x.den)
        if not d.is_constant() or d.is_zero():
            raise FormulaSyntaxError("division by a non-constant")
        return expr_to_poly(x.num).scale(inv(d.constant_value()))
    if isinstance(x, Pow):
        return expr_to_poly(x.base) ** x.exp
    raise FormulaSyntaxError(f"{print_expr(x)} is not a polynomial")


def predicate_to_formula(r) -> Formula:
    """A Constructible as a quantifier-prefixed disjunction of cells."""
    zero = const(0)
    cells = []
    for c in r.cells:
        items: list[Formula] = [Eq(poly_to_expr(p), zero) for p in c.positive]
        for s in c.negated:
            if len(s) == 1:
                items.append(Ne(poly_to_expr(s[0]), zero))
            else:
                items.append(Not(And(tuple(Eq(poly_to_expr(p), zero) for p in s))))
        cells.append(conj(items))
    return exists(r.bound, disj(cells))


def formula_to_predicate(phi: Formula, variables: Sequence[str] = ()):
    """Inverse of predicate_to_formula on its image."""
    from .predicate import Cell, Constructible

    bound: tuple = ()
    if isinstance(phi, Exists):
        bound, phi = phi.vars, phi.body
    if isinstance(phi, Bottom):
        return Constructible([], variables, bound)
    cells_f = phi.items if isinstance(phi, Or) else (phi,)
    cells = []
    for cf in cells_f:
        items = cf.items if isinstance(cf, And) else ((cf,) if not isinstance(cf, Top) else ())
        pos, negs = [], []
        for a in items:
            if isinstance(a, Eq):
                pos.append(expr_to_poly(a.lhs) - expr_to_poly(a.rhs))
            elif isinstance(a, Ne):
                negs.append([expr_to_poly(a.lhs) - expr_to_poly(a.rhs)])
            elif isinstance(a, Not) and isinstance(a.arg, (And, Eq)):
                inner = a.arg.items if isinstance(a.arg, And) else (a.arg,)
                negs.append([expr_to_poly(e.lhs) - expr_to_poly(e.rhs) for e in inner])
            elif isinstance(a, Bottom):
                pos.append(Poly.const(1))
            else:
                raise FormulaSyntaxError(f"not a constructible atom: {print_formula(a)}")
        cells.append(Cell(pos, negs))
    return Constructible(cells, variables, bound)


# --------------------------------------------------------------------------
# builders


def _v(*parts) -> Var:
    return Var("_".join(str(p) for p in parts))


def _chain(prefix: str, i, j, n: int, start: Expr, product: Var) -> tuple[list[str], list[Formula]]:
    """c_k^2 = start + (k - 1) for k = 1..n and c_1*...*c_n = product."""
    names = [f"{prefix}_{i}_{j}_{k}" for k in range(1, n + 1)]
    atoms: list[Formula] = []
    for k, c in enumerate(names, start=1):
        rhs = start if k == 1 else add(start, const(k - 1))
        atoms.append(Eq(Pow(Var(c), 2), rhs))
    atoms.append(Eq(mul(*(Var(c) for c in names)), product))
    return names, atoms


def _check_pairs(pairs: dict, rows: int, cols: int, label: str):
    for (i, j), n in pairs.items():
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise BadIndex(f"{label} index ({i}, {j}) outside 1..{rows} x 1..{cols}")
        if n < 1:
            raise BadIndex(f"{label} multiplicity for ({i}, {j}) must be positive")


def _g_sigma(sigma: dict) -> tuple[list[str], list[Formula]]:
    bound, atoms = [], []
    for (i, j), n in sorted(sigma.items()):
        f_i, g, b = _v("f", i), _v("g", i, j), _v("b", i, j)
        cs, chain = _chain("c", i, j, n, Proj(f_i), b)
        body = chain + [
            EAtom(g, _v("alpha", j)),
            Eq(Ladder("a", n, f_i), mul(b, g)),
            Eq(Ladder("adag", n, g), mul(b, f_i)),
            Eq(g, mul(_v("gamma", i, j), _v("f", j))),
        ]
        atoms.append(Exists(tuple(cs), conj(body)))
        bound.extend([g.name, b.name, f"gamma_{i}_{j}"])
    return bound, atoms


def build_A_sigma(s: int, sigma: dict, partition: Sequence[int]) -> Formula:
    """The conjunction of E(f_i, alpha_i), the ladder clauses and e_ij = lambda_ij f_i.

    ``sigma`` maps pairs (i, j) to multiplicities n_(i,j); ``partition`` lists
    the class sizes s_1..s_s.
    """
    if len(partition) != s:
        raise BadIndex(f"partition has {len(partition)} classes, expected {s}")
    _check_pairs(sigma, s, s, "Sigma")
    atoms: list[Formula] = [EAtom(_v("f", i), _v("alpha", i)) for i in range(1, s + 1)]
    atoms += _g_sigma(sigma)[1]
    for i, si in enumerate(partition, start=1):
        for j in range(1, si + 1):
            atoms.append(Eq(_v("e", i, j), mul(_v("lambda", i, j), _v("f", i))))
    return conj(atoms)


def build_general_core(
    sigma: dict,
    delta1: dict,
    delta2: dict,
    partition: Sequence[int],
    param_partition: Sequence[int],
    R,
) -> Formula:
    """exists f g alpha gamma delta epsilon b p q m o lambda mu (A & D & B & R)."""
    s, t = len(partition), len(param_partition)
    _check_pairs(sigma, s, s, "Sigma")
    _check_pairs(delta1, s, t, "Delta1")
    _check_pairs(delta2, t, s, "Delta2")
    body = [build_A_sigma(s, sigma, partition)]
    for (i, j), n in sorted(delta1.items()):
        f_i, pv, m = _v("f", i), _v("p", i, j), _v("m", i, j)
        cs, chain = _chain("cm", i, j, n, Proj(f_i), m)
        body.append(Exists(tuple(cs), conj(chain + [
            EAtom(pv, Proj(_v("h", j))),
            Eq(Ladder("a", n, f_i), mul(m, pv)),
            Eq(Ladder("adag", n, pv), mul(m, f_i)),
            Eq(pv, mul(_v("delta", i, j), _v("h", j))),
        ])))
    for (i, j), n in sorted(delta2.items()):
        h_i, qv, o = _v("h", i), _v("q", i, j), _v("o", i, j)
        cs, chain = _chain("co", i, j, n, Proj(h_i), o)
        body.append(Exists(tuple(cs), conj(chain + [
            EAtom(qv, _v("alpha", j)),
            Eq(Ladder("a", n, h_i), mul(o, qv)),
            Eq(Ladder("adag", n, qv), mul(o, h_i)),
            Eq(qv, mul(_v("epsilon", i, j), _v("f", j))),
        ])))
    for i, ti in enumerate(param_partition, start=1):
        for j in range(1, ti + 1):
            body.append(Eq(_v("e", s + i, j), mul(_v("mu", i, j), _v("h", i))))
    body.append(predicate_to_formula(R) if not isinstance(R, Formula) else R)
    bound = [f"f_{i}" for i in range(1, s + 1)]
    bound += [f"g_{i}_{j}" for (i, j) in sorted(sigma)]
    bound += [f"alpha_{i}" for i in range(1, s + 1)]
    bound += [f"gamma_{i}_{j}" for (i, j) in sorted(sigma)]
    bound += [f"delta_{i}_{j}" for (i, j) in sorted(delta1)]
    bound += [f"epsilon_{i}_{j}" for (i, j) in sorted(delta2)]
    bound += [f"b_{i}_{j}" for (i, j) in sorted(sigma)]
    bound += [f"p_{i}_{j}" for (i, j) in sorted(delta1)]
    bound += [f"q_{i}_{j}" for (i, j) in sorted(delta2)]
    bound += [f"m_{i}_{j}" for (i, j) in sorted(delta1)]
    bound += [f"o_{i}_{j}" for (i, j) in sorted(delta2)]
    bound += [f"lambda_{i}_{j}" for i, si in enumerate(partition, 1) for j in range(1, si + 1)]
    bound += [f"mu_{i}_{j}" for i, ti in enumerate(param_partition, 1) for j in range(1, ti + 1)]
    return exists(bound, conj(body))


def normalize(text: str, N: int = 1) -> str:
    """Canonical printing of a formula (whitespace and parenthesization)."""
    return print_formula(parse_formula(text, N))
