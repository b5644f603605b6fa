import random

import pytest
import sympy

from qho.errors import GuardrailError
from qho.poly import (
    MonomialOrder,
    Poly,
    PolySystem,
    buchberger,
    eliminate,
    format_poly,
    ideal_dimension,
    parse_poly,
    product_system,
    reduce,
    substitute,
)

X, Y, Z = sympy.symbols("x y z")
SYMS = {"x": X, "y": Y, "z": Z}


def to_sympy(p: Poly):
    return sympy.sympify(format_poly(p).replace("^", "**"), locals=SYMS)


def random_poly(rng, variables, degree=3, terms=3):
    out = Poly.const(rng.randint(-3, 3))
    for _ in range(terms):
        mono = Poly.const(rng.choice([-2, -1, 1, 2, 3]))
        for v in variables:
            mono = mono * Poly.var(v) ** rng.randint(0, degree // len(variables) + 1)
        if mono.degree() <= degree:
            out = out + mono
    return out


def test_trivial_and_small_bases():
    x = Poly.var("x")
    assert buchberger(PolySystem([x - 1], ["x"])).polys == (x - 1,)
    gb = buchberger(PolySystem([x**2 - 1, x - 1], ["x"]))
    assert gb.polys == (x - 1,)


def test_elimination_example():
    sys = PolySystem([parse_poly("y - x^2"), parse_poly("y^2 - x^3")], ["y", "x"])
    gb = buchberger(sys, "lex")
    assert parse_poly("x^4 - x^3") in gb.polys
    assert eliminate(sys, ["y"]).polys == (parse_poly("x^4 - x^3"),)


@pytest.mark.parametrize("seed", range(25))
def test_groebner_agrees_with_sympy(seed):
    rng = random.Random(seed)
    vs = ["x", "y", "z"][: rng.randint(1, 3)]
    polys = [random_poly(rng, vs) for _ in range(rng.randint(1, 3))]
    polys = [p for p in polys if not p.is_zero()] or [Poly.var("x")]
    sys = PolySystem(polys, vs)
    ours = {to_sympy(p) for p in buchberger(sys).polys}
    ref = sympy.groebner([to_sympy(p) for p in polys], *[SYMS[v] for v in vs], order="grevlex")
    theirs = {sympy.expand(g / sympy.Poly(g, *[SYMS[v] for v in vs]).LC(order="grevlex")) for g in ref.exprs}
    assert {sympy.expand(p) for p in ours} == theirs


@pytest.mark.parametrize("seed", range(15))
def test_membership_agrees_with_sympy(seed):
    rng = random.Random(100 + seed)
    vs = ["x", "y"]
    polys = [random_poly(rng, vs) for _ in range(2)]
    polys = [p for p in polys if not p.is_zero()] or [Poly.var("x")]
    f = random_poly(rng, vs) * polys[0] + random_poly(rng, vs)
    sys = PolySystem(polys, vs)
    ref = sympy.groebner([to_sympy(p) for p in polys], X, Y, order="grevlex")
    assert sys.contains(f) == ref.contains(to_sympy(f))
    assert sys.contains(polys[0] * f)


@pytest.mark.parametrize(
    "polys,variables,dim",
    [(["x*y"], ["x", "y"], 1), (["x - 1", "y - 2"], ["x", "y"], 0), (["1"], ["x"], -1),
     ([], ["x", "y", "z"], 3), (["x^2 + y^2 - 1"], ["x", "y", "z"], 2)],
)
def test_dimension(polys, variables, dim):
    assert ideal_dimension(PolySystem([parse_poly(p) for p in polys], variables)) == dim


def test_cyclotomic_coefficients_and_substitution():
    p = parse_poly("x^2 + 1", 4)
    q = substitute(PolySystem([p], ["x"]), {"x": parse_poly("zeta", 4)})
    assert all(r.is_zero() for r in q.polys) or not q.polys
    sys = PolySystem([parse_poly("x^2 - zeta", 4)], ["x"])
    assert sys.is_consistent()
    assert sys.contains(parse_poly("x^4 + 1", 4))


def test_radical_membership():
    x = Poly.var("x")
    sys = PolySystem([x**2], ["x"])
    assert not sys.contains(x)
    assert sys.radical_contains(x)


def test_product_is_union_of_varieties():
    a = PolySystem([parse_poly("x - 1")], ["x"])
    b = PolySystem([parse_poly("x + 1")], ["x"])
    u = product_system([a, b])
    assert u.radical_equal(PolySystem([parse_poly("x^2 - 1")], ["x"]))


def test_reduce_is_remainder():
    order = MonomialOrder("grevlex", ["x", "y"])
    f = parse_poly("x^3 + y")
    r = reduce(f, [parse_poly("x - y")], order)
    assert r == parse_poly("y^3 + y")


def test_guardrails():
    big = PolySystem([Poly.var(f"v{i}") for i in range(20)], [f"v{i}" for i in range(20)])
    with pytest.raises(GuardrailError):
        buchberger(big)


@pytest.mark.parametrize("text", ["x^2*y - 3/2*y + 1", "zeta*x - zeta^2", "(x + 1)^3 - t*y"])
def test_poly_round_trip(text):
    p = parse_poly(text, 3)
    assert parse_poly(format_poly(p), 3) == p
