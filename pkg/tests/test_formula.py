import pytest

from qho.errors import BadIndex, FormulaSyntaxError
from qho.formula import (
    build_A_sigma,
    build_general_core,
    formula_to_predicate,
    free_variables,
    normalize,
    parse_formula,
    predicate_to_formula,
    print_formula,
)
from qho.predicate import parse_predicate

CORPUS = [
    "true",
    "false",
    "x = 1",
    "e_1 = 2*f_1",
    "E(f_1, alpha_1) & e_1_1 = lambda_1_1*f_1",
    "exists f_1, alpha_1 (E(f_1, alpha_1) & a^2(f_1) = b_1_2*g_1_2)",
    "~(x = 0 & y = 0) | x^2 = zeta",
    "forall x (x = 0 | x != 0)",
    "p(e_1) = p(h_1) + 3",
    "adag(e_1) = sqrt{2}*e_2",
    "x/2 - 3/4 = t*y",
    "(x + 1)^3 = -y",
    "exists c (c^2 = alpha_1 + 1 & c*b = 1)",
    "~~(x = 1)",
    "e_1 = (1 + zeta)*e_2",
]


@pytest.mark.parametrize("text", CORPUS)
def test_round_trip(text):
    phi = parse_formula(text, 4)
    printed = print_formula(phi)
    assert parse_formula(printed, 4) == phi
    assert normalize(printed, 4) == printed


def test_free_variables_exclude_parameters_and_bound():
    phi = parse_formula("exists f_1 (e_1 = lambda*f_1 & p(h_1) = p(e_1))")
    assert free_variables(phi) == {"e_1", "lambda"}


def test_sort_errors():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("E(x, alpha_1)")
    with pytest.raises(FormulaSyntaxError):
        parse_formula("x + e_1 = 0")


def test_syntax_error_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("x = = 1")
    assert info.value.position == 4


def test_predicate_bridge():
    r = parse_predicate("exists u . u*x = 1 & y != 0 | x = y", 1, ["x", "y"])
    assert formula_to_predicate(predicate_to_formula(r), ["x", "y"]) == r


def test_core_builders():
    phi = build_A_sigma(2, {(1, 2): 1}, [1, 2])
    assert "a(f_1)" in print_formula(phi) or "a^1(f_1)" in print_formula(phi)
    R = parse_predicate("lambda_1_1 = 1", 2)
    core = build_general_core({(1, 2): 2}, {}, {}, [1, 1], [], R)
    assert free_variables(core) == {"e_1_1", "e_2_1"}
    assert parse_formula(print_formula(core), 2) == core
    with pytest.raises(BadIndex):
        build_A_sigma(2, {(1, 3): 1}, [1, 1])
