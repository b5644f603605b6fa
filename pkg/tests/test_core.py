import itertools
import random

import pytest

from harness import Q, fragments, symbolic_fibers, tuples, vector_pool
from qho.core import (
    GeneralCoreFormula,
    align_params,
    conj_split,
    core_formula,
    delta_action,
    evaluate,
    group_act,
    group_generators,
    invariant_closure,
    is_invariant,
    merge,
    negation_normal_form,
    project,
    substitute_params,
    witness_configurations,
)
from qho.errors import BadIndex, FiberMismatch, NotInvariant, OutOfFragment
from qho.field import Tower
from qho.predicate import parse_predicate
from qho.structure import BundleVector, build_fragment


def pred(text, g):
    return parse_predicate(text, g.N, g.variables())


def test_delta_action_example():
    g = core_formula(2, [(0,)], "lambda_1_1 = 2")
    assert delta_action(g, [-1]).R.set_equal(pred("lambda_1_1 = -2", g))
    assert delta_action(g, [1]).R == g.R


def test_closure_example():
    g = core_formula(2, [(0,)], "lambda_1_1 = 2")
    c = invariant_closure(g)
    assert c.R.set_equal(pred("lambda_1_1^2 = 4", g))
    assert is_invariant(c) and not is_invariant(g)
    assert is_invariant(core_formula(2, [(0,)], "lambda_1_1^2 = 4"))


def test_ladder_configurations_for_even_N_come_in_sign_pairs():
    frag = build_fragment(2, ["0"], 3)
    g = core_formula(2, [(0,), (1,)], "true", sigma=[(1, 2, 1)])
    e = [BundleVector.canonical(2, 0, 2), BundleVector.canonical(3, 0, 2)]
    bs = {str(c["b_1_2"]) for c in witness_configurations(g, e, [], frag)}
    assert len(bs) == 2
    # chain through base 0: b = 0 and gamma free
    e0 = [BundleVector.canonical(0, 0, 2), BundleVector.canonical(1, 0, 2)]
    cfgs = list(witness_configurations(g, e0, [], frag))
    assert {c["b_1_2"].is_zero() for c in cfgs} == {True}
    assert len({str(c["gamma_1_2"]) for c in cfgs}) == 2


def test_sign_flip_breaks_plain_delta_invariance():
    g = core_formula(2, [(0,), (1,)], "b_1_2^2 = 2 & b_1_2 = sqrt{2}", sigma=[(1, 2, 1)])
    # b is untouched by the basis change yet the sign flip moves it
    for k in range(2):
        for j in range(2):
            assert delta_action(g, [(-1) ** k, (-1) ** j]).R == g.R
    assert not is_invariant(g)


def test_evaluate_out_of_fragment():
    frag = build_fragment(2, ["0"], 1)
    g = core_formula(2, [(0,), ()], "true", sigma=[(1, 2, 3)])
    e = [BundleVector.canonical(0, 0, 2)]
    with pytest.raises(OutOfFragment):
        evaluate(g, e, [], frag)
    assert evaluate(g, e, [], frag, strict=False) is False


def test_bad_indices():
    with pytest.raises(BadIndex):
        core_formula(2, [(0,), (1,)], "true", sigma=[(1, 3, 1)])
    with pytest.raises(BadIndex):
        core_formula(2, [(0,), (2,)], "true")
    with pytest.raises(BadIndex):
        core_formula(2, [(0,)], "zeta_9 = 1")


def test_conj_split_requires_invariance():
    g1 = core_formula(2, [(0,)], "alpha_1 = 1")
    with pytest.raises(NotInvariant):
        conj_split(g1, core_formula(2, [(0,)], "lambda_1_1 = 2"))
    full = core_formula(2, [(0,)], "true")
    assert conj_split(g1, full).R == g1.R


def test_merge_joins_classes():
    g1 = invariant_closure(core_formula(2, [(0,), (1,)], "lambda_1_1 = lambda_2_1"))
    g2 = invariant_closure(core_formula(2, [(0, 1)], "lambda_1_1 = 2*lambda_1_2"))
    m = merge(g1, g2)
    assert m.classes == ((0, 1),)
    frag = build_fragment(2, ["0"], 2)
    for e in tuples(frag, 2):
        assert evaluate(m, e, [], frag) == (evaluate(g1, e, [], frag) and evaluate(g2, e, [], frag))


def test_project_cases_on_oracle():
    frag = build_fragment(2, ["0"], 2, "random:1")
    g = core_formula(2, [(0, 1), (2,)], "lambda_1_1 = 2*lambda_1_2 & alpha_2 = 1", sigma=[(1, 2, 1)])
    p3 = project(g, 1, [2])
    p4 = project(g, 2, [1])
    assert (p3.case, p4.case) == (3, 4)
    assert p4.formula.classes[1] == ()  # linked class kept without members
    for e in tuples(frag, 2):
        lhs = evaluate(p3.formula, e, [], frag, False)
        rhs = any(evaluate(g, (e[0], w, e[1]), [], frag, False) for w in symbolic_fibers(frag, "w"))
        assert lhs == rhs
    u = core_formula(2, [(0,), (1,)], "lambda_1_1^2 = alpha_2")
    p = project(u, 2, [1])
    assert p.formula.s == 1 and p.note == "class deleted"
    for (v,) in tuples(frag, 1):
        rhs = any(evaluate(u, (v, w), [], frag, False) for w in symbolic_fibers(frag, "w"))
        assert evaluate(p.formula, (v,), [], frag, False) == rhs


def test_substitute_params_and_parameter_projection():
    frag = build_fragment(4, ["0"], 2, "random:8")
    g = core_formula(4, [(0, 1, 2)], "lambda_1_1 = zeta*lambda_1_2 | lambda_1_3^2 = 4")
    v = BundleVector.canonical(1, 2, 4).scale(2)
    ds = substitute_params(g, [0], [v], frag)
    assert len(ds) == 4 and all(d.t == 1 and d.param_classes == ((0, 1),) for d in ds)
    for e in tuples(frag, 2):
        assert any(evaluate(d, e, [], frag) for d in ds) == evaluate(g, (v,) + e, [], frag)
    d = ds[0]
    p1, p2 = project(d, 1, [1]), project(d, 1, [1, 2])
    assert (p1.case, p2.case) == (1, 2)
    for (w,) in tuples(frag, 1):
        rhs = any(evaluate(d, (x, w), [], frag, False) for x in symbolic_fibers(frag, "x"))
        assert evaluate(p1.formula, (w,), [], frag, False) == rhs


def test_substitution_into_linked_classes():
    frag = build_fragment(2, ["0"], 3, "random:5")
    g = core_formula(2, [(0,), (1,)], "gamma_1_2 = 1 & lambda_2_1 = 1", sigma=[(1, 2, 1)])
    for v in vector_pool(frag):
        ds = substitute_params(g, [0], [v], frag)
        assert all(d.delta2 for d in ds)
        for (w,) in tuples(frag, 1):
            assert any(evaluate(d, (w,), [], frag, False) for d in ds) == evaluate(g, (v, w), [], frag, False)
    # values of one class in different fibers: false
    h = core_formula(2, [(0, 1)], "true")
    assert substitute_params(h, [0, 1], [vector_pool(frag)[0], vector_pool(frag)[2]], frag) == []


def test_align_params():
    frag = build_fragment(4, ["0"], 2)
    g = core_formula(4, [(0, 1)], "lambda_1_1 = 2*lambda_1_2")
    v = BundleVector.canonical(1, 0, 4)
    ds = substitute_params(g, [0], [v], frag)
    a, b = ds[0], ds[1]
    _, b2 = align_params(a, b)
    assert b2.params == a.params
    for (w,) in tuples(frag, 1):
        assert evaluate(b2, (w,), [], frag) == evaluate(b, (w,), [], frag)
    other = substitute_params(g, [0], [BundleVector.canonical(2, 0, 4)], frag)[0]
    with pytest.raises(FiberMismatch):
        align_params(a, other)


def test_negation_normal_form_unchanged_when_invariant():
    g = core_formula(2, [(0,)], "true")
    R = pred("alpha_1 = 1", g)
    S = pred("lambda_1_1^2 = 4", g)
    assert negation_normal_form(g, R, S, {"alpha_1": Q(1), "lambda_1_1": Q(3)}) == (R, S)


@pytest.mark.parametrize("lam", [-3, 5, 0])
def test_negation_normal_form_point(lam):
    g = core_formula(4, [(0,)], "true")
    R, S = pred("alpha_1 = 1", g), pred("lambda_1_1 = 3", g)
    x = {"alpha_1": Q(1), "lambda_1_1": Q(lam)}
    R2, S2 = negation_normal_form(g, R, S, x)
    assert is_invariant(g, S2)
    assert (R2.holds(x) and not S2.holds(x)) == (R.holds(x) and not S.holds(x))


def test_group_generators_shape():
    g = core_formula(4, [(0,), (1,)], "true", sigma=[(1, 2, 1)])
    gens = group_generators(g)
    assert len(gens) == 2 + 2  # two basis changes, one sign flip, one rotation
    assert group_generators(core_formula(1, [(0,)], "true")) == []


def test_json_round_trip():
    frag = build_fragment(4, ["0"], 2)
    g = core_formula(4, [(0, 1, 2)], "lambda_1_1 = zeta*lambda_1_2")
    d = substitute_params(g, [0], [BundleVector.canonical(1, 1, 4)], frag)[0]
    for x in (g, d):
        back = GeneralCoreFormula.from_json(x.to_json())
        assert back.skeleton() == x.skeleton()
        assert back.R == x.R
