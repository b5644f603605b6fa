"""Command-line front end.  Exit codes: 0 success, 1 failed check, 2 usage or input error."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import core, topology
from .errors import NotDescending, OddN, QHOError
from .field import format_scalar, parse_scalar
from .formula import free_variables, normalize, parse_formula, print_formula
from .isomorphism import extend_isomorphism, verify_isomorphism
from .structure import (
    BundleVector,
    build_fragment,
    check_axioms,
    dumps_fragment,
    loads_fragment,
    parse_base,
    spectrum,
)


class CheckFailed(Exception):
    pass


def _text(arg: str) -> str:
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg


def _fragment(path: str):
    return loads_fragment(_text(path))


def _gcf(arg: str) -> core.GeneralCoreFormula:
    return core.GeneralCoreFormula.from_json(json.loads(_text(arg)))


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _vector(text: str, N: int) -> BundleVector:
    base, _, coord = text.partition(":")
    return BundleVector(parse_base(base.strip(), N), parse_scalar(coord.strip() or "1", N), N)


def _vectors(text: str | None, N: int) -> list[BundleVector]:
    if not text:
        return []
    return [_vector(x, N) for x in text.split(";") if x.strip()]


def _ints(text: str | None) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()] if text else []


def _vector_json(v: BundleVector) -> dict:
    return {"base": str(v.base), "coord": format_scalar(v.coord)}


# verbs ----------------------------------------------------------------------


def cmd_build(a):
    seeds = [x.strip() for x in a.seeds.split(",") if x.strip()]
    policy = a.sqrt_policy
    if policy.startswith("file:"):
        policy = json.loads(_text(policy[5:]))
    frag = build_fragment(a.N, seeds, a.depth, policy, lower=a.lower)
    _emit(dumps_fragment(frag), a.output)


def cmd_check_axioms(a):
    report = check_axioms(_fragment(a.fragment))
    _emit("\n".join(report.lines()), a.output)
    if not report.passed:
        raise CheckFailed()


def cmd_ladder(a):
    frag = _fragment(a.fragment)
    v = _vector(a.vector, frag.N)
    w = frag.apply_adag_power(v, a.power) if a.down else frag.apply_a_power(v, a.power)
    _emit(_dump(_vector_json(w)), a.output)


def cmd_spectrum(a):
    vals = spectrum(_fragment(a.fragment))
    _emit(", ".join(format_scalar(x) for x in vals), a.output)


def cmd_isomorphism(a):
    A, B = _fragment(a.source), _fragment(a.target)
    try:
        m = extend_isomorphism(A, B)
    except OddN as exc:
        _emit(_dump({"obstruction": str(exc), "step": str(exc.step)}), a.output)
        raise CheckFailed()
    rep = verify_isomorphism(m, A, B)
    out = {
        "offsets": {str(k): v for k, v in sorted(m.offsets.items(), key=lambda kv: str(kv[0]))},
        "sign_trace": m.sign_trace_json(),
        "checks": rep.checks,
    }
    if rep.counterexample:
        out["counterexample"] = rep.counterexample
    _emit(_dump(out), a.output)
    if not rep.passed:
        raise CheckFailed()


def cmd_parse(a):
    phi = parse_formula(_text(a.formula), a.N)
    out = {"formula": print_formula(phi), "free": sorted(free_variables(phi))}
    _emit(_dump(out), a.output)


def cmd_normalize(a):
    _emit(normalize(_text(a.formula), a.N), a.output)


def cmd_delta_action(a):
    g = _gcf(a.formula)
    delta = [parse_scalar(x.strip(), g.N) for x in a.delta.split(",")] if a.delta else []
    _emit(_dump(core.delta_action(g, delta).to_json()), a.output)


def cmd_invariant_closure(a):
    _emit(_dump(core.invariant_closure(_gcf(a.formula)).to_json()), a.output)


def cmd_merge(a):
    _emit(_dump(core.merge(_gcf(a.first), _gcf(a.second)).to_json()), a.output)


def cmd_project(a):
    res = core.project(_gcf(a.formula), a.k, _ints(a.members), quantifier_free=a.eliminate)
    _emit(_dump({"case": res.case, "note": res.note, "formula": res.formula.to_json()}), a.output)


def cmd_substitute_params(a):
    g = _gcf(a.formula)
    frag = _fragment(a.fragment)
    out = core.substitute_params(g, _ints(a.positions), _vectors(a.values, g.N), frag)
    _emit(_dump([d.to_json() for d in out]), a.output)


def cmd_dim(a):
    _emit(str(topology.dimension(_gcf(a.formula))), a.output)


def cmd_chain_check(a):
    chain = [_gcf(x) for x in a.members]
    try:
        idx = topology.chain_stabilizes(chain)
    except NotDescending as exc:
        _emit(f"not descending: {exc}", a.output)
        raise CheckFailed()
    _emit(str(idx), a.output)


def cmd_oracle_eval(a):
    g = _gcf(a.formula)
    frag = _fragment(a.fragment)
    e = _vectors(a.vectors, g.N)
    field_vals = [parse_scalar(x.strip(), g.N) for x in a.field.split(",")] if a.field else []
    _emit("true" if core.evaluate(g, e, field_vals, frag) else "false", a.output)


# parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qho", description="Quantum harmonic oscillator structures")
    sub = p.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("-o", "--output", help="write the result to this file")
        return sp

    sp = verb("build", cmd_build, "build a fragment")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--seeds", required=True, help="comma-separated base points")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--lower", type=int, default=0)
    sp.add_argument("--sqrt-policy", default="canonical", help="canonical | random:<seed> | file:<path>")

    sp = verb("check-axioms", cmd_check_axioms, "check axioms 3 to 6")
    sp.add_argument("fragment")

    sp = verb("ladder", cmd_ladder, "apply a or a-dagger to a vector")
    sp.add_argument("fragment")
    sp.add_argument("--vector", required=True, help="base:coord")
    sp.add_argument("--power", type=int, default=1)
    sp.add_argument("--down", action="store_true", help="apply a-dagger instead of a")

    sp = verb("spectrum", cmd_spectrum, "Hamiltonian eigenvalues on the real part")
    sp.add_argument("fragment")

    sp = verb("isomorphism", cmd_isomorphism, "extend the identity to an isomorphism")
    sp.add_argument("source")
    sp.add_argument("target")

    for name, fn, help_ in (
        ("parse", cmd_parse, "parse a formula and list its free variables"),
        ("normalize", cmd_normalize, "print a formula in normal form"),
    ):
        sp = verb(name, fn, help_)
        sp.add_argument("--formula", required=True, help="path or inline text")
        sp.add_argument("--N", type=int, default=1)

    sp = verb("delta-action", cmd_delta_action, "apply a root-of-unity vector to R")
    sp.add_argument("--formula", required=True, help="core formula JSON (path or inline)")
    sp.add_argument("--delta", required=True, help="comma list of roots of unity")

    sp = verb("invariant-closure", cmd_invariant_closure, "invariant closure of R")
    sp.add_argument("--formula", required=True)

    sp = verb("merge", cmd_merge, "conjunction of two invariant core formulas")
    sp.add_argument("first")
    sp.add_argument("second")

    sp = verb("project", cmd_project, "quantify away vector variables")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--k", type=int, required=True, help="class index (parameters follow classes)")
    sp.add_argument("--members", required=True, help="comma list of member indices")
    sp.add_argument("--eliminate", action="store_true", help="replace bound variables by elimination")

    sp = verb("substitute-params", cmd_substitute_params, "substitute fragment vectors for variables")
    sp.add_argument("--formula", required=True)
    sp.add_argument("fragment")
    sp.add_argument("--positions", required=True, help="comma list of 0-based positions")
    sp.add_argument("--values", required=True, help="semicolon list of base:coord")

    sp = verb("dim", cmd_dim, "dimension of a basic closed set")
    sp.add_argument("--formula", required=True)

    sp = verb("chain-check", cmd_chain_check, "stabilization index of a descending chain")
    sp.add_argument("members", nargs="+")

    sp = verb("oracle-eval", cmd_oracle_eval, "evaluate a core formula on a fragment")
    sp.add_argument("--formula", required=True)
    sp.add_argument("fragment")
    sp.add_argument("--vectors", default="", help="semicolon list of base:coord")
    sp.add_argument("--field", default="", help="comma list of field values")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.fn(args)
    except CheckFailed:
        return 1
    except (QHOError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
