"""Basic closed sets of the vector sort and their Zariski-style calculus."""

from __future__ import annotations

from typing import Sequence

from .core import (
    CLAUSE_VARS,
    GeneralCoreFormula,
    _chain_product,
    alpha,
    fuse_classes,
    is_invariant,
    lam,
    merge,
)
from .errors import NotDescending, NotInvariant
from .poly import Poly, PolySystem, ideal_dimension
from .predicate import Cell, Constructible, parse_predicate


def structural_equations(gcf: GeneralCoreFormula) -> list[Poly]:
    """Equations every witness configuration satisfies, whatever R says."""
    N = gcf.N
    out = []
    for kind, i, j, n in gcf.clauses():
        sv, uv = CLAUSE_VARS[kind]
        b = Poly.var(f"{sv}_{i}_{j}")
        u = Poly.var(f"{uv}_{i}_{j}")
        out.append(u**N - 1)
        if kind == "delta2":
            start = gcf.params[i - 1].base
            out.append(b * b - Poly.const(_chain_product(start, n)))
            out.append(Poly.var(alpha(j)) - Poly.const(start + n))
            continue
        P = Poly.const(1)
        for k in range(n):
            P = P * (Poly.var(alpha(i)) + k)
        out.append(b * b - P)
        if kind == "sigma":
            out.append(Poly.var(alpha(j)) - Poly.var(alpha(i)) - n)
        else:
            out.append(Poly.var(alpha(i)) + n - Poly.const(gcf.params[j - 1].base))
    return out


def check_basic_closed(gcf: GeneralCoreFormula) -> GeneralCoreFormula:
    if not gcf.R.is_closed():
        raise ValueError("a basic closed set needs R given by equations")
    if not is_invariant(gcf):
        raise NotInvariant("R is not invariant")
    return gcf


def _cell_systems(gcf: GeneralCoreFormula) -> list[PolySystem]:
    if not gcf.R.is_closed():
        raise ValueError("R must be a union of equation systems")
    extra = structural_equations(gcf)
    return [PolySystem(list(c.positive) + extra, gcf.variables()) for c in gcf.R.cells]


def dimension(gcf: GeneralCoreFormula) -> int:
    """Krull dimension of the configuration variety cut out by R (-1 if empty)."""
    dims = [ideal_dimension(sys) for sys in _cell_systems(gcf)]
    return max(dims, default=-1)


def universe(N: int) -> GeneralCoreFormula:
    """The canonical basis elements: one class, one member with lambda^N = 1."""
    return GeneralCoreFormula(N, [(0,)], parse_predicate(f"lambda_1_1^{N} = 1", N))


def vector_universe(N: int) -> GeneralCoreFormula:
    """All vectors of the bundle."""
    return GeneralCoreFormula(N, [(0,)], Constructible.true())


def canonicalize(gcf: GeneralCoreFormula) -> GeneralCoreFormula:
    """Fuse classes whose base points R forces to coincide."""
    while True:
        systems = _cell_systems(gcf)
        if not systems:
            return gcf
        fused = False
        for c1 in range(1, gcf.s + 1):
            for c2 in range(c1 + 1, gcf.s + 1):
                d = Poly.var(alpha(c1)) - Poly.var(alpha(c2))
                if all(sys.radical_contains(d) for sys in systems):
                    gcf = fuse_classes(gcf, c1, c2)
                    fused = True
                    break
            if fused:
                break
        if not fused:
            return gcf


def intersect(b1: GeneralCoreFormula, b2: GeneralCoreFormula) -> GeneralCoreFormula:
    check_basic_closed(b1)
    check_basic_closed(b2)
    return canonicalize(merge(b1, b2))


def chain_stabilizes(chain: Sequence[GeneralCoreFormula]) -> int:
    """Index from which a descending chain (shared skeleton) is constant as sets."""
    if not chain:
        raise ValueError("empty chain")
    skel = chain[0].skeleton()
    if any(c.skeleton() != skel for c in chain):
        raise ValueError("chain members must share partition, clauses and parameters")
    systems = [c.R.closed_system().with_variables(chain[0].variables()) for c in chain]
    for k in range(len(systems) - 1):
        big, small = systems[k], systems[k + 1]
        if not all(small.radical_contains(p) for p in big.polys):
            raise NotDescending(f"member {k + 1} is not contained in member {k}")
    idx = len(systems) - 1
    while idx > 0 and systems[idx - 1].radical_equal(systems[idx]):
        idx -= 1
    return idx
