"""Shared generators and brute-force oracle checks for the core-formula tests."""

from __future__ import annotations

import itertools
import random

from qho.core import GeneralCoreFormula, SymVector, evaluate, invariant_closure
from qho.field import Scalar, Tower
from qho.poly import Poly
from qho.predicate import Cell, Constructible
from qho.structure import INF, BundleVector, build_fragment

Q = Scalar.from_fraction

FRAGMENT_SPECS = [(N, seeds, 2) for N in (1, 2, 4) for seeds in (["0"], ["1/2"])]


def fragments():
    return [build_fragment(N, seeds, depth, "random:3") for N, seeds, depth in FRAGMENT_SPECS]


def vector_pool(frag, scales=(1, 2)):
    """Finite pool of test vectors: scaled canonical elements over every base."""
    out = []
    for a in frag.finite_bases():
        for c in scales:
            out.append(BundleVector.canonical(a, 0, frag.N).scale(c))
    return out


def tuples(frag, arity, scales=(1, 2)):
    return itertools.product(vector_pool(frag, scales), repeat=arity)


def symbolic_fibers(frag, name):
    """One symbolic vector per fragment fiber plus one over a generic base."""
    return [SymVector(a, name) for a in frag.finite_bases()] + [SymVector(None, name)]


SHAPES = [
    ((0,),),
    ((0, 1),),
    ((0,), (1,)),
]


def _atoms(gcf: GeneralCoreFormula, rng: random.Random):
    z = Tower.base(gcf.N).zeta(1)
    pool = []
    for i, members in enumerate(gcf.classes, 1):
        a = Poly.var(f"alpha_{i}")
        pool.append(a - rng.choice([0, 1, 2]))
        for j in range(1, len(members) + 1):
            lam = Poly.var(f"lambda_{i}_{j}")
            c = rng.choice([1, 2, 4])
            pool.append(lam**2 - c)
            pool.append(lam - Poly.const(z) * rng.choice([1, 2]))
            pool.append(lam - a - 1)
        if len(members) > 1:
            pool.append(Poly.var(f"lambda_{i}_1") - 2 * Poly.var(f"lambda_{i}_2"))
    if gcf.s > 1:
        pool.append(Poly.var("lambda_1_1") - Poly.var(f"lambda_2_1"))
        pool.append(Poly.var("lambda_1_1") ** 2 - Poly.var("lambda_2_1") ** 2)
    for i, j, _ in gcf.sigma:
        pool.append(Poly.var(f"gamma_{i}_{j}") - 1)
        pool.append(Poly.var(f"b_{i}_{j}") ** 2 - Poly.var(f"alpha_{i}"))
        pool.append(Poly.var(f"b_{i}_{j}"))
    for k in range(1, gcf.n_a + 1):
        pool.append(Poly.var(f"a_{k}") - Poly.var("lambda_1_1"))
    return pool


def random_R(gcf, rng, negations=True):
    pool = _atoms(gcf, rng)
    cells = []
    for _ in range(rng.randint(1, 2)):
        pos = rng.sample(pool, rng.randint(1, 2))
        neg = [(rng.choice(pool),)] if negations and rng.random() < 0.3 else []
        cells.append(Cell(pos, neg))
    return Constructible(cells)


def random_core(rng, N=None, shape=None, sigma=None, invariant=False, negations=True):
    N = N or rng.choice([1, 2, 4])
    shape = shape if shape is not None else rng.choice(SHAPES)
    if sigma is None:
        sigma = [(1, 2, 1)] if len(shape) == 2 and rng.random() < 0.5 else []
    skel = GeneralCoreFormula(N, shape, Constructible.true(), sigma)
    g = skel.with_R(random_R(skel, rng, negations))
    return invariant_closure(g) if invariant else g


def agree_on_tuples(f, g, frag, arity=None, strict=False):
    """Every tuple of the pool: first mismatch or None."""
    arity = f.arity if arity is None else arity
    for e in tuples(frag, arity):
        if evaluate(f, e, [], frag, strict) != g(e):
            return e
    return None
