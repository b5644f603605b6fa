"""General core formulas: semantic evaluation on fragments and the
syntactic calculus (group actions, closure, normal forms, merge, projection,
parameter substitution).

Indexing.  ``classes[i-1]`` lists the 0-based positions of the free vector
variables in class ``i``; ``param_classes[i-1]`` the positions tied to
parameter ``h_i``.  Ladder clauses are triples ``(i, j, n)`` with 1-based
indices: ``sigma`` links class to class, ``delta1`` class to parameter,
``delta2`` parameter to class.

Field variables of ``R``:

=============  ==========================================
``alpha_i``    base point of class i
``lambda_i_j`` coefficient of the j-th member on ``f_i``
``mu_i_j``     coefficient of the j-th member on ``h_i``
``b_i_j``      ladder scalar of sigma clause (i, j)
``gamma_i_j``  root of unity with ``g = gamma f_j``
``m_i_j``,     ladder scalar / root of unity of a delta1 clause
``delta_i_j``
``o_i_j``,     ladder scalar / root of unity of a delta2 clause
``epsilon_i_j``
``a_k``        free field variables
=============  ==========================================
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

from .errors import (
    BadIndex,
    BlowupGuard,
    FiberMismatch,
    NotInvariant,
    OutOfFragment,
)
from .field import Scalar, Tower, inv, root_of_unity_index
from .formula import build_general_core
from .poly import Poly, _fresh, product_system
from .predicate import Cell, Constructible, parse_predicate
from .structure import INF, BundleVector, Fragment

BLOWUP_LIMIT = 4096


def alpha(i):
    return f"alpha_{i}"


def lam(i, j):
    return f"lambda_{i}_{j}"


def mu(i, j):
    return f"mu_{i}_{j}"


def avar(k):
    return f"a_{k}"


# (scalar variable, unit variable) per clause kind
CLAUSE_VARS = {"sigma": ("b", "gamma"), "delta1": ("m", "delta"), "delta2": ("o", "epsilon")}


@dataclass(frozen=True)
class SymVector:
    """A vector with an unknown coordinate (and, if ``base`` is None, an
    unknown base point); used to quantify over a fiber inside the oracle."""

    base: object
    name: str
    base_name: str = "G_base"

    @property
    def coord(self) -> Poly:
        return Poly.var(self.name)


# --------------------------------------------------------------------------
# the formula object


@dataclass(frozen=True)
class GeneralCoreFormula:
    N: int
    classes: tuple
    R: Constructible
    sigma: tuple = ()
    delta1: tuple = ()
    delta2: tuple = ()
    param_classes: tuple = ()
    params: tuple = ()
    n_a: int = 0

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(tuple(c) for c in self.classes))
        object.__setattr__(self, "param_classes", tuple(tuple(c) for c in self.param_classes))
        object.__setattr__(self, "params", tuple(self.params))
        for name in ("sigma", "delta1", "delta2"):
            object.__setattr__(self, name, tuple(sorted(tuple(x) for x in getattr(self, name))))
        if len(self.param_classes) != len(self.params):
            raise BadIndex("one parameter class per parameter is required")
        s, t = self.s, self.t
        for i, j, n in self.sigma:
            if not (1 <= i <= s and 1 <= j <= s) or n < 1:
                raise BadIndex(f"sigma clause {(i, j, n)} out of range")
        for i, j, n in self.delta1:
            if not (1 <= i <= s and 1 <= j <= t) or n < 1:
                raise BadIndex(f"delta1 clause {(i, j, n)} out of range")
        for i, j, n in self.delta2:
            if not (1 <= i <= t and 1 <= j <= s) or n < 1:
                raise BadIndex(f"delta2 clause {(i, j, n)} out of range")
        for kind in ("sigma", "delta1", "delta2"):
            keys = [(i, j) for i, j, _ in getattr(self, kind)]
            if len(set(keys)) != len(keys):
                raise BadIndex(f"repeated {kind} clause")
        pos = sorted(p for c in self.classes + self.param_classes for p in c)
        if pos != list(range(len(pos))):
            raise BadIndex("classes must partition positions 0..n-1")
        extra = set(self.R.variables) - set(self.variables())
        if extra:
            raise BadIndex(f"R mentions undeclared variables {sorted(extra)}")
        object.__setattr__(self, "R", self.R.with_variables(self.variables()))

    # shape -----------------------------------------------------------------

    @property
    def s(self) -> int:
        return len(self.classes)

    @property
    def t(self) -> int:
        return len(self.params)

    @property
    def arity(self) -> int:
        return sum(len(c) for c in self.classes + self.param_classes)

    def clauses(self) -> list[tuple[str, int, int, int]]:
        return (
            [("sigma",) + c for c in self.sigma]
            + [("delta1",) + c for c in self.delta1]
            + [("delta2",) + c for c in self.delta2]
        )

    def variables(self) -> list[str]:
        vs = [alpha(i) for i in range(1, self.s + 1)]
        for kind, i, j, _ in self.clauses():
            sv, uv = CLAUSE_VARS[kind]
            vs += [f"{uv}_{i}_{j}", f"{sv}_{i}_{j}"]
        for i, c in enumerate(self.classes, 1):
            vs += [lam(i, j) for j in range(1, len(c) + 1)]
        for i, c in enumerate(self.param_classes, 1):
            vs += [mu(i, j) for j in range(1, len(c) + 1)]
        vs += [avar(k) for k in range(1, self.n_a + 1)]
        return vs

    def skeleton(self):
        return (self.N, self.classes, self.param_classes, self.params, self.sigma, self.delta1, self.delta2, self.n_a)

    def with_R(self, R: Constructible) -> GeneralCoreFormula:
        return replace(self, R=R)

    def linked_classes(self) -> set[int]:
        out = set()
        for kind, i, j, _ in self.clauses():
            if kind == "sigma":
                out |= {i, j}
            elif kind == "delta1":
                out.add(i)
            else:
                out.add(j)
        return out

    def linked_params(self) -> set[int]:
        return {j for _, j, _ in self.delta1} | {i for i, _, _ in self.delta2}

    # rendering ---------------------------------------------------------------

    def to_formula(self):
        return build_general_core(
            {(i, j): n for i, j, n in self.sigma},
            {(i, j): n for i, j, n in self.delta1},
            {(i, j): n for i, j, n in self.delta2},
            [len(c) for c in self.classes],
            [len(c) for c in self.param_classes],
            self.R,
        )

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "classes": [list(c) for c in self.classes],
            "param_classes": [list(c) for c in self.param_classes],
            "params": [{"base": str(h.base), "coord": str(h.coord)} for h in self.params],
            "sigma": [list(c) for c in self.sigma],
            "delta1": [list(c) for c in self.delta1],
            "delta2": [list(c) for c in self.delta2],
            "n_a": self.n_a,
            "R": str(self.R),
        }

    @classmethod
    def from_json(cls, data: dict) -> GeneralCoreFormula:
        from .field import parse_scalar

        N = int(data["N"])
        params = tuple(
            BundleVector(parse_scalar(h["base"], N), parse_scalar(h["coord"], N), N)
            for h in data.get("params", [])
        )
        return cls(
            N,
            data["classes"],
            parse_predicate(data.get("R", "true"), N),
            data.get("sigma", ()),
            data.get("delta1", ()),
            data.get("delta2", ()),
            data.get("param_classes", ()),
            params,
            int(data.get("n_a", 0)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def core_formula(N: int, classes, R, sigma=(), n_a: int = 0) -> GeneralCoreFormula:
    if isinstance(R, str):
        R = parse_predicate(R, N)
    return GeneralCoreFormula(N, classes, R, sigma, n_a=n_a)


# --------------------------------------------------------------------------
# semantic oracle


def _zeta(N: int, k: int) -> Scalar:
    return Tower.base(N).zeta(k)


def _chain_product(start, n: int):
    out = Scalar.from_fraction(1) if not isinstance(start, Poly) else Poly.const(1)
    for k in range(n):
        out = out * (start + k)
    return out


def _base_of(v):
    return v.base if not isinstance(v, SymVector) or v.base is not None else None


def _class_bases(gcf: GeneralCoreFormula, e: Sequence, frag: Fragment, strict: bool):
    """Yield dicts class -> base (Scalar, INF or Poly) consistent with all links."""
    s = gcf.s
    known: dict = {}
    for i, members in enumerate(gcf.classes, 1):
        concrete = set()
        generic = set()
        for p in members:
            v = e[p]
            if isinstance(v, SymVector) and v.base is None:
                generic.add(v.base_name)
            else:
                concrete.add(v.base)
        if concrete and generic:
            return
        if len(concrete) > 1 or len(generic) > 1:
            return
        if concrete:
            known[i] = concrete.pop()
        elif generic:
            known[i] = Poly.var(generic.pop())
    for i, members in enumerate(gcf.param_classes, 1):
        hb = gcf.params[i - 1].base
        for p in members:
            v = e[p]
            if isinstance(v, SymVector) and v.base is None:
                return
            if v.base != hb:
                return
    # links as (u, v, offset) meaning base[v] = base[u] + offset
    edges = [(i, j, n) for i, j, n in gcf.sigma]
    fixed: dict = {}
    for i, j, n in gcf.delta1:
        hb = gcf.params[j - 1].base
        if hb is INF:
            return
        fixed.setdefault(i, []).append(hb - n)
    for i, j, n in gcf.delta2:
        hb = gcf.params[i - 1].base
        if hb is INF:
            return
        fixed.setdefault(j, []).append(hb + n)
    linked = gcf.linked_classes()
    for i in linked:
        if i in known and (known[i] is INF or isinstance(known[i], Poly)):
            return
    for i, vals in fixed.items():
        for v in vals:
            if i in known and known[i] != v:
                return
            known[i] = v
    adj: dict = {i: [] for i in range(1, s + 1)}
    for u, v, n in edges:
        adj[u].append((v, n))
        adj[v].append((u, -n))

    def propagate(assign: dict) -> dict | None:
        assign = dict(assign)
        stack = list(assign)
        while stack:
            u = stack.pop()
            for v, n in adj[u]:
                val = assign[u] + n
                if v in assign:
                    if assign[v] != val:
                        return None
                else:
                    assign[v] = val
                    stack.append(v)
        return assign

    base = propagate(known)
    if base is None:
        return
    missing = [i for i in range(1, s + 1) if i not in base]
    if not missing:
        yield base
        return
    # unanchored components range over the fragment's bases
    comps, seen = [], set()
    for i in missing:
        if i in seen:
            continue
        comp, stack = [i], [i]
        seen.add(i)
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    stack.append(v)
        comps.append(comp)
    roots = [c[0] for c in comps]
    for choice in itertools.product(frag.finite_bases(), repeat=len(roots)):
        b2 = propagate({**base, **dict(zip(roots, choice))})
        if b2 is not None and all(frag.contains_base(b2[i]) for c in comps for i in c):
            yield b2


def _ladder_options(frag: Fragment, N: int, start_vec: BundleVector, n: int, target_base, strict: bool):
    """All (scalar, k) with a^n(start) = scalar * (target, k), scalar^2 = prod of
    (base + i), and adag^n(target, k) = scalar * start."""
    try:
        V = frag.apply_a_power(start_vec, n)
    except OutOfFragment:
        if strict:
            raise
        return []
    if V.base != target_base:
        return []
    P = _chain_product(start_vec.base, n)
    out = []
    for k in range(N):
        b = V.coord * _zeta(N, -k)
        if b * b != P:
            continue
        g = BundleVector.canonical(target_base, k, N)
        try:
            back = frag.apply_adag_power(g, n)
        except OutOfFragment:
            if strict:
                raise
            continue
        if back != start_vec.scale(b):
            continue
        out.append((b, k))
    return out


def witness_configurations(
    gcf: GeneralCoreFormula, e: Sequence, a: Sequence, frag: Fragment, strict: bool = True
) -> Iterator[dict]:
    """All assignments to the field variables realized by choices of canonical
    basis elements and ladder witnesses for the tuple ``(e, a)``."""
    N = gcf.N
    if len(e) != gcf.arity:
        raise BadIndex(f"expected {gcf.arity} vectors, got {len(e)}")
    if len(a) != gcf.n_a:
        raise BadIndex(f"expected {gcf.n_a} field values, got {len(a)}")
    for h in gcf.params:
        if not frag.contains_base(h.base):
            raise OutOfFragment(f"parameter over {h.base} outside the fragment")
    for v in e:
        if not isinstance(v, SymVector) and not frag.contains_base(v.base):
            raise OutOfFragment(f"vector over {v.base} outside the fragment")
    fixed_vals: dict = {avar(k): x for k, x in enumerate(a, 1)}
    for i, members in enumerate(gcf.param_classes, 1):
        h = gcf.params[i - 1]
        hinv = inv(h.coord)
        for j, p in enumerate(members, 1):
            v = e[p]
            fixed_vals[mu(i, j)] = (v.coord * hinv) if not isinstance(v, SymVector) else v.coord * hinv
    for bases in _class_bases(gcf, e, frag, strict):
        vals0 = dict(fixed_vals)
        for i in range(1, gcf.s + 1):
            vals0[alpha(i)] = bases[i]
        # delta2 options do not depend on f
        d2_opts = {}
        for i, j, n in gcf.delta2:
            h = gcf.params[i - 1]
            opts = _ladder_options(frag, N, h, n, bases[j], strict)
            d2_opts[(i, j)] = opts
        for ks in itertools.product(range(N), repeat=gcf.s):
            vals = dict(vals0)
            for i, members in enumerate(gcf.classes, 1):
                zinv = _zeta(N, -ks[i - 1])
                for j, p in enumerate(members, 1):
                    v = e[p]
                    vals[lam(i, j)] = v.coord * zinv
            choices = []
            for i, j, n in gcf.sigma:
                f_i = BundleVector.canonical(bases[i], ks[i - 1], N)
                opts = _ladder_options(frag, N, f_i, n, bases[j], strict)
                choices.append(
                    [{f"b_{i}_{j}": b, f"gamma_{i}_{j}": _zeta(N, k - ks[j - 1])} for b, k in opts]
                )
            for i, j, n in gcf.delta1:
                h = gcf.params[j - 1]
                f_i = BundleVector.canonical(bases[i], ks[i - 1], N)
                opts = _ladder_options(frag, N, f_i, n, h.base, strict)
                hinv = inv(h.coord)
                choices.append(
                    [{f"m_{i}_{j}": b, f"delta_{i}_{j}": _zeta(N, k) * hinv} for b, k in opts]
                )
            for i, j, n in gcf.delta2:
                choices.append(
                    [
                        {f"o_{i}_{j}": b, f"epsilon_{i}_{j}": _zeta(N, k - ks[j - 1])}
                        for b, k in d2_opts[(i, j)]
                    ]
                )
            for combo in itertools.product(*choices):
                out = dict(vals)
                for d in combo:
                    out.update(d)
                yield out


def evaluate(gcf: GeneralCoreFormula, e: Sequence, a: Sequence, frag: Fragment, strict: bool = True) -> bool:
    """Brute-force truth of the general core formula at ``(e, a)``."""
    R = gcf.R
    for cfg in witness_configurations(gcf, e, a, frag, strict):
        if R.holds(cfg):
            return True
    return False


def evaluate_disjunction(gcfs: Sequence[GeneralCoreFormula], e, a, frag, strict=True) -> bool:
    return any(evaluate(g, e, a, frag, strict) for g in gcfs)


# --------------------------------------------------------------------------
# group actions


@dataclass(frozen=True)
class GroupElement:
    """An element of the symmetry group of witness configurations.

    ``delta``: exponent per class (basis change ``f_i -> zeta^k f_i``);
    ``signs``: clause -> +1/-1 flipping (scalar, unit) together (even N);
    ``turns``: clause -> exponent rotating the unit on the locus where the
    clause's chain product vanishes.
    """

    delta: tuple
    signs: tuple = ()
    turns: tuple = ()

    def is_identity(self) -> bool:
        return not any(self.delta) and all(s == 1 for _, s in self.signs) and not any(
            k for _, k in self.turns
        )


def _as_exponents(delta, N: int) -> tuple:
    """Exponents k_i with delta_i = zeta^k_i (entries are roots of unity)."""
    from .field import as_scalar

    out = []
    for d in delta:
        k = root_of_unity_index(as_scalar(d), N)
        if k is None:
            raise ValueError(f"{d} is not an {N}-th root of unity")
        out.append(k)
    return tuple(out)


def _unit_sub(gcf: GeneralCoreFormula, g: GroupElement, turned: set) -> dict:
    N = gcf.N
    ks = g.delta
    signs = dict(g.signs)
    turns = dict(g.turns)
    sub: dict = {}
    for i, members in enumerate(gcf.classes, 1):
        for j in range(1, len(members) + 1):
            sub[lam(i, j)] = Poly.var(lam(i, j)).scale(_zeta(N, -ks[i - 1]))
    for kind, i, j, n in gcf.clauses():
        sv, uv = CLAUSE_VARS[kind]
        key = (kind, i, j)
        sg = signs.get(key, 1)
        rot = turns.get(key, 0) if key in turned else 0
        if kind == "sigma":
            k = ks[i - 1] - ks[j - 1]
        elif kind == "delta1":
            k = ks[i - 1]
        else:
            k = -ks[j - 1]
        sub[f"{uv}_{i}_{j}"] = Poly.var(f"{uv}_{i}_{j}").scale(_zeta(N, k + rot) * sg)
        if sg == -1:
            sub[f"{sv}_{i}_{j}"] = -Poly.var(f"{sv}_{i}_{j}")
    return sub


def chain_locus(gcf: GeneralCoreFormula, kind: str, i: int, j: int, n: int) -> Poly:
    """Polynomial vanishing exactly where the clause's ladder scalar is 0."""
    if kind == "delta2":
        return Poly.const(_chain_product(gcf.params[i - 1].base, n))
    start = Poly.var(alpha(i))
    out = Poly.const(1)
    for k in range(n):
        out = out * (start + k)
    return out


def group_act(gcf: GeneralCoreFormula, g: GroupElement, R: Constructible | None = None) -> Constructible:
    R = gcf.R if R is None else R
    turned = [key for key, k in g.turns if k % gcf.N]
    if not turned:
        return R.subs(_unit_sub(gcf, g, set()))
    loci = {}
    for kind, i, j, n in gcf.clauses():
        if (kind, i, j) in turned:
            loci[(kind, i, j)] = chain_locus(gcf, kind, i, j, n)
    out = Constructible.false(R.variables)
    for pattern in itertools.product((True, False), repeat=len(turned)):
        on = {key for key, flag in zip(turned, pattern) if flag}
        piece = R.subs(_unit_sub(gcf, g, on))
        pos = [loci[k] for k in turned if k in on]
        neg = [(loci[k],) for k in turned if k not in on]
        out = out.disj(piece.conj(Constructible([Cell(pos, neg)], R.variables)))
    return out.pruned()


def delta_action(gcf: GeneralCoreFormula, delta) -> GeneralCoreFormula:
    """R^delta: the basis change f_i -> delta_i f_i recorded on R."""
    ks = _as_exponents(delta, gcf.N)
    if len(ks) != gcf.s:
        raise BadIndex(f"delta has {len(ks)} entries for {gcf.s} classes")
    return gcf.with_R(group_act(gcf, GroupElement(ks)))


def _clause_keys(gcf):
    return [(kind, i, j) for kind, i, j, _ in gcf.clauses()]


def group_generators(gcf: GeneralCoreFormula) -> list[GroupElement]:
    N, s = gcf.N, gcf.s
    gens = []
    if N == 1:
        return gens
    for i in range(s):
        gens.append(GroupElement(tuple(1 if k == i else 0 for k in range(s))))
    zero = tuple([0] * s)
    for key in _clause_keys(gcf):
        if N % 2 == 0:
            gens.append(GroupElement(zero, ((key, -1),)))
        gens.append(GroupElement(zero, (), ((key, 1),)))
    return gens


def group_elements(gcf: GeneralCoreFormula, limit: int = BLOWUP_LIMIT, full: bool = True) -> list[GroupElement]:
    N, s = gcf.N, gcf.s
    keys = _clause_keys(gcf) if full else []
    sign_opts = (1, -1) if N % 2 == 0 else (1,)
    size = N**s * (len(sign_opts) ** len(keys)) * (N ** len(keys))
    if size > limit:
        raise BlowupGuard(f"group of order {size} exceeds the limit {limit}")
    out = []
    for ks in itertools.product(range(N), repeat=s):
        for sg in itertools.product(sign_opts, repeat=len(keys)):
            for tn in itertools.product(range(N), repeat=len(keys)):
                out.append(
                    GroupElement(
                        ks,
                        tuple((k, x) for k, x in zip(keys, sg) if x != 1),
                        tuple((k, x) for k, x in zip(keys, tn) if x),
                    )
                )
    return out


def is_invariant(gcf: GeneralCoreFormula, R: Constructible | None = None) -> bool:
    """True iff R is fixed (as a set) by every symmetry of witness configurations."""
    R = (gcf.R if R is None else R).pruned()
    cells = set(R.cells)
    for g in group_generators(gcf):
        img = group_act(gcf, g, R).pruned()
        if img.bound == R.bound and set(img.cells) <= cells:
            continue
        # g has finite order, so g(R) <= R already forces g(R) = R
        if R.bound:
            if not img.set_equal(R):
                return False
            continue
        rest = Constructible([c for c in img.cells if c not in cells], R.variables)
        if not rest.is_subset(R):
            return False
    return True


def invariant_closure(gcf: GeneralCoreFormula, limit: int = BLOWUP_LIMIT) -> GeneralCoreFormula:
    """Replace R by the union of its images under the symmetry group."""
    out = Constructible.false(gcf.R.variables)
    seen = []
    for g in group_elements(gcf, limit):
        img = group_act(gcf, g)
        if any(img == x for x in seen):
            continue
        seen.append(img)
        out = out.disj(img)
    return gcf.with_R(out.pruned())


# --------------------------------------------------------------------------
# negation normal form at a witness point


def _union(preds: Sequence[Constructible], variables) -> Constructible:
    preds = list(preds)
    if preds and all(p.is_closed() and len(p.cells) == 1 for p in preds):
        from .poly import PolySystem

        sys = product_system([PolySystem(p.cells[0].positive, variables) for p in preds])
        return Constructible([Cell(sys.polys)], variables)
    out = Constructible.false(variables)
    for p in preds:
        out = out.disj(p)
    return out.pruned()


def _intersection(preds: Sequence[Constructible], variables) -> Constructible:
    preds = list(preds)
    if all(p.is_closed() and len(p.cells) == 1 for p in preds):
        return Constructible([Cell([q for p in preds for q in p.cells[0].positive])], variables)
    out = Constructible.true(variables)
    for p in preds:
        out = out.conj(p).pruned()
    return out


def negation_normal_form(
    gcf: GeneralCoreFormula, R: Constructible, S: Constructible, context: dict, limit: int = BLOWUP_LIMIT
) -> tuple[Constructible, Constructible]:
    """Rewrite ``R & ~S`` as ``R' & ~S'`` with S' invariant, preserving truth at
    the witness point ``context``."""
    if is_invariant(gcf, S):
        return R, S
    variables = gcf.R.variables
    if S.holds(context):
        return R, Constructible.true(variables)
    G = group_elements(gcf, limit)
    images = {g: group_act(gcf, g, S) for g in G}
    Delta = [g for g in G if not images[g].holds(context)]

    def compose(x: GroupElement, y: GroupElement) -> GroupElement:
        N = gcf.N
        ks = tuple((p + q) % N for p, q in zip(x.delta, y.delta))
        sg = dict(x.signs)
        for k, v in y.signs:
            sg[k] = sg.get(k, 1) * v
        tn = dict(x.turns)
        for k, v in y.turns:
            tn[k] = (tn.get(k, 0) + v) % N
        return GroupElement(
            ks,
            tuple(sorted((k, v) for k, v in sg.items() if v != 1)),
            tuple(sorted((k, v) for k, v in tn.items() if v)),
        )

    def norm(g: GroupElement) -> GroupElement:
        return compose(g, GroupElement(tuple([0] * gcf.s)))

    G = [norm(g) for g in G]
    images = {norm(g): img for g, img in images.items()}
    Delta = [norm(g) for g in Delta]
    dset = set(Delta)
    stab = [g for g in G if {norm(compose(g, d)) for d in Delta} == dset]

    def T_shift(g: GroupElement) -> Constructible:
        # T^g = union over d in Delta of S^(d g)
        return _union([images[norm(compose(d, g))] for d in Delta], variables)

    R_new = _intersection([R] + [T_shift(g) for g in G if g not in stab], variables)
    S_new = _intersection([T_shift(g) for g in G], variables)
    return R_new, S_new


# --------------------------------------------------------------------------
# conjunction lemma and parameter alignment


def conj_split(g1: GeneralCoreFormula, g2: GeneralCoreFormula) -> GeneralCoreFormula:
    if g1.skeleton() != g2.skeleton():
        raise FiberMismatch("conjunction needs a shared partition, clauses and parameters")
    if not is_invariant(g2):
        raise NotInvariant("the second predicate is not invariant")
    return g1.with_R(g1.R.conj(g2.R).pruned())


def align_params(g1: GeneralCoreFormula, g2: GeneralCoreFormula) -> tuple[GeneralCoreFormula, GeneralCoreFormula]:
    """Rewrite g2 over g1's parameters (same fibers, possibly other basis elements)."""
    if g1.t != g2.t:
        raise FiberMismatch("different numbers of parameters")
    N = g2.N
    sub = {}
    for i, (h1, h2) in enumerate(zip(g1.params, g2.params), 1):
        if h1.base != h2.base:
            raise FiberMismatch(f"parameter {i} lies over {h1.base} and {h2.base}")
        eta = h2.coord * inv(h1.coord)
        if root_of_unity_index(eta, N) is None:
            raise FiberMismatch(f"parameter {i} is not a canonical basis element")
        eta_inv = inv(eta)
        for j in range(1, len(g2.param_classes[i - 1]) + 1):
            sub[mu(i, j)] = Poly.var(mu(i, j)).scale(eta_inv)
        for c, p, _ in g2.delta1:
            if p == i:
                sub[f"delta_{c}_{p}"] = Poly.var(f"delta_{c}_{p}").scale(eta_inv)
        for p, c, _ in g2.delta2:
            if p == i:
                sub[f"o_{p}_{c}"] = Poly.var(f"o_{p}_{c}").scale(eta)
    return g1, replace(g2, params=g1.params, R=g2.R.subs(sub))


# --------------------------------------------------------------------------
# coarsening and merge


class _Incompatible(Exception):
    pass


def _embed(gcf: GeneralCoreFormula, cls_map: dict, pos_slot: dict, clause_out: dict) -> Constructible:
    """Rename R's variables into a coarser skeleton.

    ``cls_map``: old class -> new class; ``pos_slot``: position -> (new class,
    member index); clauses are recorded into ``clause_out`` keyed by kind.
    """
    ren = {}
    for i in range(1, gcf.s + 1):
        ren[alpha(i)] = alpha(cls_map[i])
    for i, members in enumerate(gcf.classes, 1):
        for j, p in enumerate(members, 1):
            c, k = pos_slot[p]
            ren[lam(i, j)] = lam(c, k)
    for kind, i, j, n in gcf.clauses():
        ni = cls_map[i] if kind in ("sigma", "delta1") else i
        nj = cls_map[j] if kind in ("sigma", "delta2") else j
        if kind == "sigma" and ni == nj:
            raise _Incompatible("a ladder clause inside one fiber")
        prev = clause_out[kind].get((ni, nj))
        if prev is not None and prev != n:
            raise _Incompatible("conflicting ladder lengths")
        clause_out[kind][(ni, nj)] = n
        sv, uv = CLAUSE_VARS[kind]
        ren[f"{sv}_{i}_{j}"] = f"{sv}_{ni}_{nj}"
        ren[f"{uv}_{i}_{j}"] = f"{uv}_{ni}_{nj}"
    return gcf.R.rename({k: v for k, v in ren.items() if k != v})


def _false_like(gcf: GeneralCoreFormula) -> GeneralCoreFormula:
    return gcf.with_R(Constructible.false(gcf.R.variables))


def _coarse_skeleton(classes_new, base: GeneralCoreFormula, clause_out, R):
    def pack(kind):
        return tuple((i, j, n) for (i, j), n in sorted(clause_out[kind].items()))

    return GeneralCoreFormula(
        base.N, classes_new, R, pack("sigma"), pack("delta1"), pack("delta2"),
        base.param_classes, base.params, base.n_a,
    )


def merge(g1: GeneralCoreFormula, g2: GeneralCoreFormula) -> GeneralCoreFormula:
    """One general core formula equivalent to g1 & g2 (both invariant, same parameters)."""
    if g1.N != g2.N or g1.arity != g2.arity or g1.n_a != g2.n_a:
        raise FiberMismatch("formulas over different free variables")
    if g1.param_classes != g2.param_classes:
        raise FiberMismatch("parameter classes differ")
    if g1.params != g2.params:
        g1, g2 = align_params(g1, g2)
    # union-find over positions and classes
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry, key=str)] = min(rx, ry, key=str)

    nodes = []
    for tag, g in (("L", g1), ("R", g2)):
        for i, members in enumerate(g.classes, 1):
            node = (tag, i)
            nodes.append(node)
            find(node)
            for p in members:
                union(node, ("pos", p))
    groups: dict = {}
    for node in nodes:
        groups.setdefault(find(node), []).append(node)

    def key(root):
        members = sorted(p for (tag, i) in groups[root] for p in (g1 if tag == "L" else g2).classes[i - 1])
        return (0, members[0]) if members else (1, groups[root][0])

    order = sorted(groups, key=key)
    new_index = {root: k for k, root in enumerate(order, 1)}
    classes_new = []
    for root in order:
        members = sorted({p for (tag, i) in groups[root] for p in (g1 if tag == "L" else g2).classes[i - 1]})
        classes_new.append(tuple(members))
    pos_slot = {p: (c, k) for c, members in enumerate(classes_new, 1) for k, p in enumerate(members, 1)}
    clause_out = {"sigma": {}, "delta1": {}, "delta2": {}}
    try:
        R1 = _embed(g1, {i: new_index[find(("L", i))] for i in range(1, g1.s + 1)}, pos_slot, clause_out)
        R2 = _embed(g2, {i: new_index[find(("R", i))] for i in range(1, g2.s + 1)}, pos_slot, clause_out)
    except _Incompatible:
        clause_out = {"sigma": {}, "delta1": {}, "delta2": {}}
        skel = _coarse_skeleton(classes_new, g1, clause_out, Constructible.false())
        return skel
    return _coarse_skeleton(classes_new, g1, clause_out, R1.conj(R2).pruned())


def fuse_classes(gcf: GeneralCoreFormula, c1: int, c2: int) -> GeneralCoreFormula:
    """Represent classes c1 and c2 (known to share a fiber) as one class."""
    lo, hi = min(c1, c2), max(c1, c2)
    cls_map = {}
    for i in range(1, gcf.s + 1):
        if i == hi:
            cls_map[i] = lo
        else:
            cls_map[i] = i if i < hi else i - 1
    classes_new = []
    for i, members in enumerate(gcf.classes, 1):
        if i == hi:
            continue
        if i == lo:
            classes_new.append(tuple(sorted(members + gcf.classes[hi - 1])))
        else:
            classes_new.append(members)
    pos_slot = {p: (c, k) for c, members in enumerate(classes_new, 1) for k, p in enumerate(members, 1)}
    clause_out = {"sigma": {}, "delta1": {}, "delta2": {}}
    try:
        R = _embed(gcf, cls_map, pos_slot, clause_out)
    except _Incompatible:
        return _coarse_skeleton(classes_new, gcf, {"sigma": {}, "delta1": {}, "delta2": {}}, Constructible.false())
    return _coarse_skeleton(classes_new, gcf, clause_out, R.pruned())


# --------------------------------------------------------------------------
# projection


@dataclass
class Projection:
    formula: GeneralCoreFormula
    case: int
    note: str = ""


def _renumber(gcf: GeneralCoreFormula, drop_positions: set, drop_class: int | None, drop_param: int | None,
              R: Constructible) -> GeneralCoreFormula:
    """Remove positions (and possibly one unlinked class / parameter) and renumber."""
    remaining = [p for p in range(gcf.arity) if p not in drop_positions]
    newpos = {p: k for k, p in enumerate(remaining)}
    cmap = {}
    k = 0
    for i in range(1, gcf.s + 1):
        if i == drop_class:
            continue
        k += 1
        cmap[i] = k
    pmap = {}
    k = 0
    for i in range(1, gcf.t + 1):
        if i == drop_param:
            continue
        k += 1
        pmap[i] = k
    ren = {}
    classes = []
    for i, members in enumerate(gcf.classes, 1):
        if i == drop_class:
            continue
        kept = [p for p in members if p not in drop_positions]
        for jn, p in enumerate(kept, 1):
            ren[lam(i, members.index(p) + 1)] = lam(cmap[i], jn)
        ren[alpha(i)] = alpha(cmap[i])
        classes.append(tuple(newpos[p] for p in kept))
    pclasses, params = [], []
    for i, members in enumerate(gcf.param_classes, 1):
        if i == drop_param:
            continue
        kept = [p for p in members if p not in drop_positions]
        for jn, p in enumerate(kept, 1):
            ren[mu(i, members.index(p) + 1)] = mu(pmap[i], jn)
        pclasses.append(tuple(newpos[p] for p in kept))
        params.append(gcf.params[i - 1])
    clauses = {"sigma": [], "delta1": [], "delta2": []}
    for kind, i, j, n in gcf.clauses():
        ni = cmap[i] if kind in ("sigma", "delta1") else pmap[i]
        nj = cmap[j] if kind in ("sigma", "delta2") else pmap[j]
        sv, uv = CLAUSE_VARS[kind]
        ren[f"{sv}_{i}_{j}"] = f"{sv}_{ni}_{nj}"
        ren[f"{uv}_{i}_{j}"] = f"{uv}_{ni}_{nj}"
        clauses[kind].append((ni, nj, n))
    R = R.rename({a: b for a, b in ren.items() if a != b and a in R.variables})
    return GeneralCoreFormula(
        gcf.N, classes, R, clauses["sigma"], clauses["delta1"], clauses["delta2"],
        pclasses, params, gcf.n_a,
    )


def _bind(R: Constructible, names: Sequence[str], taken: Iterable[str]) -> Constructible:
    """Existentially quantify ``names`` after renaming them to fresh y-variables."""
    used = set(taken) | set(R.variables) | set(R.bound)
    ren = {}
    for n in names:
        if n not in R.variables:
            continue
        y = _fresh("y", used)
        used.add(y)
        ren[n] = y
    return R.rename(ren).exists(ren.values())


def project(gcf: GeneralCoreFormula, k: int, l: Sequence[int], quantifier_free: bool = False) -> Projection:
    """Quantify away the vector variables e_{k,l} (1-based k over classes then
    parameters, l over the members of that class)."""
    s, t = gcf.s, gcf.t
    if not 1 <= k <= s + t:
        raise BadIndex(f"k = {k} outside 1..{s + t}")
    members = gcf.classes[k - 1] if k <= s else gcf.param_classes[k - s - 1]
    l = sorted(set(l))
    if not l or any(not 1 <= j <= len(members) for j in l):
        raise BadIndex(f"member indices {l} outside 1..{len(members)}")
    positions = {members[j - 1] for j in l}
    full = len(l) == len(members)
    taken = set(gcf.variables())
    if k <= s:
        names = [lam(k, j) for j in l]
        if full and k not in gcf.linked_classes():
            R = _bind(gcf.R, [alpha(k)] + names, taken)
            out = _renumber(gcf, positions, k, None, R)
            note = "class deleted"
        else:
            R = _bind(gcf.R, names, taken)
            out = _renumber(gcf, positions, None, None, R)
            note = "class kept without members" if full else ""
        case = 4 if full else 3
    else:
        i = k - s
        names = [mu(i, j) for j in l]
        R = _bind(gcf.R, names, taken)
        if full and i not in gcf.linked_params():
            out = _renumber(gcf, positions, None, i, R)
            note = "parameter deleted"
        else:
            out = _renumber(gcf, positions, None, None, R)
            note = "parameter kept without members" if full else ""
        case = 2 if full else 1
    if quantifier_free:
        out = out.with_R(eliminate_bound(out.R))
    return Projection(out, case, note)


def eliminate_bound(R: Constructible) -> Constructible:
    """Quantifier-free closure of ``exists bound . R`` for equation systems."""
    if not R.bound:
        return R
    if any(c.negated for c in R.cells):
        raise ValueError("elimination needs a predicate without negations")
    from .poly import PolySystem

    cells = []
    for c in R.cells:
        vs = sorted(c.variables() | set(R.variables))
        sys = PolySystem(c.positive, vs)
        cells.append(Cell(sys.eliminate([b for b in R.bound if b in vs]).polys))
    return Constructible(cells, R.variables).pruned()


# --------------------------------------------------------------------------
# substituting vectors by parameters


def substitute_params(
    core: GeneralCoreFormula, positions: Sequence[int], values: Sequence[BundleVector], frag: Fragment
) -> list[GeneralCoreFormula]:
    """Replace the free vectors at ``positions`` by fragment vectors.

    Returns general core formulas whose disjunction is equivalent to the
    substituted formula; an empty list means false.
    """
    if core.t:
        raise BadIndex("substitution expects a formula without parameters")
    if len(positions) != len(values):
        raise BadIndex("one value per position")
    N = core.N
    val = dict(zip(positions, values))
    for v in values:
        if not frag.contains_base(v.base):
            raise OutOfFragment(f"value over {v.base} outside the fragment")
    touched = [i for i, m in enumerate(core.classes, 1) if any(p in val for p in m)]
    untouched = [i for i in range(1, core.s + 1) if i not in touched]
    beta = {}
    for c in touched:
        bases = {val[p].base for p in core.classes[c - 1] if p in val}
        if len(bases) != 1:
            return []
        beta[c] = bases.pop()
        if beta[c] is INF and c in core.linked_classes():
            return []
    cnew = {c: k for k, c in enumerate(untouched, 1)}
    pnew = {c: k for k, c in enumerate(touched, 1)}
    remaining = [p for p in range(core.arity) if p not in val]
    newpos = {p: k for k, p in enumerate(remaining)}
    classes = [tuple(newpos[p] for p in core.classes[c - 1]) for c in untouched]
    pclasses = [tuple(newpos[p] for p in core.classes[c - 1] if p not in val) for c in touched]
    sigma2, delta1, delta2, tt = [], [], [], []
    ren = {}
    for c in untouched:
        ren[alpha(c)] = alpha(cnew[c])
        for j in range(1, len(core.classes[c - 1]) + 1):
            ren[lam(c, j)] = lam(cnew[c], j)
    for c in touched:
        kept = 0
        for j, p in enumerate(core.classes[c - 1], 1):
            if p not in val:
                kept += 1
                ren[lam(c, j)] = mu(pnew[c], kept)
    for i, j, n in core.sigma:
        if i in cnew and j in cnew:
            sigma2.append((cnew[i], cnew[j], n))
            ren[f"b_{i}_{j}"] = f"b_{cnew[i]}_{cnew[j]}"
            ren[f"gamma_{i}_{j}"] = f"gamma_{cnew[i]}_{cnew[j]}"
        elif i in cnew:
            delta1.append((cnew[i], pnew[j], n))
            ren[f"b_{i}_{j}"] = f"m_{cnew[i]}_{pnew[j]}"
            ren[f"gamma_{i}_{j}"] = f"delta_{cnew[i]}_{pnew[j]}"
        elif j in cnew:
            delta2.append((pnew[i], cnew[j], n))
            ren[f"b_{i}_{j}"] = f"o_{pnew[i]}_{cnew[j]}"
            ren[f"gamma_{i}_{j}"] = f"epsilon_{pnew[i]}_{cnew[j]}"
        else:
            if beta[j] != beta[i] + n:
                return []
            tt.append((i, j, n))
    out = []
    for ks in itertools.product(range(N), repeat=len(touched)):
        h = {c: BundleVector.canonical(beta[c], k, N) for c, k in zip(touched, ks)}
        consts: dict = {}
        for c in touched:
            consts[alpha(c)] = beta[c]
            hinv = inv(h[c].coord)
            for j, p in enumerate(core.classes[c - 1], 1):
                if p in val:
                    consts[lam(c, j)] = val[p].coord * hinv
        option_lists = []
        for i, j, n in tt:
            opts = _ladder_options(frag, N, h[i], n, beta[j], True)
            option_lists.append(
                [
                    {f"b_{i}_{j}": b, f"gamma_{i}_{j}": _zeta(N, k) * inv(h[j].coord)}
                    for b, k in opts
                ]
            )
        for combo in itertools.product(*option_lists):
            sub = dict(consts)
            for d in combo:
                sub.update(d)
            R = core.R.subs({k: (v if isinstance(v, Poly) else Poly.const(v)) for k, v in sub.items()})
            R = R.rename({a: b for a, b in ren.items() if a != b and a in R.variables})
            out.append(
                GeneralCoreFormula(
                    N, classes, R.pruned(), sigma2, delta1, delta2, pclasses,
                    tuple(h[c] for c in touched), core.n_a,
                )
            )
    return out
