"""Finite fragments of QHO_N and of the line bundle built over it.

A fragment materializes the base points ``s + n`` (``lower <= n <= depth``)
for each seed ``s``, the ``N`` fiber points over each base, and the ladder
relations ``A`` and ``A_dag`` as explicit sets of triples.  Fiber points are
labelled ``(base, k)`` and ``zeta^j`` acts by ``k -> k + j mod N``.

The raising map ``a`` sends ``V_a`` to ``V_{a+1}`` with witness scalar ``b``,
``b^2 = a``; ``a_dag`` lowers with the same scalar.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import InfinitePoint, OutOfFragment, SeedCollision
from .field import Scalar, Tower, as_scalar, join_towers, parse_scalar


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __add__(self, n):
        return self

    __radd__ = __add__

    def __sub__(self, n):
        return self

    def __repr__(self):
        return "INF"

    __str__ = lambda self: "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

BasePoint = Union[Scalar, _Infinity]


def parse_base(text: str, tower: Tower | int | None = None) -> BasePoint:
    if text.strip() in ("inf", "oo", "infinity"):
        return INF
    return parse_scalar(text, tower)


def base_str(a: BasePoint) -> str:
    return str(a)


def shift(a: BasePoint, n: int) -> BasePoint:
    return a if a is INF else a + n


@dataclass(frozen=True)
class LinePoint:
    base: BasePoint
    index: int

    def __str__(self):
        return f"({self.base}, {self.index})"


@dataclass(frozen=True)
class BundleVector:
    """The class of ``(e, x)`` stored as its coordinate on ``(base, 0)``."""

    base: BasePoint
    coord: Scalar
    N: int

    def __post_init__(self):
        if self.base is not INF and not isinstance(self.base, Scalar):
            object.__setattr__(self, "base", as_scalar(self.base))
        if not isinstance(self.coord, Scalar):
            object.__setattr__(self, "coord", as_scalar(self.coord))

    @classmethod
    def make(cls, e: LinePoint, x, N: int) -> BundleVector:
        x = as_scalar(x)
        return cls(e.base, Tower.base(N).zeta(e.index) * x, N)

    @classmethod
    def canonical(cls, base: BasePoint, k: int, N: int) -> BundleVector:
        return cls(base, Tower.base(N).zeta(k), N)

    def is_zero(self) -> bool:
        return self.coord.is_zero()

    def scale(self, lam) -> BundleVector:
        return BundleVector(self.base, self.coord * as_scalar(lam), self.N)

    def __add__(self, other: BundleVector) -> BundleVector:
        if other.base != self.base:
            raise ValueError("vectors lie in different fibers")
        return BundleVector(self.base, self.coord + other.coord, self.N)

    def act(self, j: int) -> BundleVector:
        return self.scale(Tower.base(self.N).zeta(j))

    def canonical_index(self) -> int | None:
        """k if this is the canonical element (base, k) with coordinate 1."""
        z = Tower.base(self.N)
        for k in range(self.N):
            if self.coord == z.zeta(k):
                return k
        return None

    def coefficient_on(self, k: int) -> Scalar:
        """lambda with self = lambda * (base, k)."""
        return self.coord * Tower.base(self.N).zeta(-k)

    def __eq__(self, other):
        if not isinstance(other, BundleVector):
            return NotImplemented
        return self.N == other.N and self.base == other.base and self.coord == other.coord

    def __hash__(self):
        return hash((self.N, self.base, self.coord))

    def __str__(self):
        return f"[{self.base}: {self.coord}]"


Triple = tuple  # (LinePoint, LinePoint, Scalar)


@dataclass(frozen=True)
class Witness:
    base: BasePoint
    b: Scalar
    e_index: int
    eup_index: int


def _orbit(N: int, e: LinePoint, e2: LinePoint, b: Scalar, signs: bool):
    out = []
    for j in range(N):
        out.append((LinePoint(e.base, (e.index + j) % N), LinePoint(e2.base, (e2.index + j) % N), b))
        if signs:
            out.append(
                (LinePoint(e.base, (e.index + j) % N), LinePoint(e2.base, (e2.index + j + N // 2) % N), -b)
            )
    return out


class Fragment:
    """A finite generated piece of QHO_N.  Immutable after construction."""

    def __init__(
        self,
        N: int,
        seeds: Sequence[BasePoint],
        depth: int,
        witnesses: Sequence[Witness],
        tower: Tower,
        lower: int = 0,
        A: Iterable[Triple] | None = None,
        Adag: Iterable[Triple] | None = None,
        fibers: dict | None = None,
    ):
        self.N = N
        self.seeds = tuple(seeds)
        self.depth = depth
        self.lower = lower
        self.tower = tower
        self.witnesses = tuple(witnesses)
        self.bases: list[BasePoint] = []
        for s in self.seeds:
            if s is INF:
                if INF not in self.bases:
                    self.bases.append(INF)
                continue
            for n in range(lower, depth + 1):
                self.bases.append(s + n)
        self._base_set = set(self.bases)
        self.fibers = fibers if fibers is not None else {
            a: tuple(LinePoint(a, k) for k in range(N)) for a in self.bases
        }
        signs = N % 2 == 0
        if A is None:
            A, Adag = [], []
            for w in self.witnesses:
                e = LinePoint(w.base, w.e_index)
                e2 = LinePoint(w.base + 1, w.eup_index)
                A.extend(_orbit(N, e, e2, w.b, signs))
                Adag.extend((y, x, b) for x, y, b in _orbit(N, e, e2, w.b, signs))
        self.A = frozenset(A)
        self.Adag = frozenset(Adag)
        self._a_from: dict = {}
        for x, y, b in self.A:
            self._a_from.setdefault(x, []).append((y, b))
        self._adag_from: dict = {}
        for y, x, b in self.Adag:
            self._adag_from.setdefault(y, []).append((x, b))
        self._witness_at = {w.base: w for w in self.witnesses}

    # membership -------------------------------------------------------------

    def contains_base(self, a: BasePoint) -> bool:
        if a is not INF and not isinstance(a, Scalar):
            a = as_scalar(a)
        return a in self._base_set

    def finite_bases(self) -> list[Scalar]:
        return [a for a in self.bases if a is not INF]

    def witness(self, a: Scalar) -> Witness:
        if a not in self._witness_at:
            raise OutOfFragment(f"no ladder witness for the pair ({a}, {a + 1})")
        return self._witness_at[a]

    def canonical_vectors(self, a: BasePoint) -> list[BundleVector]:
        if not self.contains_base(a):
            raise OutOfFragment(f"base {a} outside the fragment")
        return [BundleVector.canonical(a, k, self.N) for k in range(self.N)]

    def vector(self, e: LinePoint, x) -> BundleVector:
        return BundleVector.make(e, x, self.N)

    # ladder maps --------------------------------------------------------------

    def raise_step(self, a: BasePoint) -> tuple[int, Scalar]:
        """(k, b) with a(base a, 0) = b * (a + 1, k)."""
        if a is INF:
            raise OutOfFragment("no ladder relations over infinity")
        cands = self._a_from.get(LinePoint(a, 0))
        if not cands:
            raise OutOfFragment(f"raising from base {a} leaves the fragment")
        y, b = min(cands, key=lambda yb: yb[0].index)
        return y.index, b

    def lower_step(self, a: BasePoint) -> tuple[int, Scalar]:
        """(k, b) with a_dag(base a, 0) = b * (a - 1, k)."""
        if a is INF:
            raise OutOfFragment("no ladder relations over infinity")
        cands = self._adag_from.get(LinePoint(a, 0))
        if not cands:
            raise OutOfFragment(f"lowering from base {a} leaves the fragment")
        x, b = min(cands, key=lambda xb: xb[0].index)
        return x.index, b

    def apply_a(self, v: BundleVector) -> BundleVector:
        if v.base is INF:
            raise OutOfFragment("the raising map is undefined over infinity")
        k, b = self.raise_step(v.base)
        return BundleVector(v.base + 1, v.coord * Tower.base(self.N).zeta(k) * b, self.N)

    def apply_adag(self, v: BundleVector) -> BundleVector:
        if v.base is INF:
            raise OutOfFragment("the lowering map is undefined over infinity")
        k, b = self.lower_step(v.base)
        return BundleVector(v.base - 1, v.coord * Tower.base(self.N).zeta(k) * b, self.N)

    def apply_a_power(self, v: BundleVector, n: int) -> BundleVector:
        for _ in range(n):
            v = self.apply_a(v)
        return v

    def apply_adag_power(self, v: BundleVector, n: int) -> BundleVector:
        for _ in range(n):
            v = self.apply_adag(v)
        return v

    # derived views --------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Fragment):
            return NotImplemented
        return (
            self.N == other.N
            and self.seeds == other.seeds
            and self.depth == other.depth
            and self.lower == other.lower
            and self.witnesses == other.witnesses
            and self.A == other.A
            and self.Adag == other.Adag
        )

    def __hash__(self):
        return hash((self.N, self.seeds, self.depth, self.lower, self.witnesses))

    def __repr__(self):
        seeds = ", ".join(str(s) for s in self.seeds)
        return f"Fragment(N={self.N}, seeds=[{seeds}], depth={self.depth})"


# --------------------------------------------------------------------------
# construction


def _check_seeds(seeds: Sequence[BasePoint], span: int):
    finite = [s for s in seeds if s is not INF]
    for i in range(len(finite)):
        for j in range(i + 1, len(finite)):
            d = finite[i] - finite[j]
            if d.is_integer() and abs(d.as_fraction()) <= span:
                raise SeedCollision(f"seeds {finite[i]} and {finite[j]} lie in one Z-coset segment")
    if sum(1 for s in seeds if s is INF) > 1:
        raise SeedCollision("infinity given twice")


def _sign_source(policy, count: int):
    """Yields (sign, label shift) pairs for successive witnesses."""
    if policy in (None, "canonical"):
        return [(1, 0)] * count
    if isinstance(policy, tuple) and policy[0] == "random":
        rng = random.Random(policy[1])
        return [(rng.choice((1, -1)), rng.randrange(1 << 30)) for _ in range(count)]
    if isinstance(policy, str) and policy.startswith("random:"):
        return _sign_source(("random", int(policy.split(":", 1)[1])), count)
    signs = list(policy)
    if len(signs) != count:
        raise ValueError(f"explicit sqrt policy needs {count} signs, got {len(signs)}")
    out = []
    for s in signs:
        if isinstance(s, (tuple, list)):
            out.append((int(s[0]), int(s[1])))
        else:
            out.append((int(s), 0))
    if any(s not in (1, -1) for s, _ in out):
        raise ValueError("signs must be +1 or -1")
    return out


def build_fragment(
    N: int,
    seeds: Sequence,
    depth: int,
    sqrt_policy="canonical",
    lower: int = 0,
) -> Fragment:
    """Build the fragment of QHO_N over ``s + n`` for seeds ``s``.

    ``sqrt_policy`` is ``"canonical"``, ``("random", seed)`` / ``"random:<seed>"``
    (random sign and random upper label per witness), or an explicit list with
    one sign (or ``(sign, label shift)``) per consecutive base pair.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if depth < lower:
        raise ValueError("depth below the lower end")
    base_tower = Tower.base(N)
    seeds = [s if s is INF or isinstance(s, Scalar) else parse_base(str(s), base_tower) for s in seeds]
    _check_seeds(seeds, depth - lower)
    pairs = [s + n for s in seeds if s is not INF for n in range(lower, depth)]
    choices = _sign_source(sqrt_policy, len(pairs))
    tower = base_tower
    witnesses = []
    for a, (sign, shift_) in zip(pairs, choices):
        tower, root = tower.sqrt(a)
        b = root if sign == 1 else -root
        eup = shift_ % N if N > 1 else 0
        witnesses.append(Witness(a, b, 0, eup))
    for s in seeds:
        if s is not INF and s.tower is not None:
            tower = join_towers(tower, s.tower)
    return Fragment(N, seeds, depth, witnesses, tower, lower)


def replace_witness(frag: Fragment, base: Scalar, b: Scalar) -> Fragment:
    """Mutation helper: the same fragment with one witness scalar changed."""
    ws = [Witness(w.base, b, w.e_index, w.eup_index) if w.base == base else w for w in frag.witnesses]
    return Fragment(frag.N, frag.seeds, frag.depth, ws, frag.tower, frag.lower)


def drop_sign_orbit(frag: Fragment) -> Fragment:
    """Mutation helper: remove the triples contributed by the even-N sign rule."""
    A, Adag = [], []
    for w in frag.witnesses:
        e = LinePoint(w.base, w.e_index)
        e2 = LinePoint(w.base + 1, w.eup_index)
        A.extend(_orbit(frag.N, e, e2, w.b, False))
        Adag.extend((y, x, b) for x, y, b in _orbit(frag.N, e, e2, w.b, False))
    return Fragment(frag.N, frag.seeds, frag.depth, frag.witnesses, frag.tower, frag.lower, A, Adag)


def with_relations(frag: Fragment, A=None, Adag=None, fibers=None) -> Fragment:
    return Fragment(
        frag.N, frag.seeds, frag.depth, frag.witnesses, frag.tower, frag.lower,
        frag.A if A is None else A, frag.Adag if Adag is None else Adag,
        frag.fibers if fibers is None else fibers,
    )


# --------------------------------------------------------------------------
# axiom checking


@dataclass
class AxiomResult:
    name: str
    passed: bool
    counterexample: object = None
    note: str = ""

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        extra = "" if self.passed else f": {self.counterexample}"
        return f"{self.name}: {status}{extra}"


@dataclass
class AxiomReport:
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [r.line() for r in self.results]


def _fmt_triple(t) -> str:
    x, y, b = t
    return f"({x}, {y}, {b})"


def check_axioms(frag: Fragment) -> AxiomReport:
    N = frag.N
    zeta_shift = lambda p, j: LinePoint(p.base, (p.index + j) % N)
    report = AxiomReport()

    # axiom 3: every fragment base has a nonempty fiber
    bad = next((a for a in frag.bases if not frag.fibers.get(a)), None)
    report.results.append(AxiomResult("axiom3", bad is None, bad and f"empty fiber over {bad}"))

    # axiom 4: free and transitive action on each fiber
    ce = None
    for a in frag.bases:
        fiber = set(frag.fibers.get(a, ()))
        if not fiber:
            continue
        start = min(fiber, key=lambda p: p.index)
        orbit = {zeta_shift(start, j) for j in range(N)}
        if orbit != fiber:
            ce = f"fiber over {a} is not one orbit: {sorted(p.index for p in fiber)}"
            break
        for p in fiber:
            if any(zeta_shift(p, j) == p for j in range(1, N)):
                ce = f"action not free at {p}"
                break
        if ce:
            break
    report.results.append(AxiomResult("axiom4", ce is None, ce))

    # axiom 5: one uniform witness (e', b) per fiber point
    ce = None
    for a in frag.finite_bases():
        up = a + 1
        if not frag.contains_base(up):
            continue
        for e in frag.fibers[a]:
            found = False
            for e2, b in frag._a_from.get(e, ()):
                if e2.base != up or b * b != a:
                    continue
                if all(
                    (zeta_shift(e, j), zeta_shift(e2, j), b) in frag.A
                    and (zeta_shift(e2, j), zeta_shift(e, j), b) in frag.Adag
                    for j in range(N)
                ):
                    found = True
                    break
            if not found:
                cands = [(e, e2, b) for e2, b in frag._a_from.get(e, ())]
                detail = ", ".join(_fmt_triple(t) for t in cands) or "no A-triple"
                ce = f"no witness for e = {e}; candidates {detail}"
                break
        if ce:
            break
    if ce is None:
        for t in sorted(frag.A | frag.Adag, key=str):
            x, y, b = t
            src = x if t in frag.A else y
            if b * b != src.base:
                ce = f"triple {_fmt_triple(t)} has b^2 != {src.base}"
                break
    report.results.append(AxiomResult("axiom5", ce is None, ce))

    # axiom 6: sign rule for even N
    if N % 2:
        report.results.append(AxiomResult("axiom6", True, None, "not applicable for odd N"))
    else:
        ce = None
        h = N // 2
        for x, y, b in sorted(frag.A, key=str):
            for j in range(N):
                t = (zeta_shift(x, j), zeta_shift(y, j + h), -b)
                if t not in frag.A:
                    ce = f"A{_fmt_triple((x, y, b))} present but A{_fmt_triple(t)} missing"
                    break
            if ce:
                break
        if ce is None:
            for y, x, b in sorted(frag.Adag, key=str):
                for j in range(N):
                    t = (zeta_shift(y, j), zeta_shift(x, j + h), -b)
                    if t not in frag.Adag:
                        ce = f"Adag{_fmt_triple((y, x, b))} present but Adag{_fmt_triple(t)} missing"
                        break
                if ce:
                    break
        report.results.append(AxiomResult("axiom6", ce is None, ce))
    return report


def fiber_sizes(frag: Fragment) -> dict:
    return {a: len(frag.fibers[a]) for a in frag.bases}


# --------------------------------------------------------------------------
# spectrum


def hamiltonian_eigenvalue(v: BundleVector) -> Scalar:
    if v.base is INF:
        raise InfinitePoint("the Hamiltonian has no eigenvalue over infinity")
    return v.base + Scalar.from_fraction(1) / 2


def lower_to_ground(v: BundleVector, frag: Fragment, max_steps: int) -> tuple[int, BundleVector]:
    """Apply the lowering map until the zero vector; (max_steps, v) if never."""
    cur = v
    for step in range(1, max_steps + 1):
        try:
            cur = frag.apply_adag(cur)
        except OutOfFragment:
            return max_steps, cur
        if cur.is_zero():
            return step, cur
    return max_steps, cur


def real_part(frag: Fragment) -> list[Scalar]:
    out = []
    for a in frag.finite_bases():
        if a.is_integer() and a.as_fraction() >= 0:
            out.append(a)
    return sorted(out, key=lambda a: a.as_fraction())


def spectrum(frag: Fragment) -> list[Scalar]:
    return [hamiltonian_eigenvalue(BundleVector.canonical(a, 0, frag.N)) for a in real_part(frag)]


# --------------------------------------------------------------------------
# JSON


def fragment_to_json(frag: Fragment) -> dict:
    data = {
        "N": frag.N,
        "seeds": [base_str(s) for s in frag.seeds],
        "depth": frag.depth,
        "witnesses": [
            {"base": str(w.base), "b": str(w.b), "e_index": w.e_index, "eup_index": w.eup_index}
            for w in frag.witnesses
        ],
        "tower": [str(frag.tower.radicand(n)) for n in frag.tower.generator_names],
    }
    if frag.lower:
        data["lower"] = frag.lower
    return data


def fragment_from_json(data: dict) -> Fragment:
    N = int(data["N"])
    tower = Tower.base(N)
    for r in data.get("tower", []):
        tower, _ = tower.sqrt(parse_scalar(r, tower), formal=True)
    seeds = [parse_base(s, tower) for s in data["seeds"]]
    witnesses = []
    for w in data["witnesses"]:
        base = parse_scalar(w["base"], tower)
        b = parse_scalar(w["b"], tower)
        if b.tower is not None:
            tower = join_towers(tower, b.tower)
        witnesses.append(Witness(base, b, int(w["e_index"]), int(w["eup_index"])))
    return Fragment(N, seeds, int(data["depth"]), witnesses, tower, int(data.get("lower", 0)))


def dumps_fragment(frag: Fragment) -> str:
    return json.dumps(fragment_to_json(frag), indent=2, sort_keys=True) + "\n"


def loads_fragment(text: str) -> Fragment:
    return fragment_from_json(json.loads(text))
