"""Back-and-forth extension of the identity on the field sort to an
isomorphism between two fragments that differ in their square-root choices.

On every fiber the map is a label shift ``(a, k) -> (a, k + d_a)``, which
commutes with the projection and with the root-of-unity action.  The shifts
are fixed inductively along each Z-coset starting from the seed: going up,
the image of the next section point is forced by the ladder relation, up to
the sign ``eps`` relating the two witness scalars; going down likewise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import FiberMismatch, OddN
from .structure import INF, Fragment, LinePoint


@dataclass
class SignStep:
    base: object  # lower end of the base pair
    sign: int

    def to_json(self):
        return {"base": str(self.base), "sign": self.sign}


@dataclass
class StructureMap:
    N: int
    offsets: dict  # base -> label shift
    sign_trace: list = field(default_factory=list)

    def __call__(self, p: LinePoint) -> LinePoint:
        return LinePoint(p.base, (p.index + self.offsets[p.base]) % self.N)

    def compose(self, other: StructureMap) -> StructureMap:
        """self followed by other."""
        offs = {a: (d + other.offsets[a]) % self.N for a, d in self.offsets.items()}
        trace = [
            SignStep(s.base, s.sign * t.sign) for s, t in zip(self.sign_trace, other.sign_trace)
        ]
        return StructureMap(self.N, offs, trace)

    def inverse(self) -> StructureMap:
        return StructureMap(
            self.N, {a: (-d) % self.N for a, d in self.offsets.items()}, list(self.sign_trace)
        )

    def sign_trace_json(self) -> list:
        return [s.to_json() for s in self.sign_trace]


def _relative_sign(bA, bB) -> int | None:
    if bA == bB:
        return 1
    if bA == -bB:
        return -1
    return None


def extend_isomorphism(fragA: Fragment, fragB: Fragment) -> StructureMap:
    if fragA.N != fragB.N:
        raise FiberMismatch(f"fragments over N = {fragA.N} and N = {fragB.N}")
    if (
        fragA.seeds != fragB.seeds
        or fragA.depth != fragB.depth
        or fragA.lower != fragB.lower
    ):
        raise FiberMismatch("fragments must share seeds and depth")
    N = fragA.N
    offsets: dict = {}
    trace: list[SignStep] = []

    def step(a, kA, bA, kB, bB, cur_offset, up: bool):
        sign = _relative_sign(bA, bB)
        if sign is None:
            raise FiberMismatch(f"witness scalars {bA} and {bB} over {a} are not related by a sign")
        extra = 0
        if sign == -1:
            if N % 2:
                raise OddN(
                    f"sign -1 needed at the pair ({a}, {a + 1}) but -1 is not an {N}-th root of unity",
                    step=a,
                )
            extra = N // 2
        trace.append(SignStep(a, sign))
        # A-section: (a, i) raises to (a+1, i + kA); B-section likewise with kB
        if up:
            return (cur_offset + kB - kA + extra) % N
        return (cur_offset - kB + kA - extra) % N

    for s in fragA.seeds:
        if s is INF:
            offsets[INF] = 0
            continue
        offsets[s] = 0
        for n in range(0, fragA.depth):
            a = s + n
            kA, bA = fragA.raise_step(a)
            kB, bB = fragB.raise_step(a)
            offsets[a + 1] = step(a, kA, bA, kB, bB, offsets[a], True)
        for n in range(0, -fragA.lower):
            a = s - n  # lowering from a to a - 1 through the pair (a-1, a)
            kA, bA = fragA.raise_step(a - 1)
            kB, bB = fragB.raise_step(a - 1)
            offsets[a - 1] = step(a - 1, kA, bA, kB, bB, offsets[a], False)
    return StructureMap(N, offsets, trace)


@dataclass
class IsoReport:
    passed: bool
    checks: dict
    counterexample: object = None

    def lines(self) -> list[str]:
        out = [f"{k}: {'pass' if v else 'FAIL'}" for k, v in self.checks.items()]
        if self.counterexample:
            out.append(f"counterexample: {self.counterexample}")
        return out


def verify_isomorphism(m: StructureMap, fragA: Fragment, fragB: Fragment) -> IsoReport:
    checks = {"projection": True, "bijection": True, "equivariance": True, "A": True, "Adag": True}
    ce = None
    N = fragA.N
    if N != fragB.N or set(fragA.bases) != set(fragB.bases):
        return IsoReport(False, {"projection": False}, "fragments over different bases")
    for a in fragA.bases:
        if a not in m.offsets:
            checks["projection"] = False
            ce = ce or f"no image for the fiber over {a}"
            continue
        images = [m(p) for p in fragA.fibers[a]]
        if any(q.base != a for q in images):
            checks["projection"] = False
            ce = ce or f"fiber over {a} not mapped to itself"
        if set(images) != set(fragB.fibers[a]):
            checks["bijection"] = False
            ce = ce or f"fiber over {a} not mapped bijectively"
        for p in fragA.fibers[a]:
            for j in range(N):
                moved = LinePoint(a, (p.index + j) % N)
                img = m(p)
                if m(moved) != LinePoint(a, (img.index + j) % N):
                    checks["equivariance"] = False
                    ce = ce or f"action not preserved at {p}, shift {j}"
    if checks["projection"]:
        for name, rel_a, rel_b in (("A", fragA.A, fragB.A), ("Adag", fragA.Adag, fragB.Adag)):
            image = set()
            for x, y, b in sorted(rel_a, key=str):
                t = (m(x), m(y), b)
                image.add(t)
                if t not in rel_b:
                    checks[name] = False
                    ce = ce or f"{name}({x}, {y}, {b}) maps to {name}({t[0]}, {t[1]}, {b}), absent in the target"
                    break
            if checks[name] and image != set(rel_b):
                checks[name] = False
                ce = ce or f"{name} of the target has triples outside the image"
    return IsoReport(all(checks.values()), checks, ce)


def flip_step(m: StructureMap, base) -> StructureMap:
    """Mutation helper: move the image of one fiber by half a turn (or by one label)."""
    shift = m.N // 2 if m.N % 2 == 0 else 1
    offs = dict(m.offsets)
    offs[base] = (offs[base] + shift) % m.N
    return StructureMap(m.N, offs, list(m.sign_trace))


def identity_map(frag: Fragment) -> StructureMap:
    return StructureMap(frag.N, {a: 0 for a in frag.bases}, [])
