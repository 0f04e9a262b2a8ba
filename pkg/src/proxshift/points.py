"""Points of the induced subshift: lazy coordinates, windows, membership, decoding.

A constructed point is ``sigma^s`` of the sample point over a root z. Its
coordinates are either the star or ``T^e z``; they are evaluated on demand
by descending the tower, so deep levels stay reachable without
materialising whole blocks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

from .base_system import STAR_DISTANCE, BasePoint, distance, shift
from .tower import Tower

DEFAULT_WINDOW_CAP = 5_000_000


class DepthError(ValueError):
    """The tower is too shallow to evaluate the requested coordinates."""


class StarType:
    __slots__ = ()
    is_star = True

    def shifted(self, n: int) -> "StarType":
        return self

    def __repr__(self):
        return "*"

    def __reduce__(self):
        return "STAR"


STAR = StarType()


@dataclass(frozen=True, eq=False)
class Orbit:
    """The base point ``T^exponent(root)``."""

    root: BasePoint
    exponent: int
    is_star = False

    @property
    def point(self) -> BasePoint:
        return shift(self.root, self.exponent)

    def shifted(self, n: int) -> "Orbit":
        return Orbit(self.root, self.exponent + n)

    def __eq__(self, other):
        if not isinstance(other, Orbit):
            return NotImplemented if not isinstance(other, StarType) else False
        if self.root is other.root or self.root == other.root:
            d = self.exponent - other.exponent
            per = self.root.period
            return d == 0 if per is None else d % per == 0
        return self.point == other.point

    def __hash__(self):
        return hash(self.root)

    def __repr__(self):
        return f"Orbit({self.root.format()!r}, {self.exponent})"


Coordinate = Union[StarType, Orbit]


def coord_distance(u: Coordinate, v: Coordinate, tol: float = 1e-9) -> float:
    if u.is_star or v.is_star:
        return 0.0 if (u.is_star and v.is_star) else STAR_DISTANCE
    if u == v:
        return 0.0
    return distance(u.point, v.point, tol)


@dataclass(frozen=True)
class RSequence:
    values: tuple[int, ...]

    def __getitem__(self, k: int) -> int:
        return self.values[k]

    def __len__(self):
        return len(self.values)

    def consistent(self, tower: Tower) -> bool:
        return all(0 <= r < tower.p(k) for k, r in enumerate(self.values)) and all(
            self.values[k + 1] % tower.p(k) == self.values[k] for k in range(len(self.values) - 1)
        )


@dataclass(frozen=True)
class Window:
    """Coordinates of a point on the half-open range ``[lo, hi)``."""

    lo: int
    hi: int
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.hi - self.lo:
            raise ValueError("window length does not match its range")

    def __getitem__(self, i: int) -> Coordinate:
        if not self.lo <= i < self.hi:
            raise IndexError(f"index {i} outside window [{self.lo}, {self.hi})")
        return self.coords[i - self.lo]

    def __len__(self):
        return self.hi - self.lo

    def items(self) -> Iterator[tuple[int, Coordinate]]:
        return zip(range(self.lo, self.hi), self.coords)

    def star_indices(self) -> list[int]:
        return [i for i, c in self.items() if c.is_star]

    def roots(self) -> list[BasePoint]:
        out: list[BasePoint] = []
        for c in self.coords:
            if not c.is_star and not any(c.root is r for r in out):
                out.append(c.root)
        return out

    def to_text(self) -> str:
        roots = self.roots()
        ids = {id(r): k for k, r in enumerate(roots)}
        toks = ["*" if c.is_star else f"@{ids[id(c.root)]}^{c.exponent}" for c in self.coords]
        return f"{self.lo} {self.hi}\n" + " ".join(toks) + "\n"

    def to_json(self) -> dict:
        roots = self.roots()
        ids = {id(r): k for k, r in enumerate(roots)}
        return {
            "lo": self.lo,
            "hi": self.hi,
            "roots": [r.format() for r in roots],
            "coords": [None if c.is_star else [ids[id(c.root)], c.exponent] for c in self.coords],
        }

    @classmethod
    def from_text(cls, text: str, roots: Sequence[BasePoint]) -> "Window":
        head, _, body = text.strip().partition("\n")
        lo, hi = map(int, head.split())
        coords = []
        for tok in body.split():
            if tok == "*":
                coords.append(STAR)
            else:
                rid, exp = tok.lstrip("@").split("^")
                coords.append(Orbit(roots[int(rid)], int(exp)))
        return cls(lo, hi, tuple(coords))

    @classmethod
    def from_json(cls, data: Union[dict, str]) -> "Window":
        if isinstance(data, str):
            data = json.loads(data)
        roots = [BasePoint.parse(r) for r in data["roots"]]
        coords = tuple(STAR if c is None else Orbit(roots[c[0]], c[1]) for c in data["coords"])
        return cls(data["lo"], data["hi"], coords)


@dataclass(frozen=True, eq=False)
class PointSpec:
    """``sigma^shift`` of the sample point over ``root``; root None is the all-star point."""

    tower: Tower
    root: Optional[BasePoint]
    shift: int = 0

    @property
    def depth(self) -> int:
        return self.tower.depth

    @property
    def is_star_point(self) -> bool:
        return self.root is None

    @property
    def domain(self) -> tuple[Optional[int], Optional[int]]:
        """Half-open index range the tower can evaluate (None = unbounded)."""
        if self.root is None:
            return None, None
        pD = self.tower.p(self.depth)
        return -pD - self.shift, pD - self.shift

    def covers(self, lo: int, hi: int) -> bool:
        a, b = self.domain
        return a is None or (a <= lo and hi <= b)

    def r(self, k: int) -> int:
        if self.root is None:
            raise ValueError("the all-star point has no phase sequence")
        return (-self.shift) % self.tower.p(k)

    def rsequence(self, K: Optional[int] = None) -> RSequence:
        K = self.depth if K is None else K
        return RSequence(tuple(self.r(k) for k in range(K + 1)))

    def symbol_at(self, i: int) -> Coordinate:
        return symbol_at(self, i)

    def window(self, lo: int, hi: int) -> Window:
        return window(self, lo, hi)

    def describe(self) -> dict:
        return {
            "root": None if self.root is None else self.root.format(),
            "shift": self.shift,
            "depth": self.depth,
            "domain": list(self.domain),
        }


def sample_point(tower: Tower, z: BasePoint) -> PointSpec:
    return PointSpec(tower, z, 0)


def star_point(tower: Tower) -> PointSpec:
    return PointSpec(tower, None, 0)


def shift_point(p: PointSpec, s: int) -> PointSpec:
    return PointSpec(p.tower, p.root, p.shift + s)


def _sample_exponent(tower: Tower, j: int) -> Optional[int]:
    """Exponent of coordinate ``j`` of the sample point; None for the star."""
    D = tower.depth
    k = 0
    while not -tower.p(k) <= j < tower.p(k):
        k += 1
        if k > D:
            raise DepthError(f"index {j} lies outside [-p_{D}, p_{D}) = [{-tower.p(D)}, {tower.p(D)})")
    if j >= 0:
        start, e = 0, 0
    else:
        start, e = -tower.p(k), tower.seed_exponents[k]
    for L in range(k, -1, -1):
        lvl = tower.levels[L]
        i = (j - start) // lvl.p_prev
        if i in lvl.Aset:
            return None
        e += lvl.b_prime_prev * lvl.f[i]
        start += i * lvl.p_prev
    return e


def symbol_at(p: PointSpec, i: int) -> Coordinate:
    if p.root is None:
        return STAR
    e = _sample_exponent(p.tower, i + p.shift)
    return STAR if e is None else Orbit(p.root, e)


def _fill(tower: Tower, root: BasePoint, L: int, start: int, e: int, lo: int, hi: int, out: list):
    # block of level L at [start, start + p_L) with leading exponent e, clipped to [lo, hi)
    lvl = tower.levels[L]
    pp = lvl.p_prev
    i_lo = max(0, (lo - start) // pp)
    i_hi = min(lvl.n - 1, (hi - 1 - start) // pp)
    for i in range(i_lo, i_hi + 1):
        s = start + i * pp
        if i in lvl.Aset:
            continue  # out is prefilled with STAR
        ei = e + lvl.b_prime_prev * lvl.f[i]
        if L == 0:
            out[s - lo] = Orbit(root, ei)
        else:
            _fill(tower, root, L - 1, s, ei, lo, hi, out)


def window(p: PointSpec, lo: int, hi: int, cap: int = DEFAULT_WINDOW_CAP) -> Window:
    """Materialise ``[lo, hi)`` by filling blocks top-down (independent of symbol_at)."""
    if hi < lo:
        raise ValueError("need lo <= hi")
    if hi - lo > cap:
        raise ValueError(f"window length {hi - lo} exceeds cap {cap}")
    out = [STAR] * (hi - lo)
    if p.root is None or hi == lo:
        return Window(lo, hi, tuple(out))
    if not p.covers(lo, hi):
        a, b = p.domain
        raise DepthError(f"window [{lo}, {hi}) exceeds the evaluable range [{a}, {b})")
    tower, D = p.tower, p.depth
    slo, shi = lo + p.shift, hi + p.shift
    pD = tower.p(D)
    if slo < 0:
        _fill(tower, p.root, D, -pD, tower.seed_exponents[D], slo, min(shi, 0), out)
    if shi > 0:
        _fill(tower, p.root, D, 0, 0, max(slo, 0), shi, _Offset(out, max(slo, 0) - slo))
    return Window(lo, hi, tuple(out))


class _Offset:
    """List view shifted by a fixed offset (lets _fill write into a sub-range)."""

    __slots__ = ("base", "off")

    def __init__(self, base: list, off: int):
        self.base, self.off = base, off

    def __setitem__(self, i, v):
        self.base[i + self.off] = v


# ---------------------------------------------------------------- membership


@dataclass
class Violation:
    level: int
    index: int
    reason: str


@dataclass
class MembershipReport:
    status: str  # "pass" | "fail" | "inconclusive"
    blocks_checked: dict[int, int] = field(default_factory=dict)
    violation: Optional[Violation] = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def check_level(w: Window, tower: Tower, k: int, r_k: int) -> tuple[int, Optional[Violation]]:
    """Check the level-k block conditions for every complete block aligned to r_k.

    Returns the number of blocks checked and the first violation, if any.
    """
    lvl = tower.levels[k]
    pk, pp, bp = lvl.p, lvl.p_prev, lvl.b_prime_prev
    c = w.lo + ((r_k - w.lo) % pk)
    blocks = 0
    coords, lo = w.coords, w.lo
    while c + pk <= w.hi:
        lead = coords[c - lo]
        for i in lvl.A:
            if not coords[c + i * pp - lo].is_star:
                return blocks, Violation(k, c + i * pp, f"slot {i} in A_{k} is not the star")
        for i in lvl.B:
            v = coords[c + i * pp - lo]
            if lead.is_star:
                if not v.is_star:
                    return blocks, Violation(k, c + i * pp, f"block at {c} mixes star and orbit slots")
            elif v.is_star or v != lead.shifted(bp * lvl.f[i]):
                return blocks, Violation(k, c + i * pp, f"slot {i} is not T^{bp * lvl.f[i]} of the block lead")
        blocks += 1
        c += pk
    return blocks, None


def check_membership(w: Window, tower: Tower, r: RSequence, K: int) -> MembershipReport:
    """Finite-window test of ``sigma^{r_k} x in Y_k`` for k <= K."""
    if K > tower.depth or K >= len(r):
        raise DepthError(f"level {K} not available")
    report = MembershipReport("pass")
    for k in range(K + 1):
        n, bad = check_level(w, tower, k, r[k])
        report.blocks_checked[k] = n
        if bad is not None:
            report.status, report.violation = "fail", bad
            return report
        if n == 0:
            report.status = "inconclusive"
    return report


@dataclass
class DecodeResult:
    status: str  # "unique" | "ambiguous" | "none"
    r: Optional[RSequence]
    candidates: list[int] = field(default_factory=list)
    level: int = 0


def _anchor(w: Window, half: int) -> int:
    centre = (w.lo + w.hi) // 2
    best = None
    for i, c in w.items():
        if not c.is_star and i - w.lo >= half and w.hi - i >= half:
            if best is None or abs(i - centre) < abs(best - centre):
                best = i
    if best is None:
        raise ValueError("window has no non-star coordinate with 2*p_K of margin on both sides")
    return best


def decode_r(w: Window, tower: Tower, K: int) -> DecodeResult:
    """Recover the unique phase sequence r_0..r_K of a window of a non-star point."""
    if K > tower.depth:
        raise DepthError(f"level {K} exceeds tower depth {tower.depth}")
    if all(c.is_star for c in w.coords):
        raise ValueError("all-star window: the phase sequence is undefined")
    pK = tower.p(K)
    if len(w) < 4 * pK:
        raise ValueError(f"window of length {len(w)} is shorter than 4*p_K = {4 * pK}")
    m = _anchor(w, 2 * pK)
    sub = Window(m - 2 * pK, m + 2 * pK, w.coords[m - 2 * pK - w.lo: m + 2 * pK - w.lo])
    r: list[int] = []
    for k in range(K + 1):
        prev = r[-1] if r else 0
        step = tower.p(k - 1)
        survivors = []
        for t in range(tower.levels[k].n):
            cand = prev + t * step
            n, bad = check_level(sub, tower, k, cand)
            if bad is None and n > 0:
                survivors.append(cand)
        if len(survivors) != 1:
            status = "none" if not survivors else "ambiguous"
            return DecodeResult(status, RSequence(tuple(r)) if r else None, survivors, k)
        r.append(survivors[0])
    return DecodeResult("unique", RSequence(tuple(r)), [], K)


@dataclass(frozen=True)
class IndexDecomposition:
    m: int
    m_K: int
    digits: tuple[int, ...]
    m_levels: tuple[int, ...]


def decompose_index(tower: Tower, r: RSequence, m: int, K: int) -> IndexDecomposition:
    """m = r_k + m_k p_k + sum_{k' <= k} i_{k'} p_{k'-1} for every k <= K."""
    if K > tower.depth:
        raise DepthError(f"level {K} exceeds tower depth {tower.depth}")
    d = m - r[K]
    m_K, rem = divmod(d, tower.p(K))
    digits = tuple((rem // tower.p(k - 1)) % tower.levels[k].n for k in range(K + 1))
    m_levels = []
    partial = 0
    for k in range(K + 1):
        partial += digits[k] * tower.p(k - 1)
        q, rest = divmod(m - r[k] - partial, tower.p(k))
        if rest:
            raise ValueError(f"phase sequence is inconsistent at level {k}")
        m_levels.append(q)
    return IndexDecomposition(m, m_K, digits, tuple(m_levels))
