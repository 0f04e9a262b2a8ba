"""Symbolic base systems (X, T): subshifts of finite type and their points.

Symbols are single characters and words are plain strings. Points of X are
bi-infinite eventually periodic sequences ``...LLL core RRR...``; T is the
left shift. The metric on X is ``sum_i 2**-|i| [u_i != v_i]``, so
diam(X) = 3 and the adjoined star sits at distance 4 from every point.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

DIAMETER = 3.0
STAR_DISTANCE = DIAMETER + 1.0
DEFAULT_WORD_CAP = 1 << 22


class CapExceeded(ValueError):
    pass


def primitive_root(word: str) -> str:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


def least_rotation(word: str) -> str:
    return min(word[i:] + word[:i] for i in range(len(word))) if word else word


@dataclass(frozen=True, eq=False)
class BasePoint:
    """An eventually periodic bi-infinite sequence.

    The core occupies indices ``[-origin_offset, -origin_offset + len(core))``;
    ``left_period`` repeats to the left of it and ``right_period`` to the right.
    Equality is equality of the represented sequences, not of the fields.
    """

    left_period: str
    core: str
    right_period: str
    origin_offset: int = 0

    def __post_init__(self):
        if not self.left_period or not self.right_period:
            raise ValueError("periods must be nonempty words")

    @classmethod
    def constant(cls, symbol: str) -> "BasePoint":
        return cls(symbol, "", symbol, 0)

    @classmethod
    def parse(cls, text: str) -> "BasePoint":
        """Read ``left=<word> core=<word> right=<word> offset=<int>``."""
        fields = dict(re.findall(r"(\w+)=(\S*)", text))
        try:
            return cls(fields["left"], fields.get("core", ""), fields["right"], int(fields.get("offset", 0)))
        except KeyError as exc:
            raise ValueError(f"malformed base point {text!r}: missing {exc}") from None

    def format(self) -> str:
        return f"left={self.left_period} core={self.core} right={self.right_period} offset={self.origin_offset}"

    @property
    def core_start(self) -> int:
        return -self.origin_offset

    @property
    def core_end(self) -> int:
        return -self.origin_offset + len(self.core)

    def __getitem__(self, i: int) -> str:
        c0 = -self.origin_offset
        c1 = c0 + len(self.core)
        if i < c0:
            return self.left_period[(i - c0) % len(self.left_period)]
        if i >= c1:
            return self.right_period[(i - c1) % len(self.right_period)]
        return self.core[i - c0]

    def segment(self, lo: int, hi: int) -> str:
        if hi <= lo:
            return ""
        c0, c1 = self.core_start, self.core_end
        parts = []
        if lo < c0:
            e = min(hi, c0)
            parts.append(_cyclic(self.left_period, lo - c0, e - lo))
        if hi > c0 and lo < c1:
            parts.append(self.core[max(lo, c0) - c0: min(hi, c1) - c0])
        if hi > c1:
            b = max(lo, c1)
            parts.append(_cyclic(self.right_period, b - c1, hi - b))
        return "".join(parts)

    def tail_key(self, i: int, radius: int) -> tuple:
        """A key for the segment [i - radius, i + radius] that ignores whole periods."""
        if i - radius >= self.core_end:
            return ("R", (i - self.core_end) % len(self.right_period))
        if i + radius < self.core_start:
            return ("L", (i - self.core_start) % len(self.left_period))
        return ("C", i)

    @cached_property
    def period(self) -> Optional[int]:
        """Least p > 0 with T^p(x) = x, or None if the point is not periodic."""
        p = len(primitive_root(self.right_period))
        return p if shift(self, p) == self else None

    def __eq__(self, other):
        if not isinstance(other, BasePoint):
            return NotImplemented
        if self is other:
            return True
        lo = min(self.core_start, other.core_start)
        hi = max(self.core_end, other.core_end)
        pl = math.lcm(len(self.left_period), len(other.left_period))
        pr = math.lcm(len(self.right_period), len(other.right_period))
        return all(self[i] == other[i] for i in range(lo - pl, hi + pr))

    def __hash__(self):
        # shift-invariant, hence consistent with equality of sequences
        return hash((least_rotation(primitive_root(self.left_period)),
                     least_rotation(primitive_root(self.right_period))))

    def __repr__(self):
        return f"BasePoint({self.format()})"


def _cyclic(period: str, phase: int, length: int) -> str:
    start = phase % len(period)
    reps = (start + length) // len(period) + 1
    return (period * reps)[start:start + length]


def shift(p: BasePoint, n: int) -> BasePoint:
    """T^n: coordinate i of the result is coordinate i + n of ``p``."""
    if n == 0:
        return p
    return BasePoint(p.left_period, p.core, p.right_period, p.origin_offset + n)


def distance(u: BasePoint, v: BasePoint, tol: float = 1e-9) -> float:
    """Weighted discrete distance, truncated with error below ``tol``."""
    radius = distance_radius(tol)
    a, b = u.segment(-radius, radius + 1), v.segment(-radius, radius + 1)
    return sum(2.0 ** -abs(i - radius) for i, (s, t) in enumerate(zip(a, b)) if s != t)


def distance_radius(tol: float = 1e-9) -> int:
    """Coordinates beyond this radius contribute less than ``tol`` in total."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    # the tail beyond |i| > radius weighs 2 * 2**-radius
    return max(0, math.ceil(math.log2(2.0 / tol)) + 1)


@dataclass(frozen=True)
class BaseSystem:
    alphabet: tuple[str, ...]
    forbidden_words: tuple[str, ...] = ()
    name: str = "sft"
    word_cap: int = DEFAULT_WORD_CAP

    def __post_init__(self):
        if not self.alphabet or any(len(s) != 1 for s in self.alphabet):
            raise ValueError("alphabet must be a nonempty set of single-character symbols")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet symbols must be distinct")
        for w in self.forbidden_words:
            if not w or any(s not in self.alphabet for s in w):
                raise ValueError(f"forbidden word {w!r} is empty or uses foreign symbols")
        if not self._has_periodic_point():
            raise ValueError(f"system {self.name!r} has an empty shift space")

    @property
    def memory(self) -> int:
        return max((len(w) for w in self.forbidden_words), default=1)

    def _has_periodic_point(self) -> bool:
        # de Bruijn style graph on admissible (m-1)-words; nonempty iff it has a cycle
        m = max(self.memory, 2)
        states = set(enumerate_words(self, m - 1, cap=None))
        succ = {s: [(s + a)[1:] for a in self.alphabet if self.admissible(s + a)] for s in states}
        alive = set(states)
        changed = True
        while changed:
            changed = False
            for s in list(alive):
                if not any(t in alive for t in succ[s]):
                    alive.discard(s)
                    changed = True
        return bool(alive)

    def admissible(self, word: str) -> bool:
        return not any(f in word for f in self.forbidden_words)

    def contains(self, p: BasePoint) -> bool:
        """Whether the bi-infinite sequence avoids every forbidden word."""
        if any(s not in self.alphabet for s in p.left_period + p.core + p.right_period):
            return False
        m = self.memory
        lo = p.core_start - len(p.left_period) - m
        hi = p.core_end + len(p.right_period) + m
        return self.admissible(p.segment(lo, hi))


def full_shift(q: int = 2) -> BaseSystem:
    return BaseSystem(tuple(str(i) for i in range(q)), (), name=f"full{q}")


def golden_mean_shift() -> BaseSystem:
    return BaseSystem(("0", "1"), ("11",), name="golden")


BUILTIN_SYSTEMS = {
    "full2": lambda: full_shift(2),
    "full3": lambda: full_shift(3),
    "golden": golden_mean_shift,
    "fixed": lambda: BaseSystem(("0",), (), name="fixed"),
}


def parse_sft(text: str, name: str = "sft") -> BaseSystem:
    """First line: space-separated symbols; every further nonblank line is a forbidden word."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty SFT description")
    alphabet = tuple(lines[0].split())
    return BaseSystem(alphabet, tuple(lines[1:]), name=name)


def load_system(spec: str) -> BaseSystem:
    """A builtin name (full2, full3, golden, fixed) or a path to an SFT file."""
    if spec in BUILTIN_SYSTEMS:
        return BUILTIN_SYSTEMS[spec]()
    path = Path(spec)
    if not path.is_file():
        raise FileNotFoundError(f"no builtin system or SFT file named {spec!r}")
    return parse_sft(path.read_text(), name=path.stem)


def enumerate_words(sys: BaseSystem, n: int, cap: Optional[int] = -1) -> list[str]:
    """All admissible words of length ``n``, in lexicographic alphabet order."""
    if cap == -1:
        cap = sys.word_cap
    if cap is not None and len(sys.alphabet) ** n > cap:
        raise CapExceeded(f"|alphabet|^n = {len(sys.alphabet)}^{n} exceeds cap {cap}")
    words = [""]
    for _ in range(n):
        nxt = []
        for w in words:
            for a in sys.alphabet:
                u = w + a
                if not any(u.endswith(f) for f in sys.forbidden_words):
                    nxt.append(u)
        words = nxt
    return words


def count_words(sys: BaseSystem, n: int) -> int:
    """Admissible word count by transfer over (memory-1)-suffix states; no enumeration."""
    m = sys.memory
    if n < m:
        return len(enumerate_words(sys, n, cap=None))
    counts: dict[str, int] = {}
    for w in enumerate_words(sys, m - 1, cap=None):
        counts[w] = counts.get(w, 0) + 1
    for _ in range(n - (m - 1)):
        nxt: dict[str, int] = {}
        for s, c in counts.items():
            for a in sys.alphabet:
                u = s + a
                if sys.admissible(u):
                    key = u[1:] if m > 1 else ""
                    nxt[key] = nxt.get(key, 0) + c
        counts = nxt
    return sum(counts.values())


class SeparatedCount(NamedTuple):
    count: int
    upper_bound: bool


def separated_count(sys: BaseSystem, n: int, eps: float) -> SeparatedCount:
    """Size of the (n, eps)-separated set formed by one point per admissible n-word.

    For eps < 1 any two distinct n-words differ at some time j < n, which
    puts the corresponding points at distance >= 1 > eps after j steps.
    For eps >= 1 the same number is only reported and flagged.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    count = len(enumerate_words(sys, n))
    return SeparatedCount(count, upper_bound=eps >= 1)


@dataclass
class EntropyEstimate:
    value: float
    ratios: dict[int, float] = field(default_factory=dict)


def entropy_estimate(sys: BaseSystem, n_lo: int, n_hi: int, eps: float = 0.5) -> EntropyEstimate:
    if not 1 <= n_lo <= n_hi:
        raise ValueError("need 1 <= n_lo <= n_hi")
    ratios = {n: math.log(separated_count(sys, n, eps).count) / n for n in range(n_lo, n_hi + 1)}
    return EntropyEstimate(ratios[n_hi], ratios)


@dataclass(frozen=True)
class StarSpace:
    """X together with an isolated fixed point at distance diam(X) + 1."""

    base: BaseSystem
    star_distance: float = STAR_DISTANCE


def random_point(sys: BaseSystem, rng, core_len: int = 12, max_period: int = 4) -> BasePoint:
    """A random admissible eventually periodic point (rejection sampling)."""
    for _ in range(10_000):
        left = "".join(rng.choice(sys.alphabet) for _ in range(rng.randint(1, max_period)))
        right = "".join(rng.choice(sys.alphabet) for _ in range(rng.randint(1, max_period)))
        core = "".join(rng.choice(sys.alphabet) for _ in range(core_len))
        p = BasePoint(left, core, right, rng.randint(0, core_len))
        if sys.contains(p):
            return p
    raise RuntimeError(f"could not sample an admissible point of {sys.name}")


def parse_points(lines: Sequence[str]) -> list[BasePoint]:
    return [BasePoint.parse(ln) for ln in lines if ln.strip()]
