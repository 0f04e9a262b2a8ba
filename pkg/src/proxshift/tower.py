"""The level stack: block lengths n_k, periods p_k, partitions and codings.

Level k splits a block of length p_k = n_k * p_{k-1} into n_k slots of
length p_{k-1}. Slots in A_k are filled with the star; slots in B_k carry
the block's leading point moved by T^(b'_{k-1} * f_k(i)).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

from .base_system import StarSpace, full_shift
from .partition import (
    Partition,
    Rational,
    as_fraction,
    make_partition,
    min_valid_n,
    search_min_partition,
    verify_partition,
)

TOY_SEARCH_CAP = 24
J_DUMP_CAP = 2000


class TowerError(ValueError):
    pass


@dataclass(frozen=True)
class EpsSchedule:
    """eps_k = scale * ratio**k, optionally overridden by explicit values."""

    scale: Fraction = Fraction(1, 8)
    ratio: Fraction = Fraction(1, 2)
    values: tuple[Fraction, ...] = ()

    @classmethod
    def geometric(cls, num: int = 1, den_base: int = 2, shift: int = 3) -> "EpsSchedule":
        """eps_k = num / den_base**(k + shift)."""
        return cls(Fraction(num, den_base**shift), Fraction(1, den_base))

    @classmethod
    def explicit(cls, values: Sequence[Rational]) -> "EpsSchedule":
        return cls(values=tuple(as_fraction(v) for v in values))

    def eps(self, k: int) -> Fraction:
        if self.values:
            if k >= len(self.values):
                raise TowerError(f"explicit schedule has no entry for level {k}")
            return self.values[k]
        return self.scale * self.ratio**k

    def product_lower_bound(self, K: int) -> Fraction:
        out = Fraction(1)
        for k in range(K + 1):
            out *= 1 - 2 * self.eps(k)
        return out

    def warnings(self, K: int) -> list[str]:
        out = []
        eps = [self.eps(k) for k in range(K + 1)]
        if any(not 0 < e < Fraction(1, 2) for e in eps):
            out.append("some eps_k lies outside (0, 1/2)")
        if any(b > a for a, b in zip(eps, eps[1:])):
            out.append("schedule is not nonincreasing")
        if not self.values and self.ratio >= 1:
            out.append("constant or growing schedule: the infinite product vanishes")
        return out

    def as_dict(self) -> dict:
        if self.values:
            return {"values": [str(v) for v in self.values]}
        return {"scale": str(self.scale), "ratio": str(self.ratio)}


DEFAULT_SCHEDULE = EpsSchedule()
TOY_SCHEDULE = EpsSchedule(Fraction(2, 5), Fraction(19, 20))


class Coding(NamedTuple):
    tau: dict[int, int]
    tau_inv: dict[int, int]
    f: dict[int, int]
    f_inv: dict[int, int]


@dataclass(frozen=True, eq=False)
class TowerLevel:
    k: int
    part: Partition
    p_prev: int
    b_prime_prev: int
    strict: bool = False

    def __post_init__(self):
        if self.b < 4:
            raise TowerError(f"level {self.k}: #B = {self.b} < 4")
        if 0 in self.Aset or self.n - 1 in self.Aset:
            raise TowerError(f"level {self.k}: 0 and n-1 must lie in B")

    @property
    def n(self) -> int:
        return self.part.n

    @property
    def A(self) -> tuple[int, ...]:
        return self.part.A

    @property
    def B(self) -> tuple[int, ...]:
        return self.part.B

    @cached_property
    def Aset(self) -> frozenset[int]:
        return frozenset(self.part.A)

    @property
    def p(self) -> int:
        return self.n * self.p_prev

    @property
    def b(self) -> int:
        return len(self.part.B)

    @property
    def b_prime(self) -> int:
        return self.b_prime_prev * (self.b - 2)

    @property
    def C(self) -> tuple[int, ...]:
        return tuple(i for i in self.B if i not in (0, self.n - 1))

    @cached_property
    def coding(self) -> Coding:
        return level_coding(self)

    @property
    def f(self) -> dict[int, int]:
        return self.coding.f

    @property
    def f_inv(self) -> dict[int, int]:
        return self.coding.f_inv

    @property
    def tau(self) -> dict[int, int]:
        return self.coding.tau

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "eps": str(self.part.eps),
            "A": list(self.A),
            "p_prev": self.p_prev,
            "p": self.p,
            "b": self.b,
            "b_prime_prev": self.b_prime_prev,
            "b_prime": self.b_prime,
            "strict": self.strict,
        }


def level_coding(level: TowerLevel) -> Coding:
    """tau: B -> {0..b-1} increasing; f folds the two endpoints onto the ends of C."""
    B, n, b = level.B, level.n, level.b
    tau = {i: t for t, i in enumerate(B)}
    tau_inv = {t: i for i, t in tau.items()}
    f = {}
    for i in B:
        if i == 0:
            f[i] = 0
        elif i == n - 1:
            f[i] = -(b - 3)
        else:
            f[i] = tau[i] - (b - 2)
    f_inv = {f[i]: i for i in B if i not in (0, n - 1)}
    return Coding(tau, tau_inv, f, f_inv)


def g_exponent(level: TowerLevel, i: int) -> int:
    """Exponent of T carrying a block's leading point to slot ``i``."""
    if i not in level.f:
        raise TowerError(f"slot {i} is not in B_{level.k}")
    return level.b_prime_prev * level.f[i]


@dataclass(eq=False)
class Tower:
    levels: list[TowerLevel]
    schedule: EpsSchedule = DEFAULT_SCHEDULE
    base: StarSpace = field(default_factory=lambda: StarSpace(full_shift(2)))
    mode: str = "strict"

    def __post_init__(self):
        for prev, lvl in zip(self.levels, self.levels[1:]):
            if lvl.p_prev != prev.p or lvl.b_prime_prev != prev.b_prime:
                raise TowerError(f"level {lvl.k} is not stacked on level {prev.k}")
        self._J: dict[int, list[int]] = {}

    @classmethod
    def from_partitions(cls, parts: Sequence[Partition], schedule: EpsSchedule = DEFAULT_SCHEDULE,
                        base: Optional[StarSpace] = None, mode: str = "toy") -> "Tower":
        """Stack partitions without applying any verification gate."""
        levels = []
        p, bp = 1, 1
        for k, part in enumerate(parts):
            lvl = TowerLevel(k, part, p, bp, verify_partition(part).strict)
            levels.append(lvl)
            p, bp = lvl.p, lvl.b_prime
        return cls(levels, schedule, base or StarSpace(full_shift(2)), mode)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def p(self, k: int) -> int:
        return 1 if k < 0 else self.levels[k].p

    def b_prime(self, k: int) -> int:
        return 1 if k < 0 else self.levels[k].b_prime

    @cached_property
    def seed_exponents(self) -> list[int]:
        """Exponent of the point at index -p_k of the sample point (relative to x_0)."""
        out, e = [], 0
        for lvl in self.levels:
            e += lvl.b_prime_prev * (lvl.b - 3)
            out.append(e)
        return out

    def _check_level(self, k: int):
        if not 0 <= k <= self.depth:
            raise TowerError(f"level {k} exceeds tower depth {self.depth}")

    def I(self, k: int) -> range:
        self._check_level(k)
        return range(-self.b_prime(k) + 1, 1)

    def J(self, k: int) -> list[int]:
        self._check_level(k)
        if k not in self._J:
            if k == 0:
                J = list(self.levels[0].C)
            else:
                prev, p = self.J(k - 1), self.p(k - 1)
                J = [p * c + j for c in self.levels[k].C for j in prev]
            self._J[k] = J
        return self._J[k]

    def phi(self, k: int, n: int) -> int:
        """The increasing bijection I_k -> J_k."""
        self._check_level(k)
        if not -self.b_prime(k) < n <= 0:
            raise TowerError(f"{n} is not in I_{k}")
        pos = 0
        for L in range(k, 0, -1):
            bp = self.b_prime(L - 1)
            j = -((-n) // bp)
            pos += self.levels[L].f_inv[j] * self.p(L - 1)
            n -= j * bp
        return pos + self.levels[0].f_inv[n]

    def phi_inv(self, k: int, m: int) -> int:
        self._check_level(k)
        if not 0 <= m < self.p(k):
            raise TowerError(f"{m} is not in J_{k}")
        n = 0
        for L in range(k, 0, -1):
            i, m = divmod(m, self.p(L - 1))
            lvl = self.levels[L]
            if i in (0, lvl.n - 1) or i not in lvl.f:
                raise TowerError(f"digit {i} at level {L} is not in C_{L}")
            n += lvl.f[i] * self.b_prime(L - 1)
        lvl = self.levels[0]
        if m in (0, lvl.n - 1) or m not in lvl.f:
            raise TowerError(f"digit {m} at level 0 is not in C_0")
        return n + lvl.f[m]

    def as_dict(self, j_cap: int = J_DUMP_CAP) -> dict:
        levels = []
        for lvl in self.levels:
            d = lvl.as_dict()
            d["I"] = [-lvl.b_prime + 1, 0]
            d["card_J"] = lvl.b_prime
            d["J"] = self.J(lvl.k) if lvl.b_prime <= j_cap else None
            levels.append(d)
        return {
            "mode": self.mode,
            "base": self.base.base.name,
            "schedule": self.schedule.as_dict(),
            "depth": self.depth,
            "schedule_warnings": self.schedule.warnings(self.depth),
            "levels": levels,
        }


def index_sets(tower: Tower, k: int) -> tuple[range, list[int]]:
    return tower.I(k), tower.J(k)


def build_tower(schedule: EpsSchedule = DEFAULT_SCHEDULE, K: int = 0, mode: str = "strict",
                base: Optional[StarSpace] = None, toy_levels: Optional[Sequence] = None,
                search_cap: int = TOY_SEARCH_CAP) -> Tower:
    """Build levels 0..K.

    strict: n_k is the least admissible n above n_{k-1} whose explicit
    partition passes the strict gate.
    toy: levels are taken from ``toy_levels`` (pairs ``(n, A)``) or found by
    exhaustive search; each must pass the structural gate.
    """
    if K < 0:
        raise TowerError("depth must be nonnegative")
    base = base or StarSpace(full_shift(2))
    parts = []
    n_prev = 0
    for k in range(K + 1):
        eps = schedule.eps(k)
        if mode == "strict":
            n = max(n_prev + 1, min_valid_n(eps))
            while True:
                part = make_partition(n, eps)
                if verify_partition(part, eps).strict:
                    break
                n += 1
        elif mode == "toy":
            if toy_levels is not None:
                if k >= len(toy_levels):
                    raise TowerError(f"toy level file has no entry for level {k}")
                n, A = toy_levels[k]
                part = Partition.from_A(n, A, eps)
            else:
                part = search_min_partition(eps, search_cap, n_min=n_prev + 1, min_b=4)
                if part is None:
                    raise TowerError(f"no structural partition for level {k} with n <= {search_cap}")
            if part.n <= n_prev:
                raise TowerError(f"level {k}: n = {part.n} must exceed n_{k - 1} = {n_prev}")
            report = verify_partition(part, eps)
            if not report.structural:
                raise TowerError(f"level {k}: partition fails the structural gate ({report.notes or 'covering properties'})")
            if part.b < 4:
                raise TowerError(f"level {k}: #B = {part.b} < 4")
        else:
            raise TowerError(f"unknown mode {mode!r}")
        parts.append(part)
        n_prev = part.n

    levels = []
    p, bp = 1, 1
    for k, part in enumerate(parts):
        strict = verify_partition(part, schedule.eps(k)).strict
        lvl = TowerLevel(k, part, p, bp, strict)
        levels.append(lvl)
        p, bp = lvl.p, lvl.b_prime
    return Tower(levels, schedule, base, mode)


def load_toy_levels(path: str | Path) -> list[tuple[int, list[int]]]:
    """JSON list of ``{"n": int, "A": [int, ...]}`` objects."""
    data = json.loads(Path(path).read_text())
    try:
        return [(int(d["n"]), [int(a) for a in d["A"]]) for d in data]
    except (KeyError, TypeError) as exc:
        raise TowerError(f"malformed toy level file {path}: {exc}") from None


def default_toy_tower(K: int = 2, base: Optional[StarSpace] = None) -> Tower:
    """Small structural tower built by exhaustive search under the toy schedule."""
    return build_tower(TOY_SCHEDULE, K, "toy", base)
