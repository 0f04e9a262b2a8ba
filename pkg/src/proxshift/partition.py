"""Interval partitions {0,...,n-1} = A | B with the three covering properties.

Property (i):   2 <= #A < n*eps
Property (ii):  every shift 0 <= i < n maps some a in A into A or n+A
Property (iii): for 0 < i <= n/2 + 1, #((A+i) & B) >= sqrt(n/2) - 1

All comparisons are exact: eps is a Fraction and square roots are removed
by squaring.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Union

Rational = Union[Fraction, int, str, float]


def as_fraction(value: Rational) -> Fraction:
    """Coerce ``value`` to an exact Fraction ("3/10", 0.3 and Fraction(3, 10) agree)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def ceil_sqrt_half(n: int) -> int:
    """Smallest integer p with p >= sqrt(n/2)."""
    p = math.isqrt(n // 2)
    while 2 * p * p < n:
        p += 1
    return p


def meets_sqrt_bound(count: int, n: int) -> bool:
    """``count >= sqrt(n/2) - 1``, decided in integers."""
    return 2 * (count + 1) ** 2 >= n


def sqrt_bound_ceiling(n: int) -> int:
    """Least integer count satisfying ``count >= sqrt(n/2) - 1``."""
    c = 0
    while not meets_sqrt_bound(c, n):
        c += 1
    return c


def _threshold_holds(n: int, eps: Fraction) -> bool:
    # 4 <= sqrt(n/2)  and  sqrt(2/n) + 3/n < eps
    if n < 32:
        return False
    slack = eps - Fraction(3, n)
    return slack > 0 and Fraction(2, n) < slack * slack


def min_valid_n(eps: Rational) -> int:
    """Least n at which both size inequalities of the construction hold.

    Both inequalities are monotone in n, so every larger n qualifies too.
    """
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    n = 32
    while not _threshold_holds(n, eps):
        n += 1
    return n


@dataclass(frozen=True)
class Partition:
    n: int
    A: tuple[int, ...]
    B: tuple[int, ...]
    eps: Fraction

    @classmethod
    def from_A(cls, n: int, A: Iterable[int], eps: Rational) -> "Partition":
        a = tuple(sorted(set(A)))
        aset = set(a)
        b = tuple(i for i in range(n) if i not in aset)
        return cls(n, a, b, as_fraction(eps))

    @property
    def b(self) -> int:
        return len(self.B)


@dataclass
class PartitionReport:
    n: int
    card_A: int
    n_eps: Fraction
    wellformed: bool
    prop_i: bool
    prop_ii: bool
    prop_ii_failures: list[int]
    prop_iii: bool
    prop_iii_counts: dict[int, int]
    prop_iii_failures: list[int]
    nonempty_overlaps: bool
    structural: bool
    strict: bool
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "card_A": self.card_A,
            "n_eps": str(self.n_eps),
            "wellformed": self.wellformed,
            "prop_i": self.prop_i,
            "prop_ii": self.prop_ii,
            "prop_ii_failures": self.prop_ii_failures,
            "prop_iii": self.prop_iii,
            "prop_iii_counts": {str(i): c for i, c in self.prop_iii_counts.items()},
            "prop_iii_failures": self.prop_iii_failures,
            "structural": self.structural,
            "strict": self.strict,
            "notes": self.notes,
        }


def make_partition(n: int, eps: Rational) -> Partition:
    """The explicit partition: A = {1..p} together with {jp + r0 : 1 <= j <= q+1}."""
    eps = as_fraction(eps)
    lo = min_valid_n(eps)
    if n < lo:
        raise ValueError(f"n={n} is below the admissible threshold {lo} for eps={eps}")
    p = ceil_sqrt_half(n)
    q = -(-n // (2 * p))
    _, r0 = divmod(n, p)
    A = set(range(1, p + 1))
    A.update(j * p + r0 for j in range(1, q + 2))
    return Partition.from_A(n, A, eps)


def partition_parameters(n: int) -> dict[str, int]:
    p = ceil_sqrt_half(n)
    q = -(-n // (2 * p))
    k0, r0 = divmod(n, p)
    return {"p": p, "q": q, "k0": k0, "r0": r0}


def verify_partition(part: Partition, eps: Optional[Rational] = None) -> PartitionReport:
    """Exhaustively check properties (i)-(iii) and the structural gate.

    Malformed input (overlap, wrong union, out-of-range entries) is reported
    through ``wellformed``/``structural`` rather than raised.
    """
    eps = part.eps if eps is None else as_fraction(eps)
    n = part.n
    A, B = set(part.A), set(part.B)
    notes = []
    wellformed = n > 0 and not (A & B) and (A | B) == set(range(n))
    if not wellformed:
        notes.append("A and B do not partition {0,...,n-1}")
    endpoints = 0 in B and (n - 1) in B and 0 not in A and (n - 1) not in A
    if not endpoints:
        notes.append("0 and n-1 must both lie in B")

    card = len(A)
    n_eps = n * eps
    prop_i = 2 <= card < n_eps

    shifted = A | {a + n for a in A}
    ii_fail = [i for i in range(max(n, 0)) if not any(a + i in shifted for a in A)]
    prop_ii = not ii_fail

    counts = {}
    iii_fail = []
    empty_overlap = []
    for i in range(1, n // 2 + 2):
        c = sum(1 for a in A if a + i in B)
        counts[i] = c
        if not meets_sqrt_bound(c, n):
            iii_fail.append(i)
        if c == 0:
            empty_overlap.append(i)
    prop_iii = not iii_fail
    nonempty = not empty_overlap

    structural = wellformed and endpoints and card >= 2 and prop_ii and nonempty
    strict = structural and prop_i and prop_iii
    return PartitionReport(
        n=n,
        card_A=card,
        n_eps=n_eps,
        wellformed=wellformed and endpoints,
        prop_i=prop_i,
        prop_ii=prop_ii,
        prop_ii_failures=ii_fail,
        prop_iii=prop_iii,
        prop_iii_counts=counts,
        prop_iii_failures=iii_fail,
        nonempty_overlaps=nonempty,
        structural=structural,
        strict=strict,
        notes=notes,
    )


def _fast_structural(n: int, A: tuple[int, ...]) -> bool:
    aset = set(A)
    shifted = aset | {a + n for a in A}
    for i in range(1, n):
        if not any(a + i in shifted for a in A):
            return False
    for i in range(1, n // 2 + 2):
        if all((a + i) in aset or a + i >= n for a in A):
            return False
    return True


def search_min_partition(
    eps: Rational,
    n_max: int,
    strict: bool = False,
    n_min: int = 3,
    min_b: int = 0,
) -> Optional[Partition]:
    """Exhaustive search for the smallest-n partition passing a gate.

    Candidates are ordered by (n, #A, lexicographic A). Every candidate must
    satisfy property (i) for ``eps`` as well as the structural gate; with
    ``strict=True`` property (iii) is required too. ``min_b`` bounds #B from
    below. Returns None when nothing qualifies up to ``n_max``.
    """
    eps = as_fraction(eps)
    for n in range(max(n_min, 3), n_max + 1):
        for size in range(2, n - 1):
            if not size < n * eps:
                break
            if n - size < min_b:
                break
            for A in itertools.combinations(range(1, n - 1), size):
                if not _fast_structural(n, A):
                    continue
                part = Partition.from_A(n, A, eps)
                report = verify_partition(part, eps)
                if report.structural and report.prop_i and (report.strict or not strict):
                    return part
    return None
