"""Finite-window certificates for pairs of constructed points.

Nothing here decides an infinite-horizon statement. Every certificate
carries the index range it examined, and bounds that rely on the
quantitative covering property are only asserted on strict levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .base_system import DIAMETER, STAR_DISTANCE, distance_radius
from .partition import sqrt_bound_ceiling
from .points import (
    DepthError,
    PointSpec,
    RSequence,
    coord_distance,
    decompose_index,
    symbol_at,
    window,
)
from .tower import Tower

DEFAULT_DELTA = STAR_DISTANCE / 2


def star_support(tower: Tower, r: RSequence, K: int, lo: int, hi: int) -> list[int]:
    """Indices of [lo, hi) forced to be the star by the phases r_0..r_K."""
    out: set[int] = set()
    for k in range(K + 1):
        lvl = tower.levels[k]
        pk, pp = lvl.p, lvl.p_prev
        c = r[k] + ((lo - r[k]) // pk) * pk
        while c < hi:
            for a in lvl.A:
                s = c + a * pp
                out.update(range(max(s, lo), min(s + pp, hi)))
            c += pk
    return sorted(out)


# ------------------------------------------------------------ proximality


@dataclass
class StarBlockWitness:
    N: int
    n_plus: int
    n_minus: int
    level: int
    case: str


def _shared_domain(x: PointSpec, y: PointSpec) -> tuple[float, float]:
    lo, hi = -math.inf, math.inf
    for p in (x, y):
        a, b = p.domain
        if a is not None:
            lo, hi = max(lo, a), min(hi, b)
    return lo, hi


def _block_offsets(x: PointSpec, y: PointSpec, L: int) -> tuple[list[int], str]:
    """Residues mod p_L of blocks of length p_{L-1} where both points are star."""
    tower = x.tower
    lvl = tower.levels[L]
    pk = lvl.p_prev
    if x.is_star_point and y.is_star_point:
        return [0], "both-star"
    if x.is_star_point or y.is_star_point:
        z = y if x.is_star_point else x
        return [z.r(L) + a * pk for a in lvl.A], "one-star"
    rx, ry = x.r(L), y.r(L)
    lo_r, hi_r = min(rx, ry), max(rx, ry)
    a, b = divmod(hi_r - lo_r, pk)
    covered = lvl.Aset | {v + lvl.n for v in lvl.A}
    if 2 * b < pk:
        return [lo_r + (a1 + a) * pk + b for a1 in lvl.A if a1 + a in covered], "case1"
    shift = lvl.n - 1 - a
    return [hi_r + (a2 + shift) * pk + (pk - b) for a2 in lvl.A if a2 + shift in covered], "case2"


def _all_star(p: PointSpec, lo: int, hi: int) -> bool:
    return all(symbol_at(p, i).is_star for i in range(lo, hi))


def find_common_star_block(x: PointSpec, y: PointSpec, N: int, K: Optional[int] = None) -> StarBlockWitness:
    """Blocks [n_plus, n_plus+N) and [n_minus-N, n_minus) where both points are star.

    Uses the first level k with p_k > 2N whose successor level k+1 is
    available; the candidate blocks come from the covering property (ii) of
    level k+1 and are re-checked coordinate by coordinate.
    """
    if x.tower is not y.tower:
        raise ValueError("points must share a tower")
    if N < 0:
        raise ValueError("N must be nonnegative")
    tower = x.tower
    K = tower.depth if K is None else min(K, tower.depth)
    dlo, dhi = _shared_domain(x, y)
    for k in range(0, K):
        if tower.p(k) <= 2 * N:
            continue
        L = k + 1
        pL = tower.p(L)
        offsets, case = _block_offsets(x, y, L)
        plus, minus = [], []
        for off in offsets:
            c = N + 1 + ((off - N - 1) % pL)
            if c + N <= dhi:
                plus.append(c)
            c = -2 * N - 1 - ((-2 * N - 1 - off) % pL)
            if c >= dlo:
                minus.append(c + N)
        if not plus or not minus:
            continue
        n_plus, n_minus = min(plus), max(minus)
        for p in (x, y):
            if not (_all_star(p, n_plus, n_plus + N) and _all_star(p, n_minus - N, n_minus)):
                raise AssertionError(f"level {L} {case} block failed re-verification")
        return StarBlockWitness(N, n_plus, n_minus, L, case)
    raise DepthError(f"no level up to {K} yields common star blocks of length {N} inside the evaluable range")


# ------------------------------------------------------------- separation


@dataclass
class SeparationCount:
    count: int
    indices: list[int]
    star_hits: list[int]
    lo: int
    hi: int
    delta: float


def separation_count(x: PointSpec, y: PointSpec, lo: int, hi: int, delta: float = DEFAULT_DELTA) -> SeparationCount:
    """Indices of [lo, hi) where the coordinates are more than ``delta`` apart."""
    if delta > STAR_DISTANCE:
        raise ValueError("delta above the star distance can never be exceeded")
    wx, wy = window(x, lo, hi), window(y, lo, hi)
    idx, star_hits = [], []
    radius = distance_radius()
    memo: dict = {}
    for i, u, v in zip(range(lo, hi), wx.coords, wy.coords):
        if u.is_star != v.is_star:
            star_hits.append(i)
            idx.append(i)
        elif u.is_star or delta >= DIAMETER:
            continue
        else:
            # T^e z only matters through z on [e - radius, e + radius]
            key = (id(u.root), u.root.tail_key(u.exponent, radius), id(v.root), v.root.tail_key(v.exponent, radius))
            far = memo.get(key)
            if far is None:
                far = memo[key] = coord_distance(u, v) > delta
            if far:
                idx.append(i)
    return SeparationCount(len(idx), idx, star_hits, lo, hi, delta)


@dataclass
class BlockCertificate:
    level: int
    block_start: int
    designated: str
    star_count: int
    separation_count: int
    bound: int
    passed: bool
    asserted: bool

    def row(self) -> dict:
        return {
            "level": self.level,
            "block_start": self.block_start,
            "star_count": self.star_count,
            "separation_count": self.separation_count,
            "bound": self.bound,
            "pass": self.passed,
        }


def separation_blocks(x: PointSpec, y: PointSpec, k: int, lo: int, hi: int) -> list[BlockCertificate]:
    """Per-block separation certificates at level k.

    Against the all-star point every non-star block of x must carry #B_k
    separations. For two non-star points with different phases at level k,
    the blocks of one of them (chosen as in the two-case argument on the
    phase difference) must each carry at least ceil(sqrt(n_k/2) - 1) indices
    where exactly one point is the star. The bound is asserted only on strict
    levels; ``asserted`` records which.
    """
    tower = x.tower
    lvl = tower.levels[k]
    if x.is_star_point and not y.is_star_point:
        x, y = y, x
    if x.is_star_point:
        raise ValueError("both points are the all-star point")
    if y.is_star_point:
        designated, name, bound, asserted = x, "x", lvl.b, True
    else:
        rx, ry = x.r(k), y.r(k)
        if rx == ry:
            raise ValueError(f"phases agree at level {k}; no separation bound applies")
        first, second = (x, y) if rx < ry else (y, x)
        d = abs(ry - rx)
        pp = lvl.p_prev
        a = (d - 1) // pp
        if 2 * a <= lvl.n:
            designated = first
        else:
            designated = second
        name = "x" if designated is x else "y"
        bound, asserted = sqrt_bound_ceiling(lvl.n), lvl.strict
    wx, wy = window(x, lo, hi), window(y, lo, hi)
    wd = wx if designated is x else wy
    pk = lvl.p
    rd = designated.r(k)
    c = lo + ((rd - lo) % pk)
    certs = []
    while c + pk <= hi:
        if not wd[c].is_star:
            block = range(c - lo, c - lo + pk)
            hits = sum(1 for j in block if wx.coords[j].is_star != wy.coords[j].is_star)
            stars = sum(1 for j in block if wd.coords[j].is_star)
            certs.append(BlockCertificate(k, c, name, stars, hits, bound, hits >= bound, asserted))
        c += pk
    return certs


# --------------------------------------------------------- m' and orbits


@dataclass
class MPrime:
    m: int
    S: list[int]
    digits: tuple[int, ...]
    iprime: tuple[int, ...]
    m_prime: int
    m_levels: tuple[int, ...]
    mprime_levels: tuple[int, ...]


def compute_mprime(x: PointSpec, m: int, K: Optional[int] = None) -> MPrime:
    """Move each boundary digit of m to the interior preimage of its f-value.

    S collects the levels k <= K whose digit has tau-rank in {0, 1, b-2, b-1};
    digits above K are left unchanged.
    """
    tower = x.tower
    K = x.depth if K is None else K
    if K > tower.depth:
        raise DepthError(f"level {K} exceeds tower depth {tower.depth}")
    if symbol_at(x, m).is_star:
        raise ValueError(f"coordinate {m} is the star")
    r = x.rsequence(K)
    dec = decompose_index(tower, r, m, K)
    S, iprime = [], []
    for k, i in enumerate(dec.digits):
        lvl = tower.levels[k]
        if i not in lvl.tau:
            raise ValueError(f"digit {i} at level {k} is not in B_{k}; not a point of the subshift")
        t = lvl.tau[i]
        if t in (0, 1, lvl.b - 2, lvl.b - 1):
            S.append(k)
        iprime.append(lvl.f_inv[lvl.f[i]])
    m_prime = m + sum((ip - i) * tower.p(k - 1) for k, (i, ip) in enumerate(zip(dec.digits, iprime)))
    dec2 = decompose_index(tower, r, m_prime, K)
    return MPrime(m, S, dec.digits, tuple(iprime), m_prime, dec.m_levels, dec2.m_levels)


@dataclass
class OrbitReport:
    level: int
    alpha: int
    N: int
    checked: int
    total: int
    failures: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def check_orbit_window(z: PointSpec, m_prime: int, k: int) -> OrbitReport:
    """Check z[base + phi_k(n + alpha)] = T^n z[m'] for every n in I_k - alpha.

    base = r_k + m'_k p_k is the level-k block holding m'; alpha is the
    exponent position of m' inside it. N is the largest integer with
    (-N, N) contained in I_k - alpha.
    """
    tower = z.tower
    if k > z.depth:
        raise DepthError(f"level {k} exceeds tower depth")
    r = z.rsequence(k)
    dec = decompose_index(tower, r, m_prime, k)
    for L, i in enumerate(dec.digits):
        lvl = tower.levels[L]
        if i in (0, lvl.n - 1) or i not in lvl.f:
            raise ValueError(f"digit {i} of m' at level {L} is not interior")
    base = r[k] + dec.m_levels[k] * tower.p(k)
    alpha = tower.phi_inv(k, m_prime - base)
    bp = tower.b_prime(k)
    N = min(bp + alpha, 1 - alpha)
    lo, hi = base, base + tower.p(k)
    if not z.covers(lo, hi):
        raise DepthError(f"block [{lo}, {hi}) leaves the evaluable range")
    w = window(z, lo, hi)
    anchor = w[m_prime]
    failures = []
    J = tower.J(k)
    for t, j in zip(tower.I(k), J):
        if w[base + j] != anchor.shifted(t - alpha):
            failures.append(t - alpha)
    return OrbitReport(k, alpha, N, len(J), bp, failures)


# ---------------------------------------------------------------- entropy


@dataclass
class EntropyBound:
    K: int
    ratio: Fraction
    product: Fraction
    measured: float
    bound: float
    passed: bool
    asserted: bool


def entropy_lower_bound(tower: Tower, K: int, h_base: float) -> EntropyBound:
    """(#J_K / p_K) * h_base against h_base * prod_{k<=K} (1 - 2 eps_k)."""
    if K > tower.depth:
        raise DepthError(f"level {K} exceeds tower depth {tower.depth}")
    ratio = Fraction(tower.b_prime(K), tower.p(K))
    prod = tower.schedule.product_lower_bound(K)
    strict = all(lvl.strict for lvl in tower.levels[: K + 1])
    return EntropyBound(K, ratio, prod, float(ratio) * h_base, float(prod) * h_base, ratio >= prod, strict)


# ------------------------------------------------------------ pair verdict


@dataclass
class PairReport:
    x: dict
    y: dict
    lo: int
    hi: int
    N: int
    delta: float
    star_blocks: list[tuple[int, int]]
    separation_hits: list[int]
    separations_left: int
    separations_right: int
    r_match: Optional[bool]
    verdict: str
    proximal_plus: Optional[int] = None
    proximal_minus: Optional[int] = None

    def as_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "range": [self.lo, self.hi],
            "N": self.N,
            "delta": self.delta,
            "star_blocks": [list(b) for b in self.star_blocks],
            "separation_hits": len(self.separation_hits),
            "separations_left": self.separations_left,
            "separations_right": self.separations_right,
            "r_match": self.r_match,
            "n_plus": self.proximal_plus,
            "n_minus": self.proximal_minus,
            "verdict": self.verdict,
        }


def _runs(mask: list[bool], lo: int) -> list[tuple[int, int]]:
    runs, start = [], None
    for j, v in enumerate(mask + [False]):
        if v and start is None:
            start = j
        elif not v and start is not None:
            runs.append((lo + start, j - start))
            start = None
    return runs


def classify_pair(x: PointSpec, y: PointSpec, lo: int, hi: int, delta: float = DEFAULT_DELTA,
                  N: int = 1, min_hits: int = 1) -> PairReport:
    """Window-scale verdict: proximal witnesses and separation witnesses on both sides of 0."""
    wx, wy = window(x, lo, hi), window(y, lo, hi)
    both = [u.is_star and v.is_star for u, v in zip(wx.coords, wy.coords)]
    runs = _runs(both, lo)
    n_plus = n_minus = None
    for start, length in runs:
        s = max(start, N + 1)
        if s + N <= start + length and n_plus is None:
            n_plus = s
        e = min(start + length, -N - 1)
        if e - N >= start:
            n_minus = e if n_minus is None else max(n_minus, e)
    sep = separation_count(x, y, lo, hi, delta)
    left = sum(1 for i in sep.indices if i < 0)
    right = sum(1 for i in sep.indices if i >= 0)
    proximal = n_plus is not None and n_minus is not None
    separated = left >= min_hits and right >= min_hits
    verdict = {(True, True): "Both", (True, False): "ProximalWitness",
               (False, True): "SeparationWitness", (False, False): "Inconclusive"}[(proximal, separated)]
    r_match = None
    if not x.is_star_point and not y.is_star_point:
        r_match = x.rsequence() == y.rsequence()
    return PairReport(x.describe(), y.describe(), lo, hi, N, delta, [r for r in runs if r[1] >= N],
                      sep.star_hits, left, right, r_match, verdict, n_plus, n_minus)
