import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from proxshift.analysis import (
    check_orbit_window,
    classify_pair,
    compute_mprime,
    entropy_lower_bound,
    find_common_star_block,
    separation_blocks,
    separation_count,
    star_support,
)
from proxshift.base_system import STAR_DISTANCE, BasePoint, full_shift, random_point
from proxshift.partition import sqrt_bound_ceiling
from proxshift.points import (
    DepthError,
    coord_distance,
    decompose_index,
    sample_point,
    shift_point,
    star_point,
    symbol_at,
    window,
)
from proxshift.tower import default_toy_tower

Z = BasePoint("01", "0110", "001", 2)
W = BasePoint("1", "0", "011", 0)
_TOY = default_toy_tower(3)


def all_star(p, lo, hi):
    return all(c.is_star for c in window(p, lo, hi).coords)


# ---- star support

def test_star_support_agrees_with_nonstar_containment(toy):
    y = shift_point(sample_point(toy, Z), 123)
    r = y.rsequence(2)
    lo, hi = -toy.p(1), toy.p(1)
    w = window(y, lo, hi)
    guaranteed = set(star_support(toy, r, 2, lo, hi))
    for i, c in w.items():
        if not c.is_star:
            assert i not in guaranteed
            d = decompose_index(toy, r, i, 2)
            assert all(d.digits[k] in toy.levels[k].B for k in range(3))


def test_guaranteed_star_count_per_block(toy):
    y = shift_point(sample_point(toy, Z), 40)
    for k in range(2):
        lvl = toy.levels[k]
        pk = toy.p(k)
        c = y.r(k) - 2 * pk
        sup = star_support(toy, y.rsequence(k), k, c, c + pk)
        assert len(sup) >= len(lvl.A) * lvl.p_prev


# ---- common star blocks

def test_common_star_block_shift_by_one(toy):
    x = sample_point(toy, Z)
    y = shift_point(x, 1)
    N = toy.p(1) // 4
    wit = find_common_star_block(x, y, N)
    assert wit.n_plus > N and wit.n_minus < -N
    for p in (x, y):
        assert all_star(p, wit.n_plus, wit.n_plus + N)
        assert all_star(p, wit.n_minus - N, wit.n_minus)


def test_common_star_block_identical_points(toy):
    x = shift_point(sample_point(toy, Z), 5)
    wit = find_common_star_block(x, x, 1)
    assert wit.level == 1
    assert all_star(x, wit.n_plus, wit.n_plus + 1)


def test_common_star_block_with_star_point(toy):
    x = sample_point(toy, Z)
    wit = find_common_star_block(x, star_point(toy), toy.p(0))
    assert all_star(x, wit.n_plus, wit.n_plus + toy.p(0))
    wit = find_common_star_block(star_point(toy), star_point(toy), 10)
    assert wit.n_plus > 10


def test_common_star_block_depth_error(toy):
    x = sample_point(toy, Z)
    with pytest.raises(DepthError):
        find_common_star_block(x, shift_point(x, 3), toy.p(2))
    with pytest.raises(ValueError):
        find_common_star_block(x, x, -1)


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_common_star_block_random_pairs(seed):
    tower = _TOY
    rng = random.Random(seed)
    x = shift_point(sample_point(tower, Z), rng.randrange(-tower.p(2), tower.p(2)))
    y = shift_point(sample_point(tower, rng.choice([Z, W])), rng.randrange(-tower.p(2), tower.p(2)))
    k = rng.randrange(tower.depth)
    N = rng.randint(0, tower.p(k) // 2 - 1)
    wit = find_common_star_block(x, y, N)
    assert wit.level <= k + 1
    for p in (x, y):
        assert all_star(p, wit.n_plus, wit.n_plus + N)
        assert all_star(p, wit.n_minus - N, wit.n_minus)


# ---- separation

def test_separation_identical_points(toy):
    x = shift_point(sample_point(toy, Z), 3)
    assert separation_count(x, x, -500, 500).count == 0


def test_separation_against_star_point(toy):
    x = sample_point(toy, Z)
    st_ = star_point(toy)
    for k in range(2):
        certs = separation_blocks(x, st_, k, -toy.p(2), toy.p(2))
        assert certs
        for c in certs:
            assert c.separation_count >= toy.levels[k].b and c.passed
        pk = toy.p(k)
        s = separation_count(x, st_, 0, pk, delta=STAR_DISTANCE - 1e-9)
        assert s.count >= toy.levels[k].b


def test_separation_hits_are_star_mismatches(toy):
    x = sample_point(toy, Z)
    y = shift_point(sample_point(toy, W), 7)
    res = separation_count(x, y, -300, 300)
    wx, wy = window(x, -300, 300), window(y, -300, 300)
    for i in res.star_hits:
        assert wx[i].is_star != wy[i].is_star
        assert coord_distance(wx[i], wy[i]) == STAR_DISTANCE
    for i in range(-300, 300):
        d = coord_distance(wx[i], wy[i])
        assert (d > res.delta) == (i in set(res.indices))


def test_separation_delta_guard(toy):
    x = sample_point(toy, Z)
    with pytest.raises(ValueError):
        separation_count(x, x, 0, 10, delta=5.0)


def test_separation_blocks_strict(strict):
    x = sample_point(strict, Z)
    bound = sqrt_bound_ceiling(strict.levels[0].n)
    assert bound == 9
    for s in (1, 50, 86, 172):
        y = shift_point(sample_point(strict, W), s)
        certs = separation_blocks(x, y, 0, -20 * strict.p(0), 20 * strict.p(0))
        assert certs and all(c.asserted for c in certs)
        assert all(c.separation_count >= bound for c in certs)


def test_separation_blocks_same_phase_rejected(toy):
    x = sample_point(toy, Z)
    with pytest.raises(ValueError):
        separation_blocks(x, shift_point(x, toy.p(0)), 0, -200, 200)
    with pytest.raises(ValueError):
        separation_blocks(star_point(toy), star_point(toy), 0, 0, 10)


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_separation_blocks_toy_levels(seed):
    tower = _TOY
    rng = random.Random(seed)
    x = shift_point(sample_point(tower, Z), rng.randrange(-500, 500))
    y = shift_point(sample_point(tower, W), rng.randrange(-500, 500))
    k = rng.choice([0, 1])
    if x.r(k) == y.r(k):
        return
    for c in separation_blocks(x, y, k, -tower.p(2), tower.p(2) - 600):
        assert c.separation_count >= c.bound


# ---- m' and orbits

def test_mprime_empty_correction(toy):
    x = sample_point(toy, Z)
    # an index whose digits are all interior needs no correction
    for m in range(toy.p(2)):
        if symbol_at(x, m).is_star:
            continue
        mp = compute_mprime(x, m, 2)
        if not mp.S:
            assert mp.m_prime == m
            break
    else:
        pytest.fail("no interior index found")


def test_mprime_zero_digit(toy):
    x = sample_point(toy, Z)
    mp = compute_mprime(x, 0, 2)
    assert mp.S == [0, 1, 2]
    for k in range(3):
        lvl = toy.levels[k]
        assert mp.iprime[k] == lvl.coding.tau_inv[lvl.b - 2]
    assert symbol_at(x, mp.m_prime) == symbol_at(x, 0)


def test_mprime_rejects_star(toy):
    x = sample_point(toy, Z)
    with pytest.raises(ValueError):
        compute_mprime(x, toy.levels[0].A[0], 1)


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_mprime_properties(seed):
    tower = _TOY
    rng = random.Random(seed)
    s = rng.randrange(-1000, 1000)
    x = shift_point(sample_point(tower, Z), s)
    y = shift_point(sample_point(tower, W), s)
    m = rng.randrange(-1000, 1000)
    if symbol_at(x, m).is_star:
        return
    mp = compute_mprime(x, m, 2)
    assert all(mp.iprime[k] in tower.levels[k].C for k in range(3))
    assert symbol_at(x, mp.m_prime) == symbol_at(x, m)
    assert symbol_at(y, mp.m_prime) == symbol_at(y, m)
    for k in range(3):
        lvl = tower.levels[k]
        rep = check_orbit_window(x, mp.m_prime, k)
        assert rep.passed
        if -(lvl.b - 4) <= lvl.f[mp.iprime[k]] <= -1:
            assert rep.N >= tower.b_prime(k - 1)


def test_orbit_window_identity_instance(toy):
    x = sample_point(toy, Z)
    mp = compute_mprime(x, 5, 1)
    rep = check_orbit_window(x, mp.m_prime, 1)
    assert 0 in range(-rep.N + 1, rep.N)
    assert rep.checked == toy.b_prime(1) and not rep.failures


def test_orbit_window_rejects_boundary_digit(toy):
    x = sample_point(toy, Z)
    with pytest.raises(ValueError):
        check_orbit_window(x, 0, 0)


# ---- entropy

def test_entropy_strict_level0(strict):
    eb = entropy_lower_bound(strict, 0, math.log(2))
    assert eb.ratio == Fraction(strict.levels[0].n - len(strict.levels[0].A) - 2, strict.p(0))
    assert eb.ratio >= Fraction(3, 4) and eb.passed and eb.asserted
    assert eb.measured >= eb.bound


def test_entropy_zero_base(strict):
    eb = entropy_lower_bound(strict, 1, 0.0)
    assert eb.bound == 0 and eb.measured == 0


def test_entropy_toy_two_ways(toy):
    eb = entropy_lower_bound(toy, 1, 1.0)
    c0, c1 = len(toy.levels[0].C), len(toy.levels[1].C)
    assert eb.ratio == Fraction(c0 * c1, toy.p(1)) == Fraction(len(toy.J(1)), toy.p(1))


def test_entropy_ratio_monotone(toy, strict):
    for t in (toy, strict):
        ratios = [entropy_lower_bound(t, K, 1.0).ratio for K in range(t.depth + 1)]
        assert all(b <= a for a, b in zip(ratios, ratios[1:]))


def test_entropy_depth_error(toy):
    with pytest.raises(DepthError):
        entropy_lower_bound(toy, 9, 1.0)


# ---- classification

def test_classify_shift_by_one(toy):
    x = sample_point(toy, Z)
    rep = classify_pair(x, shift_point(x, 1), -toy.p(2), toy.p(2) - 1, N=toy.p(0))
    assert rep.verdict == "Both"
    assert rep.r_match is False


def test_classify_diagonal(toy):
    x = sample_point(toy, Z)
    rep = classify_pair(x, x, -toy.p(2), toy.p(2), N=toy.p(0))
    assert rep.verdict == "ProximalWitness"
    assert rep.separations_left == rep.separations_right == 0 and rep.r_match


def test_classify_star_point(toy):
    x = sample_point(toy, Z)
    rep = classify_pair(x, star_point(toy), -toy.p(2), toy.p(2), N=toy.p(0))
    assert rep.verdict == "Both" and rep.r_match is None


def test_classify_reported_blocks_are_star(toy):
    x = sample_point(toy, Z)
    y = shift_point(sample_point(toy, W), 9)
    lo, hi = -1000, 1000
    rep = classify_pair(x, y, lo, hi, N=3)
    wx, wy = window(x, lo, hi), window(y, lo, hi)
    for start, length in rep.star_blocks:
        assert all(wx[i].is_star and wy[i].is_star for i in range(start, start + length))
    for i in rep.separation_hits:
        assert wx[i].is_star != wy[i].is_star
    assert rep.as_dict()["range"] == [lo, hi]


def test_classify_short_window_inconclusive(toy):
    x = sample_point(toy, Z)
    rep = classify_pair(x, shift_point(x, 1), 0, 3, N=50)
    assert rep.verdict == "Inconclusive"


def test_random_roots_pairs(toy):
    rng = random.Random(11)
    for _ in range(5):
        z1, z2 = random_point(full_shift(2), rng), random_point(full_shift(2), rng)
        x = sample_point(toy, z1)
        y = shift_point(sample_point(toy, z2), rng.randrange(1, toy.p(0)))
        rep = classify_pair(x, y, -toy.p(2), toy.p(2) - toy.p(0), N=toy.p(0))
        assert rep.verdict == "Both"
