"""The eleven acceptance criteria, one test each.

Each test prints a single PASS/FAIL line; the terminal summary repeats them
(see conftest.py). Runtime limits are asserted alongside the criteria.
"""
import json
import math
import random
import time
from fractions import Fraction

import pytest

from proxshift.analysis import (
    check_orbit_window,
    compute_mprime,
    entropy_lower_bound,
    find_common_star_block,
    separation_blocks,
)
from proxshift.base_system import entropy_estimate, full_shift, golden_mean_shift, random_point
from proxshift.partition import make_partition, min_valid_n, sqrt_bound_ceiling, verify_partition
from proxshift.points import (
    Orbit,
    decode_r,
    sample_point,
    shift_point,
    star_point,
    symbol_at,
    window,
)
from proxshift.suite import ExperimentConfig, report_json, run_suite
from proxshift.tower import build_tower, default_toy_tower


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def report(number, ok, detail):
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def brute_props(n, A):
    """Properties (ii) and the worst (iii) count, by direct O(n^2) scan."""
    A = set(A)
    B = set(range(n)) - A
    shifted = A | {n + a for a in A}
    ii = all(any(a + i in shifted for a in A) for i in range(n))
    iii = min(len({a + i for a in A} & B) for i in range(1, n // 2 + 2))
    return ii, iii


@pytest.mark.acceptance(1, "partition properties, exhaustive over 3 x 30 sizes")
def test_criterion_01_partition_exhaustive():
    with Timer() as t:
        checked = 0
        ok = True
        for eps in (Fraction(1, 8), Fraction(1, 5), Fraction(3, 10)):
            lo = min_valid_n(eps)
            for n in range(lo, lo + 30):
                part = make_partition(n, eps)
                rep = verify_partition(part, eps)
                ii, worst = brute_props(n, part.A)
                ok &= rep.prop_i and rep.prop_ii and rep.prop_iii and ii
                ok &= 2 <= len(part.A) < n * eps and 2 * (worst + 1) ** 2 >= n
                checked += 1
    report(1, ok and t.elapsed < 10, f"{checked} partitions, {t.elapsed:.2f}s")
    assert checked == 90 and ok
    assert t.elapsed < 10


@pytest.mark.acceptance(2, "strict level 0 index-set density >= 3/4")
def test_criterion_02_strict_level0():
    with Timer() as t:
        tower = build_tower(K=0)
        J0 = tower.J(0)
        ratio = Fraction(len(J0), tower.p(0))
        bound = 1 - 2 * tower.schedule.eps(0)
    ok = tower.levels[0].strict and bound == Fraction(3, 4) and ratio >= bound
    report(2, ok and t.elapsed < 1, f"#J_0/p_0 = {ratio} >= {bound}, {t.elapsed:.3f}s")
    assert ok
    assert t.elapsed < 1


@pytest.mark.acceptance(3, "toy J_1 recursion, phi_1 bijection and block identity")
def test_criterion_03_toy_index_sets():
    with Timer() as t:
        tower = default_toy_tower(1)
        assert tower.p(1) <= 10**4
        l0, l1 = tower.levels
        J0 = list(l0.C)
        J1 = sorted(tower.p(0) * c + j for c in l1.C for j in J0)
        by_definition = [m for m in range(tower.p(1))
                         if m % tower.p(0) in l0.C and m // tower.p(0) in l1.C]
        phi = [tower.phi(1, n) for n in tower.I(1)]
        ok = tower.J(1) == J1 == by_definition
        ok &= len(J1) == len(l0.C) * len(l1.C)
        ok &= all(a < b for a, b in zip(phi, phi[1:])) and sorted(phi) == J1
        bp = tower.b_prime(0)
        for j in sorted({l1.f[i] for i in l1.C}):
            lhs = sorted(tower.phi(1, j * bp + n) for n in tower.I(0))
            ok &= lhs == [l1.f_inv[j] * tower.p(0) + x for x in J0]
    report(3, ok and t.elapsed < 5, f"#J_1 = {len(J1)} = {len(l0.C)}*{len(l1.C)}, {t.elapsed:.3f}s")
    assert ok
    assert t.elapsed < 5


@pytest.mark.acceptance(4, "orbit embedding for 20 random roots")
def test_criterion_04_orbit_embedding():
    with Timer() as t:
        tower = default_toy_tower(3)
        K = tower.depth
        rng = random.Random(4)
        bad = 0
        for _ in range(20):
            z = random_point(full_shift(2), rng)
            x = sample_point(tower, z)
            bad += sum(1 for n in tower.I(K) if symbol_at(x, tower.phi(K, n)) != Orbit(z, n))
    ok = bad == 0
    report(4, ok and t.elapsed < 10, f"K={K}, {20 * tower.b_prime(K)} probes, {bad} mismatches, {t.elapsed:.2f}s")
    assert ok
    assert t.elapsed < 10


@pytest.mark.acceptance(5, "decoder round trip for 100 shifts")
def test_criterion_05_decode_round_trip():
    with Timer() as t:
        tower = default_toy_tower(2)
        K = 1
        pK = tower.p(K)
        rng = random.Random(5)
        x = sample_point(tower, random_point(full_shift(2), rng))
        bad = []
        for _ in range(100):
            s = rng.randrange(pK)
            res = decode_r(window(shift_point(x, s), -4 * pK, 4 * pK), tower, K)
            expected = tuple((-s) % tower.p(k) for k in range(K + 1))
            if res.status != "unique" or res.r.values != expected:
                bad.append((s, res.status))
    ok = not bad
    report(5, ok and t.elapsed < 30, f"100 shifts, {len(bad)} failures, {t.elapsed:.2f}s")
    assert ok, bad[:5]
    assert t.elapsed < 30


@pytest.mark.acceptance(6, "proximality witnesses for 50 pairs")
def test_criterion_06_proximality():
    with Timer() as t:
        tower = default_toy_tower(3)
        rng = random.Random(6)
        z0 = random_point(full_shift(2), rng)
        found = 0
        bad = []
        for j in range(50):
            if j < 25:
                s1, s2 = rng.sample(range(-tower.p(2), tower.p(2)), 2)
                x = shift_point(sample_point(tower, z0), s1)
                y = shift_point(sample_point(tower, z0), s2)
            else:
                x = shift_point(sample_point(tower, random_point(full_shift(2), rng)), rng.randrange(-tower.p(2), tower.p(2)))
                y = shift_point(sample_point(tower, random_point(full_shift(2), rng)), rng.randrange(-tower.p(2), tower.p(2)))
            for k in range(tower.depth):
                N = tower.p(k) // 2 - 1
                wit = find_common_star_block(x, y, N)
                good = wit.n_plus > N and wit.n_minus < -N and wit.level == k + 1
                for p in (x, y):
                    w1, w2 = window(p, wit.n_plus, wit.n_plus + N), window(p, wit.n_minus - N, wit.n_minus)
                    good &= all(c.is_star for c in w1.coords + w2.coords)
                if good:
                    found += 1
                else:
                    bad.append((j, k))
    ok = not bad
    report(6, ok and t.elapsed < 30, f"{found} verified witnesses over 50 pairs x {tower.depth} levels, {t.elapsed:.2f}s")
    assert ok, bad[:5]
    assert t.elapsed < 30


@pytest.mark.acceptance(7, "separation bound on strict level 0")
def test_criterion_07_separation_bound():
    with Timer() as t:
        tower = build_tower(K=1)
        lvl = tower.levels[0]
        p0 = tower.p(0)
        bound = sqrt_bound_ceiling(lvl.n)
        rng = random.Random(7)
        worst, blocks, pairs = None, 0, 0
        while pairs < 20:
            z1, z2 = random_point(full_shift(2), rng), random_point(full_shift(2), rng)
            x = shift_point(sample_point(tower, z1), rng.randrange(-5000, 5000))
            y = shift_point(sample_point(tower, rng.choice([z1, z2])), rng.randrange(-5000, 5000))
            if x.r(0) == y.r(0):
                continue
            pairs += 1
            lo, hi = -40 * p0, 40 * p0
            certs = separation_blocks(x, y, 0, lo, hi)
            assert certs and all(c.asserted for c in certs)
            wx, wy = window(x, lo, hi), window(y, lo, hi)
            # every aligned non-star block of either point, not only the designated one
            for p, w in ((x, wx), (y, wy)):
                c = lo + ((p.r(0) - lo) % p0)
                while c + p0 <= hi:
                    if not w[c].is_star:
                        hits = sum(1 for i in range(c, c + p0) if wx[i].is_star != wy[i].is_star)
                        worst = hits if worst is None else min(worst, hits)
                        blocks += 1
                    c += p0
            worst = min([worst] + [c.separation_count for c in certs])
    ok = bound == 9 and worst is not None and worst >= bound
    report(7, ok and t.elapsed < 10, f"{blocks} blocks, min hits {worst} >= {bound}, {t.elapsed:.2f}s")
    assert ok
    assert t.elapsed < 10


@pytest.mark.acceptance(8, "sample versus all-star point separations")
def test_criterion_08_star_point_separation():
    with Timer() as t:
        tower = build_tower(K=1)
        b0 = tower.levels[0].b
        rng = random.Random(8)
        x = sample_point(tower, random_point(full_shift(2), rng))
        certs = separation_blocks(x, star_point(tower), 0, -30 * tower.p(0), 30 * tower.p(0))
        worst = min(c.separation_count for c in certs)
    ok = bool(certs) and worst >= b0
    report(8, ok and t.elapsed < 5, f"{len(certs)} blocks, min {worst} >= #B_0 = {b0}, {t.elapsed:.2f}s")
    assert ok
    assert t.elapsed < 5


@pytest.mark.acceptance(9, "m' coordinates and orbit windows for 50 indices")
def test_criterion_09_mprime():
    with Timer() as t:
        tower = default_toy_tower(3)
        K = tower.depth
        rng = random.Random(9)
        z = random_point(full_shift(2), rng)
        x = shift_point(sample_point(tower, z), rng.randrange(tower.p(2)))
        done, bad, interior = 0, [], 0
        lo, hi = x.domain
        while done < 50:
            m = rng.randrange(lo // 2, hi // 2)
            if symbol_at(x, m).is_star:
                continue
            mp = compute_mprime(x, m, K)
            if not mp.S:
                continue
            done += 1
            if symbol_at(x, mp.m_prime) != symbol_at(x, m):
                bad.append(("coord", m))
            for k in range(K + 1):
                lvl = tower.levels[k]
                if -(lvl.b - 4) <= lvl.f[mp.iprime[k]] <= -1:
                    interior += 1
                    rep = check_orbit_window(x, mp.m_prime, k)
                    if not rep.passed or rep.N < tower.b_prime(k - 1):
                        bad.append(("orbit", m, k, rep.N))
    ok = not bad and interior > 0
    report(9, ok and t.elapsed < 30, f"50 indices, {interior} interior levels probed, {len(bad)} failures, {t.elapsed:.2f}s")
    assert ok, bad[:5]
    assert t.elapsed < 30


@pytest.mark.acceptance(10, "entropy chain")
def test_criterion_10_entropy():
    with Timer() as t:
        est = entropy_estimate(golden_mean_shift(), 1, 20)
        target = math.log((1 + math.sqrt(5)) / 2)
        tower = build_tower(K=1)
        bounds = [entropy_lower_bound(tower, K, est.value) for K in range(tower.depth + 1)]
    ok = abs(est.value - target) < 0.05
    ok &= all(eb.asserted and eb.passed and eb.ratio >= eb.product for eb in bounds)
    ok &= all(isinstance(eb.ratio, Fraction) for eb in bounds)
    detail = ", ".join(f"K={eb.K}: {eb.ratio} >= {eb.product}" for eb in bounds)
    report(10, ok and t.elapsed < 10, f"h = {est.value:.4f} vs {target:.4f}; {detail}; {t.elapsed:.2f}s")
    assert ok
    assert t.elapsed < 10


@pytest.mark.acceptance(11, "suite determinism")
def test_criterion_11_determinism(tmp_path):
    with Timer() as t:
        outputs = []
        js, cs = tmp_path / "r.json", tmp_path / "r.csv"
        for _ in range(2):
            res = run_suite(ExperimentConfig(seed=11, json_report=str(js), csv_report=str(cs)))
            assert res.exit_code == 0, [c.name for c in res.failures]
            rep = json.loads(js.read_text())
            rep["timestamp"] = None
            outputs.append((report_json(rep), cs.read_bytes()))
    ok = outputs[0] == outputs[1]
    report(11, ok and t.elapsed < 120, f"two default runs identical modulo timestamp, {t.elapsed:.1f}s")
    assert ok
    assert t.elapsed < 120
