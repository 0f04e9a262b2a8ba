"""Reproducible end-to-end experiment: config in, JSON and CSV reports out.

Config files are ``key = value`` lines (``#`` starts a comment):

    base = full2            # builtin name or path to an SFT file
    mode = strict           # strict | toy
    depth = 1
    eps_num = 1             # eps_k = eps_num / eps_den_base ** (k + eps_shift)
    eps_den_base = 2
    eps_shift = 3
    eps = 2/5, 3/8          # explicit schedule; overrides the three keys above
    toy_levels = levels.json
    seed = 0
    roots = 2               # random roots of the base system
    shifts = 20             # decode round trips
    pairs = 4               # analysed pairs
    json_report = report.json
    csv_report = report.csv

Exit status: 0 when every asserted check passes, 1 when one fails, 2 when
the config or a referenced file is unusable.
"""
from __future__ import annotations

import configparser
import csv
import datetime
import io
import json
import logging
import math
import random
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .analysis import (
    check_orbit_window,
    classify_pair,
    compute_mprime,
    entropy_lower_bound,
    find_common_star_block,
    separation_blocks,
)
from .base_system import StarSpace, count_words, load_system, random_point
from .partition import verify_partition
from .points import check_membership, decode_r, sample_point, shift_point, star_point, window
from .tower import (
    DEFAULT_SCHEDULE,
    TOY_SCHEDULE,
    EpsSchedule,
    Tower,
    TowerError,
    build_tower,
    load_toy_levels,
)

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    base: str = "full2"
    mode: str = "strict"
    depth: int = 1
    eps_num: Optional[int] = None
    eps_den_base: Optional[int] = None
    eps_shift: Optional[int] = None
    eps: Optional[str] = None
    toy_levels: Optional[str] = None
    seed: int = 0
    roots: int = 2
    shifts: int = 20
    pairs: int = 4
    json_report: Optional[str] = None
    csv_report: Optional[str] = None

    @classmethod
    def parse(cls, text: str, base_dir: Optional[Path] = None) -> "ExperimentConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            cp.read_string("[suite]\n" + text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from None
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in cp["suite"].items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = raw.strip()
        cfg = cls()
        for key, raw in kwargs.items():
            default = getattr(cfg, key)
            if key in ("depth", "seed", "roots", "shifts", "pairs", "eps_num", "eps_den_base", "eps_shift"):
                try:
                    setattr(cfg, key, int(raw))
                except ValueError:
                    raise ConfigError(f"{key} must be an integer, got {raw!r}") from None
            else:
                setattr(cfg, key, raw or default)
        if base_dir is not None:
            for key in ("toy_levels", "json_report", "csv_report"):
                v = getattr(cfg, key)
                if v and not Path(v).is_absolute():
                    setattr(cfg, key, str(base_dir / v))
            if cfg.base and ("/" in cfg.base or cfg.base.endswith(".sft")):
                p = Path(cfg.base)
                if not p.is_absolute():
                    cfg.base = str(base_dir / p)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        return cls.parse(path.read_text(), path.parent)

    def validate(self):
        if self.mode not in ("strict", "toy"):
            raise ConfigError(f"mode must be strict or toy, got {self.mode!r}")
        if self.depth < 0:
            raise ConfigError("depth must be nonnegative")
        for key in ("roots", "shifts", "pairs"):
            if getattr(self, key) < 0:
                raise ConfigError(f"{key} must be nonnegative")

    def schedule(self) -> EpsSchedule:
        if self.eps:
            try:
                return EpsSchedule.explicit([v.strip() for v in self.eps.split(",") if v.strip()])
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"bad explicit schedule {self.eps!r}") from None
        if any(v is not None for v in (self.eps_num, self.eps_den_base, self.eps_shift)):
            return EpsSchedule.geometric(
                1 if self.eps_num is None else self.eps_num,
                2 if self.eps_den_base is None else self.eps_den_base,
                3 if self.eps_shift is None else self.eps_shift,
            )
        return TOY_SCHEDULE if self.mode == "toy" else DEFAULT_SCHEDULE

    def build_tower(self) -> Tower:
        """Build the configured tower; config problems raise ConfigError."""
        try:
            sys = load_system(self.base)
        except (FileNotFoundError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        toy = None
        if self.toy_levels:
            if not Path(self.toy_levels).is_file():
                raise ConfigError(f"toy level file {self.toy_levels} does not exist")
            toy = load_toy_levels(self.toy_levels)
        return build_tower(self.schedule(), self.depth, self.mode, StarSpace(sys), toy)


@dataclass
class Check:
    name: str
    bound: object
    measured: object
    passed: bool
    asserted: bool = True
    detail: str = ""


@dataclass
class SuiteResult:
    exit_code: int
    checks: list[Check] = field(default_factory=list)
    error: Optional[str] = None
    report: dict = field(default_factory=dict)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.asserted and not c.passed]


def _jsonable(v):
    if isinstance(v, float):
        return round(v, 12)
    return v


class _Run:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.checks: list[Check] = []
        self.rng = random.Random(cfg.seed)

    def check(self, name, bound, measured, passed, asserted=True, detail=""):
        c = Check(name, _jsonable(bound), _jsonable(measured), bool(passed), asserted, detail)
        self.checks.append(c)
        if asserted and not passed:
            log.warning("check failed: %s (bound=%s measured=%s) %s", name, bound, measured, detail)
        return c

    # each stage appends checks; none raises on a failed check

    def partitions(self, tower: Tower):
        for lvl in tower.levels:
            rep = verify_partition(lvl.part, tower.schedule.eps(lvl.k))
            self.check(f"partition.L{lvl.k}.structural", True, rep.structural, rep.structural)
            self.check(f"partition.L{lvl.k}.prop_i", f"#A < {rep.n_eps}", rep.card_A, rep.prop_i,
                       asserted=tower.mode == "strict")
            worst = min(rep.prop_iii_counts.values()) if rep.prop_iii_counts else 0
            self.check(f"partition.L{lvl.k}.prop_iii", f"sqrt({lvl.n}/2)-1", worst, rep.prop_iii,
                       asserted=tower.mode == "strict")

    def tower_sets(self, tower: Tower):
        for lvl in tower.levels:
            k = lvl.k
            J = tower.J(k)
            self.check(f"tower.L{k}.card_J", lvl.b_prime, len(J), len(J) == lvl.b_prime)
            ok = all(a < b for a, b in zip(J, J[1:])) and all(0 <= j < lvl.p for j in J)
            self.check(f"tower.L{k}.J_increasing", True, ok, ok)
            probe = range(-lvl.b_prime + 1, 1) if lvl.b_prime <= 4000 else \
                sorted({-self.rng.randrange(lvl.b_prime) for _ in range(2000)})
            ok = all(tower.phi(k, n) == J[n + lvl.b_prime - 1] and tower.phi_inv(k, tower.phi(k, n)) == n
                     for n in probe)
            self.check(f"tower.L{k}.phi_bijection", True, ok, ok, detail=f"{len(probe)} probes")

    def points(self, tower: Tower, roots):
        D = tower.depth
        pD = tower.p(D)
        for zi, z in enumerate(roots):
            x = sample_point(tower, z)
            w = window(x, -pD, pD)
            rep = check_membership(w, tower, x.rsequence(), D)
            self.check(f"points.root{zi}.membership", "pass", rep.status, rep.status != "fail",
                       detail=str(rep.violation or ""))
            bad = [n for n in tower.I(0) if w[tower.phi(0, n)] != w[0].shifted(n)]
            self.check(f"points.root{zi}.orbit_L0", 0, len(bad), not bad)

    def decode(self, tower: Tower, roots):
        D = tower.depth
        if D < 1 or not roots:
            self.check("decode.round_trip", "depth >= 1", D, True, asserted=False, detail="skipped")
            return
        K = D - 1
        pK = tower.p(K)
        x = sample_point(tower, roots[0])
        bad = 0
        for _ in range(self.cfg.shifts):
            s = self.rng.randrange(pK)
            y = shift_point(x, s)
            res = decode_r(window(y, -4 * pK, 4 * pK), tower, K)
            if res.status != "unique" or res.r != y.rsequence(K):
                bad += 1
        self.check(f"decode.round_trip.K{K}", self.cfg.shifts, self.cfg.shifts - bad, bad == 0)

    def pairs(self, tower: Tower, roots):
        D = tower.depth
        if not roots:
            return
        p0, pD = tower.p(0), tower.p(D)
        lvl0 = tower.levels[0]
        x = sample_point(tower, roots[0])
        lo, hi = -pD + p0, pD - p0
        for j in range(self.cfg.pairs):
            s = self.rng.randrange(1, p0)
            other = roots[j % len(roots)]
            y = shift_point(sample_point(tower, other), s)
            certs = separation_blocks(x, y, 0, lo, hi)
            worst = min((c.separation_count for c in certs), default=None)
            ok = bool(certs) and all(c.passed for c in certs)
            self.check(f"pairs.{j}.separation_L0", certs[0].bound if certs else None, worst, ok,
                       asserted=lvl0.strict, detail=f"{len(certs)} blocks, shift {s}")
            if D >= 1:
                N = p0 // 2 - 1
                try:
                    wit = find_common_star_block(x, y, N)
                    self.check(f"pairs.{j}.common_star_block", N, N, True,
                               detail=f"n+={wit.n_plus} n-={wit.n_minus} level={wit.level} {wit.case}")
                except (ValueError, AssertionError) as exc:
                    self.check(f"pairs.{j}.common_star_block", N, None, False, detail=str(exc))
                rep = classify_pair(x, y, lo, hi, N=N)
                self.check(f"pairs.{j}.verdict", "Both", rep.verdict, rep.verdict == "Both")
        st = star_point(tower)
        certs = separation_blocks(x, st, 0, lo, hi)
        worst = min((c.separation_count for c in certs), default=None)
        self.check("pairs.star.separation_L0", lvl0.b, worst, bool(certs) and all(c.passed for c in certs))

    def mprime(self, tower: Tower, roots):
        if not roots:
            return
        D = tower.depth
        x = sample_point(tower, roots[0])
        pD = tower.p(D)
        done = tries = 0
        bad_eq = bad_orbit = 0
        min_margin = None
        while done < 5 and tries < 10_000:
            tries += 1
            m = self.rng.randrange(pD)
            if x.symbol_at(m).is_star:
                continue
            mp = compute_mprime(x, m, D)
            if not mp.S:
                continue
            done += 1
            if x.symbol_at(mp.m_prime) != x.symbol_at(m):
                bad_eq += 1
            for k in range(D + 1):
                lvl = tower.levels[k]
                if not -(lvl.b - 4) <= lvl.f[mp.iprime[k]] <= -1:
                    continue
                rep = check_orbit_window(x, mp.m_prime, k)
                margin = rep.N - tower.b_prime(k - 1)
                min_margin = margin if min_margin is None else min(min_margin, margin)
                if not rep.passed or margin < 0:
                    bad_orbit += 1
        self.check("mprime.coordinate_equal", done, done - bad_eq, bad_eq == 0)
        self.check("mprime.orbit_window", "N >= b'_{k-1}", min_margin, bad_orbit == 0)

    def entropy(self, tower: Tower):
        sys = tower.base.base
        n = 20
        h_base = math.log(count_words(sys, n)) / n
        self.check("entropy.base_estimate", None, h_base, True, asserted=False, detail=f"log #words / {n}")
        prev = None
        for K in range(tower.depth + 1):
            eb = entropy_lower_bound(tower, K, h_base)
            self.check(f"entropy.L{K}.ratio", str(eb.product), str(eb.ratio), eb.passed,
                       asserted=eb.asserted, detail=f"measured {eb.measured:.6f} >= bound {eb.bound:.6f}")
            if prev is not None:
                self.check(f"entropy.L{K}.monotone", str(prev), str(eb.ratio), eb.ratio <= prev)
            prev = eb.ratio


def run_suite(cfg: ExperimentConfig, timestamp: Optional[str] = None) -> SuiteResult:
    """Run every stage and write the configured reports."""
    run = _Run(cfg)
    error = None
    try:
        tower = cfg.build_tower()
    except ConfigError as exc:
        return SuiteResult(EXIT_CONFIG, [], str(exc))
    except TowerError as exc:
        run.check("tower.build", "structural gate", str(exc), False)
        tower = None
        error = str(exc)
    if tower is not None:
        roots = [random_point(tower.base.base, run.rng) for _ in range(cfg.roots)]
        run.partitions(tower)
        run.tower_sets(tower)
        run.points(tower, roots)
        run.decode(tower, roots)
        run.pairs(tower, roots)
        run.mprime(tower, roots)
        run.entropy(tower)
    result = SuiteResult(EXIT_OK, run.checks, error)
    if result.failures:
        result.exit_code = EXIT_FAIL
    result.report = {
        "schema_version": SCHEMA_VERSION,
        "timestamp": timestamp or datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": asdict(cfg),
        "tower": tower.as_dict(j_cap=0) if tower is not None else None,
        "roots": [r.format() for r in roots] if tower is not None else [],
        "checks": [asdict(c) for c in run.checks],
        "passed": result.exit_code == EXIT_OK,
        "error": error,
    }
    if cfg.json_report:
        Path(cfg.json_report).write_text(report_json(result.report))
    if cfg.csv_report:
        Path(cfg.csv_report).write_text(checks_csv(run.checks))
    return result


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def checks_csv(checks: list[Check]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "bound", "measured", "pass", "asserted", "detail"])
    for c in checks:
        w.writerow([c.name, c.bound, c.measured, c.passed, c.asserted, c.detail])
    return buf.getvalue()
