"""Command-line front end: ``proxshift <command> ...``.

Tower-shaped commands take their parameters from ``--config`` (the suite's
key-value format) with individual flags overriding it. Output is a short
text summary unless ``--json`` is given; ``--csv PATH`` writes a table where
one makes sense.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from .analysis import (
    check_orbit_window,
    classify_pair,
    compute_mprime,
    entropy_lower_bound,
    separation_blocks,
)
from .base_system import BasePoint, count_words, entropy_estimate
from .partition import (
    Partition,
    as_fraction,
    make_partition,
    min_valid_n,
    partition_parameters,
    search_min_partition,
    verify_partition,
)
from .points import (
    DepthError,
    PointSpec,
    Window,
    decode_r,
    sample_point,
    shift_point,
    star_point,
    window,
)
from .suite import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, ConfigError, ExperimentConfig, report_json, run_suite
from .tower import Tower, TowerError

log = logging.getLogger("proxshift")


def _emit(args, data: dict, text: str):
    if args.json:
        sys.stdout.write(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _write_csv(path: Optional[str], header: Sequence[str], rows: list):
    if not path:
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    for key in ("base", "mode", "depth", "toy_levels", "eps", "eps_num", "eps_den_base", "eps_shift"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    cfg.validate()
    return cfg


def _tower(args) -> Tower:
    return _config(args).build_tower()


def _point(tower: Tower, root: Optional[str], shift: int) -> PointSpec:
    if root is None or root == "*":
        return star_point(tower)
    return shift_point(sample_point(tower, BasePoint.parse(root)), shift)


# ------------------------------------------------------------------ commands


def cmd_partition(args) -> int:
    eps = as_fraction(args.eps)
    if args.A is not None:
        if args.n is None:
            raise ConfigError("--A needs --n")
        part = Partition.from_A(args.n, [int(a) for a in args.A.split(",") if a.strip()], eps)
    elif args.search:
        part = search_min_partition(eps, args.n_max, strict=args.strict)
        if part is None:
            _emit(args, {"found": False, "n_max": args.n_max}, f"no partition with n <= {args.n_max}")
            return EXIT_FAIL
    else:
        n = min_valid_n(eps) if args.n is None else args.n
        part = make_partition(n, eps)
    rep = verify_partition(part, eps)
    data = {"A": list(part.A), "B_size": part.b, **rep.as_dict()}
    if args.A is None and not args.search:
        data["parameters"] = partition_parameters(part.n)
        data["min_valid_n"] = min_valid_n(eps)
    text = (f"n={part.n} eps={eps} #A={rep.card_A} A={list(part.A)}\n"
            f"(i) {rep.prop_i}  (ii) {rep.prop_ii}  (iii) {rep.prop_iii}  "
            f"structural={rep.structural} strict={rep.strict}")
    _emit(args, data, text)
    _write_csv(args.csv, ["i", "overlap", "bound_met"],
               [[i, c, i not in rep.prop_iii_failures] for i, c in rep.prop_iii_counts.items()])
    return EXIT_OK if rep.structural else EXIT_FAIL


def cmd_tower(args) -> int:
    tower = _tower(args)
    data = tower.as_dict()
    lines = [f"mode={tower.mode} depth={tower.depth} schedule={tower.schedule.as_dict()}"]
    for lvl in tower.levels:
        lines.append(f"  k={lvl.k} n={lvl.n} #A={len(lvl.A)} b={lvl.b} p={lvl.p} b'={lvl.b_prime} strict={lvl.strict}")
    lines += [f"  warning: {w}" for w in tower.schedule.warnings(tower.depth)]
    _emit(args, data, "\n".join(lines))
    _write_csv(args.csv, ["k", "n", "card_A", "b", "p", "b_prime", "strict"],
               [[l.k, l.n, len(l.A), l.b, l.p, l.b_prime, l.strict] for l in tower.levels])
    return EXIT_OK


def cmd_point_build(args) -> int:
    tower = _tower(args)
    p = _point(tower, args.root, args.shift)
    data = p.describe()
    if not p.is_star_point:
        data["r"] = list(p.rsequence().values)
    _emit(args, data, "\n".join(f"{k}: {v}" for k, v in data.items()))
    return EXIT_OK


def cmd_point_window(args) -> int:
    tower = _tower(args)
    p = _point(tower, args.root, args.shift)
    w = window(p, args.lo, args.hi)
    text = w.to_text()
    if args.output:
        Path(args.output).write_text(json.dumps(w.to_json()) if args.json else text)
        sys.stdout.write(f"wrote [{w.lo}, {w.hi}) to {args.output}\n")
    elif args.json:
        sys.stdout.write(json.dumps(w.to_json()) + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _read_window(path: str, roots: Sequence[str]) -> Window:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return Window.from_json(text)
    if not roots:
        raise ConfigError("text windows need --root for every root id they use")
    return Window.from_text(text, [BasePoint.parse(r) for r in roots])


def cmd_decode(args) -> int:
    tower = _tower(args)
    w = _read_window(args.window, args.root or [])
    K = tower.depth if args.level is None else args.level
    res = decode_r(w, tower, K)
    data = {"status": res.status, "r": list(res.r.values) if res.r else None,
            "candidates": res.candidates, "level": res.level}
    _emit(args, data, f"{res.status}: r={data['r']}" + (f" candidates={res.candidates} at level {res.level}"
                                                        if res.status != "unique" else ""))
    return EXIT_OK if res.status == "unique" else EXIT_FAIL


def cmd_analyze_pair(args) -> int:
    tower = _tower(args)
    x = _point(tower, args.x_root, args.x_shift)
    y = _point(tower, args.y_root or args.x_root if not args.y_star else "*", args.y_shift)
    rep = classify_pair(x, y, args.lo, args.hi, delta=args.delta, N=args.N, min_hits=args.min_hits)
    data = rep.as_dict()
    certs = []
    try:
        certs = separation_blocks(x, y, args.level, args.lo, args.hi)
    except ValueError as exc:
        data["blocks_note"] = str(exc)
    data["blocks"] = [c.row() for c in certs]
    ok = all(c.passed for c in certs if c.asserted)
    text = (f"verdict={rep.verdict} range=[{args.lo}, {args.hi}) n+={rep.proximal_plus} n-={rep.proximal_minus}\n"
            f"separations left={rep.separations_left} right={rep.separations_right}; "
            f"level-{args.level} blocks={len(certs)} all>=bound={ok}")
    _emit(args, data, text)
    _write_csv(args.csv, ["level", "block_start", "star_count", "separation_count", "bound", "pass"],
               [list(c.row().values()) for c in certs])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_analyze_entropy(args) -> int:
    tower = _tower(args)
    base = tower.base.base
    h = math.log(count_words(base, args.n)) / args.n
    est = entropy_estimate(base, 1, min(args.n, 16)) if args.ratios else None
    rows, ok = [], True
    for K in range(tower.depth + 1):
        eb = entropy_lower_bound(tower, K, h)
        ok &= eb.passed or not eb.asserted
        rows.append([K, str(eb.ratio), str(eb.product), eb.measured, eb.bound, eb.passed])
    data = {"base": base.name, "n": args.n, "h_base": h,
            "levels": [dict(zip(["K", "ratio", "product", "measured", "bound", "pass"], r)) for r in rows]}
    if est:
        data["ratios"] = est.ratios
    text = [f"h_base({base.name}) ~ {h:.6f} (log #words / {args.n})"]
    text += [f"  K={r[0]} #J/p={r[1]} prod={r[2]} measured={r[3]:.6f} bound={r[4]:.6f} pass={r[5]}" for r in rows]
    _emit(args, data, "\n".join(text))
    _write_csv(args.csv, ["K", "ratio", "product", "measured", "bound", "pass"], rows)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_analyze_orbit(args) -> int:
    tower = _tower(args)
    x = _point(tower, args.root, args.shift)
    mp = compute_mprime(x, args.m, tower.depth)
    k = tower.depth if args.level is None else args.level
    rep = check_orbit_window(x, mp.m_prime, k)
    same = x.symbol_at(mp.m_prime) == x.symbol_at(args.m)
    data = {"m": args.m, "S": mp.S, "digits": list(mp.digits), "iprime": list(mp.iprime),
            "m_prime": mp.m_prime, "coordinate_equal": same, "level": k, "alpha": rep.alpha,
            "N": rep.N, "checked": rep.checked, "failures": rep.failures[:20], "pass": rep.passed and same}
    text = (f"m={args.m} S={mp.S} m'={mp.m_prime} x_m == x_m': {same}\n"
            f"level {k}: alpha={rep.alpha} N={rep.N} checked={rep.checked} failures={len(rep.failures)}")
    _emit(args, data, text)
    return EXIT_OK if data["pass"] else EXIT_FAIL


def cmd_suite(args) -> int:
    cfg = _config(args)
    if args.json:
        cfg.json_report = args.json
    if args.csv:
        cfg.csv_report = args.csv
    res = run_suite(cfg)
    if res.exit_code == EXIT_CONFIG:
        sys.stderr.write(f"config error: {res.error}\n")
        return EXIT_CONFIG
    for c in res.checks:
        flag = "PASS" if c.passed else ("FAIL" if c.asserted else "note")
        sys.stdout.write(f"{flag:4} {c.name}: bound={c.bound} measured={c.measured}\n")
    if res.error:
        sys.stderr.write(f"error: {res.error}\n")
    if not cfg.json_report and args.print_report:
        sys.stdout.write(report_json(res.report))
    sys.stdout.write(f"{len(res.checks) - len(res.failures)}/{len(res.checks)} checks ok; exit {res.exit_code}\n")
    return res.exit_code


# -------------------------------------------------------------------- parser


def _tower_opts(p: argparse.ArgumentParser):
    g = p.add_argument_group("tower")
    g.add_argument("--config", help="key-value config file")
    g.add_argument("--base", help="builtin system (full2, full3, golden, fixed) or SFT file")
    g.add_argument("--mode", choices=["strict", "toy"])
    g.add_argument("--depth", type=int)
    g.add_argument("--toy-levels", dest="toy_levels", help='JSON list of {"n": .., "A": [..]}')
    g.add_argument("--eps", help="explicit schedule, comma separated rationals")
    g.add_argument("--eps-num", dest="eps_num", type=int)
    g.add_argument("--eps-den-base", dest="eps_den_base", type=int)
    g.add_argument("--eps-shift", dest="eps_shift", type=int)
    g.add_argument("--seed", type=int)


def _out_opts(p: argparse.ArgumentParser):
    p.add_argument("--json", action="store_true", help="print JSON instead of text")
    p.add_argument("--csv", metavar="PATH", help="also write a CSV table")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="proxshift", description="Proximal-pair subshift construction toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="build or check a partition of {0..n-1}")
    p.add_argument("--eps", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--A", help="comma separated A to verify instead of the explicit construction")
    p.add_argument("--search", action="store_true", help="exhaustive search for the smallest n")
    p.add_argument("--n-max", dest="n_max", type=int, default=24)
    p.add_argument("--strict", action="store_true", help="search requires property (iii) as well")
    _out_opts(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("tower", help="build a tower and print its levels")
    _tower_opts(p)
    _out_opts(p)
    p.set_defaults(func=cmd_tower)

    pt = sub.add_parser("point", help="constructed points").add_subparsers(dest="point_command", required=True)
    for name, func in (("build", cmd_point_build), ("window", cmd_point_window), ("decode", cmd_decode)):
        p = pt.add_parser(name)
        _tower_opts(p)
        p.add_argument("--json", action="store_true")
        if name == "decode":
            p.add_argument("window", help="window file (text or JSON)")
            p.add_argument("--root", action="append", help="root for text windows, in id order")
            p.add_argument("--level", type=int)
        else:
            p.add_argument("--root", help='"left=.. core=.. right=.. offset=.." or * for the all-star point')
            p.add_argument("--shift", type=int, default=0)
        if name == "window":
            p.add_argument("--lo", type=int, required=True)
            p.add_argument("--hi", type=int, required=True)
            p.add_argument("-o", "--output")
        p.set_defaults(func=func)

    p = sub.add_parser("decode", help="recover the phase sequence of a window")
    _tower_opts(p)
    p.add_argument("window")
    p.add_argument("--root", action="append")
    p.add_argument("--level", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_decode)

    an = sub.add_parser("analyze", help="pair, entropy and orbit certificates").add_subparsers(
        dest="analyze_command", required=True)
    p = an.add_parser("pair")
    _tower_opts(p)
    _out_opts(p)
    p.add_argument("--x-root", dest="x_root", required=True)
    p.add_argument("--x-shift", dest="x_shift", type=int, default=0)
    p.add_argument("--y-root", dest="y_root")
    p.add_argument("--y-shift", dest="y_shift", type=int, default=1)
    p.add_argument("--y-star", dest="y_star", action="store_true", help="compare with the all-star point")
    p.add_argument("--lo", type=int, required=True)
    p.add_argument("--hi", type=int, required=True)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--delta", type=float, default=2.0)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--min-hits", dest="min_hits", type=int, default=1)
    p.set_defaults(func=cmd_analyze_pair)

    p = an.add_parser("entropy")
    _tower_opts(p)
    _out_opts(p)
    p.add_argument("--n", type=int, default=20, help="word length for the base estimate")
    p.add_argument("--ratios", action="store_true", help="include log(count)/n for n up to 16")
    p.set_defaults(func=cmd_analyze_entropy)

    p = an.add_parser("orbit")
    _tower_opts(p)
    p.add_argument("--json", action="store_true")
    p.add_argument("--root", required=True)
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--level", type=int)
    p.set_defaults(func=cmd_analyze_orbit)

    p = sub.add_parser("suite", help="run the full experiment and write reports")
    _tower_opts(p)
    p.add_argument("--json", metavar="PATH", help="JSON report path")
    p.add_argument("--csv", metavar="PATH", help="CSV report path")
    p.add_argument("--print-report", action="store_true", help="print the JSON report when no path is set")
    p.set_defaults(func=cmd_suite)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, TowerError, DepthError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
