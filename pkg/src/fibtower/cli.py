"""Command-line entry point: ``fibtower <subcommand> [options]``.

Machine-readable output goes to stdout (or --output); diagnostics go to
stderr.  Exit codes: 0 ok, 1 a certificate failed, 2 precision exhausted,
64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import __version__
from .errors import DomainError, FibtowerError, PrecisionExhausted

SCHEMA = "fibtower-report/1"
EXIT_OK, EXIT_FAIL, EXIT_PRECISION, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def read_config(path: str) -> dict:
    """key = value lines; '#' starts a comment; quotes around values are dropped."""
    out = {}
    with open(path) as fh:
        for num, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line or line.startswith("["):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{num}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val.strip("'\"")
    return out


# ---------------------------------------------------------------------------
# helpers

def _iv(x, digits: int) -> dict:
    from .rigorous import enclosure_strings
    lo, hi = enclosure_strings(x, digits)
    return {"lo": lo, "hi": hi}


def _bits(args) -> int:
    if args.precision_bits in (None, "auto"):
        return 0
    try:
        b = int(args.precision_bits)
    except ValueError:
        raise UsageError("precision_bits must be an integer or 'auto'")
    if b < 16:
        raise UsageError("precision_bits must be >= 16")
    return b


def _system(args, n: int):
    from .tent import solve_parameter
    return solve_parameter(args.d, max(n, args.d + 1), _bits(args))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands; each returns (text, exit code)

def cmd_cutting_times(args):
    from .kneading import cutting_time
    rows = [(k, cutting_time(args.d, k)) for k in range(args.kmin, args.kmax + 1)]
    return _csv(["k", "S"], rows), EXIT_OK


def cmd_kneading(args):
    from .kneading import kneading_sequence
    return kneading_sequence(args.d, args.n) + "\n", EXIT_OK


def cmd_solve(args):
    sys_ = _system(args, args.n)
    from .tent import itinerary
    from .kneading import kneading_sequence
    n = min(args.n, 64)
    a = _iv(sys_.a, args.digits)
    return _json({"schema": SCHEMA, "d": args.d, "a_lo": a["lo"], "a_hi": a["hi"],
                  "prefix_len": sys_.solved_prefix_len, "bits": sys_.prec,
                  "guard": sys_.guard,
                  "itinerary_matches": itinerary(sys_, n) == kneading_sequence(args.d, n)}), EXIT_OK


def cmd_orbit(args):
    from .tent import itinerary, orbit_point
    sys_ = _system(args, args.n)
    symbols = itinerary(sys_, args.n)
    rows = []
    for n in range(1, args.n + 1):
        iv = _iv(orbit_point(sys_, n), args.digits)
        rows.append((n, iv["lo"], iv["hi"], symbols[n - 1]))
    return _csv(["n", "c_lo", "c_hi", "symbol"], rows), EXIT_OK


def cmd_cover(args):
    from .covers import build_cover, max_orbit_index
    sys_ = _system(args, max_orbit_index(args.d, args.k))
    cover = build_cover(sys_, args.k)
    towers = []
    for i, t in cover.towers.items():
        towers.append({"tower": i, "height": t.height, "floors": [
            {"n": n, "left_index": f.left, "right_index": f.right,
             "left": _iv(f.lo, args.digits), "right": _iv(f.hi, args.digits)}
            for n, f in enumerate(t.floors)]})
    return _json({"schema": SCHEMA, "d": args.d, "k": args.k,
                  "floor_count": cover.floor_count(), "towers": towers}), EXIT_OK


def _cover_report(d: int, kmax: int, bits: int):
    from .covers import max_orbit_index, verify_split_lemma, verify_theorem_1_1
    from .tent import solve_parameter
    sys_ = solve_parameter(d, max(max_orbit_index(d, kmax + 1), d + 1), bits)
    rep = verify_theorem_1_1(sys_, kmax)
    split = [verify_split_lemma(sys_, k) for k in range(0, kmax + 1)]
    return rep, split


def cmd_verify_cover(args):
    rep, split = _cover_report(args.d, args.kmax, _bits(args))
    ok = rep.passed and all(s["passed"] for s in split)
    return _json({"schema": SCHEMA, "d": args.d, "kmax": args.kmax, "passed": ok,
                  "checks": rep.checks, "split_lemma": split}), EXIT_OK if ok else EXIT_FAIL


def cmd_diagram(args):
    from .adic import build_diagram, to_dot
    diag = build_diagram(args.d, args.depth)
    if args.format == "dot":
        return to_dot(diag), EXIT_OK
    levels = [{"k": k, "vertices": diag.labels(k),
               "edges": [list(e) for e in diag.edges(k)] if k else []}
              for k in range(args.depth + 1)]
    return _json({"schema": SCHEMA, "d": args.d, "depth": args.depth,
                  "levels": levels}), EXIT_OK


def cmd_vershik(args):
    from .adic import AdicContext, build_diagram, eta, minimal_infinite_path, vershik_successor
    from .covers import max_orbit_index
    from .kneading import cutting_time
    d = args.d
    K = args.depth
    while cutting_time(d, K - d + 1) <= args.steps:
        K += 1
    sys_ = _system(args, max(max_orbit_index(d, args.depth), args.steps + 1))
    ctx = AdicContext(sys_, args.depth)
    diag = build_diagram(d, K)
    x = minimal_infinite_path(K)
    rows = []
    for n in range(args.steps + 1):
        if n:
            x = vershik_successor(diag, x)
        head = x.prefix[:args.depth + 1]
        f = ctx.project(head)
        iv = _iv(f.enclosure(), args.digits)
        rows.append((n, eta(d, head), head[-1], iv["lo"], iv["hi"]))
    return _csv(["n", "eta", "terminal_vertex", "floor_lo", "floor_hi"], rows), EXIT_OK


def cmd_measure(args):
    from .covers import tower_range
    from .measure import (floor_measure, measure_table, normalization_check,
                          perron_witness, tower_measure)
    d, k = args.d, args.k
    if k < d - 1:
        raise UsageError(f"k must be >= {d - 1}")
    t = measure_table(d)
    towers = []
    for i in tower_range(d, k):
        row = {"tower": i, "measure": _iv(tower_measure(t, k, i), args.digits)}
        if k >= 2 * d - 1:
            row["floor_measure"] = _iv(floor_measure(t, k, i), args.digits)
        towers.append(row)
    norm = normalization_check(t, k)
    return _json({"schema": SCHEMA, "d": d, "k": k, "beta": _iv(t.beta, args.digits),
                  "towers": towers, "total": _iv(norm["sum"], args.digits),
                  "normalized": norm["passed"], "perron_witness": perron_witness(t)}), EXIT_OK


def cmd_birkhoff(args):
    from .measure import birkhoff_table
    sys_ = _system(args, args.iters + 1)
    rows = []
    for r in birkhoff_table(sys_, args.k, args.iters):
        rows.append((r.tower, f"{float(r.frequency):.6f}", f"{float(r.expected.mid()):.6f}",
                     f"{r.relative_error:.6f}", r.unresolved))
        _note(f"tower {r.tower}: {r.ambiguous} enclosure overlaps settled by itineraries")
    return _csv(["i", "empirical", "expected", "relative_error", "ambiguous_count"],
                rows), EXIT_OK


def _alphas(text: str):
    try:
        out = tuple(Fraction(s.strip()) for s in text.split(",") if s.strip())
    except ValueError:
        raise UsageError(f"bad alpha list {text!r}")
    if not out or any(a < 0 for a in out):
        raise UsageError("alpha values must be non-negative")
    return out


def cmd_dimension(args):
    from .dimension import dimension_series, dimension_system
    from .rigorous import decimal_string
    alphas = _alphas(args.alpha)
    sys_ = dimension_system(args.d, args.kmax)
    ser = dimension_series(sys_, args.kmax, alphas, direct_kmax=args.direct_kmax)
    dg = args.digits
    mid = lambda x: "" if x is None else decimal_string(x.mid(), dg)
    header = ["k", "D_len", "delta_direct", "delta_formula", "P_k"] + \
        [f"hsum_{float(a):g}" for a in alphas]
    rows = []
    for r in ser.rows:
        rows.append([r["k"], mid(r["D"]), mid(r["direct"]), mid(r["formula"]), mid(r["P"])]
                    + [mid(r["hsum"][a]) for a in alphas])
    _note(f"delta threshold {ser.delta_threshold}; hsum k0 "
          f"{ {str(a): k for a, k in ser.hsum_k0.items()} }; P_k Cauchy from {ser.product_k0}")
    return _csv(header, rows), EXIT_OK


def cmd_recurrence(args):
    from .dimension import dimension_system, recurrence_exponent
    sys_ = dimension_system(args.d, args.kmax)
    rows = [(r["k"], r["S"], f"{r['exponent']:.12g}") for r in recurrence_exponent(sys_, args.kmax)]
    return _csv(["k", "S", "exponent"], rows), EXIT_OK


def run_verify_all(d: int, kmax: int, bits: int = 0, digits: int = 20) -> tuple[dict, int]:
    """Every certificate at (d, kmax); returns the report and the exit code."""
    from .adic import verify_semiconjugacy
    from .covers import max_orbit_index
    from .dimension import dimension_series, dimension_system
    from .measure import measure_table, normalization_check, perron_witness
    from .tent import solve_parameter

    stages = []
    stage = "cover"
    try:
        rep, split = _cover_report(d, kmax, bits)
        stages.append({"stage": "theorem_1_1", "params": {"d": d, "kmax": kmax},
                       "passed": rep.passed, "failures": rep.failures(),
                       "not_applicable": [c["k"] for c in rep.checks
                                          if c["status"] == "not applicable"]})
        stages.append({"stage": "split_lemma", "params": {"d": d, "kmax": kmax},
                       "passed": all(s["passed"] for s in split)})
        stage = "semiconjugacy"
        depth = max(kmax, d)
        n_max = min(2000, cutting_time_safe(d, depth) * 4)
        sys_ = solve_parameter(d, max(max_orbit_index(d, depth), n_max + 1, d + 1), bits)
        sc = verify_semiconjugacy(sys_, depth, n_max)
        stages.append({"stage": "semiconjugacy", "params": {"depth": depth, "n_max": n_max},
                       "passed": sc["passed"], "failures": sc["failures"]})
        stage = "measure"
        t = measure_table(d)
        norms = [normalization_check(t, k) for k in range(d - 1, kmax + 1)]
        stages.append({"stage": "measure_normalization",
                       "params": {"k_range": [d - 1, kmax]},
                       "passed": all(n["passed"] for n in norms) and perron_witness(t)})
        stage = "dimension"
        dsys = dimension_system(d, kmax)
        ser = dimension_series(dsys, kmax, direct_kmax=min(kmax, 12))
        positive = all(r["P"].positive() for r in ser.rows if r["P"] is not None)
        stages.append({"stage": "dimension", "params": {"kmax": kmax},
                       "passed": positive and ser.delta_threshold is not None,
                       "delta_threshold": ser.delta_threshold,
                       "hsum_k0": {str(a): k for a, k in ser.hsum_k0.items()},
                       "product_k0": ser.product_k0})
    except PrecisionExhausted as exc:
        report = {"schema": SCHEMA, "version": __version__, "d": d, "kmax": kmax,
                  "passed": False, "stages": stages,
                  "error": {"stage": stage, "kind": "precision_exhausted", "message": str(exc)}}
        return report, EXIT_PRECISION
    ok = all(s["passed"] for s in stages)
    report = {"schema": SCHEMA, "version": __version__, "d": d, "kmax": kmax,
              "passed": ok, "stages": stages}
    return report, EXIT_OK if ok else EXIT_FAIL


def cutting_time_safe(d: int, k: int) -> int:
    from .kneading import cutting_time
    return cutting_time(d, k)


def cmd_verify_all(args):
    report, code = run_verify_all(args.d, args.kmax, _bits(args), args.digits)
    return _json(report), code


# ---------------------------------------------------------------------------
# parser

def _positive(name: str, least: int):
    def conv(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer")
        if v < least:
            raise argparse.ArgumentTypeError(f"{name} must be >= {least}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--d", type=_positive("d", 2), default=2)
    common.add_argument("--precision-bits", "--bits", dest="precision_bits", default="auto",
                        help="integer or 'auto'")
    common.add_argument("--digits", type=_positive("digits", 1), default=20)
    common.add_argument("--output", "-o", help="write to this file instead of stdout")

    p = _Parser(prog="fibtower", description="Fibonacci-like unimodal maps: "
                "combinatorics, covers, adic model, measure and dimension.")
    p.add_argument("--version", action="version", version=f"fibtower {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("cutting-times", cmd_cutting_times, "CSV of S_d(k)")
    sp.add_argument("--kmin", type=int, default=0)
    sp.add_argument("--kmax", type=_positive("kmax", 0), default=20)
    sp = add("kneading", cmd_kneading, "kneading sequence prefix")
    sp.add_argument("--n", type=_positive("n", 1), default=21)
    sp = add("solve", cmd_solve, "certified enclosure of a_d")
    sp.add_argument("--prefix", "--n", dest="n", type=_positive("prefix", 1), default=64)
    sp = add("orbit", cmd_orbit, "critical orbit enclosures")
    sp.add_argument("--n", type=_positive("n", 1), default=20)
    sp = add("cover", cmd_cover, "towers of the level-k cover")
    sp.add_argument("--k", type=_positive("k", 0), default=5)
    sp = add("verify-cover", cmd_verify_cover, "certify the cover properties")
    sp.add_argument("--kmax", type=_positive("kmax", 0), default=8)
    sp = add("diagram", cmd_diagram, "the ordered Bratteli diagram")
    sp.add_argument("--depth", type=_positive("depth", 1), default=6)
    sp.add_argument("--format", choices=["dot", "json"], default="dot")
    sp = add("vershik", cmd_vershik, "Vershik orbit of x_min and its projection")
    sp.add_argument("--depth", type=_positive("depth", 1), default=8)
    sp.add_argument("--steps", type=_positive("steps", 0), default=50)
    sp = add("measure", cmd_measure, "tower and floor measures")
    sp.add_argument("--k", type=_positive("k", 1), default=5)
    sp = add("birkhoff", cmd_birkhoff, "visit frequencies of the critical orbit")
    sp.add_argument("--k", type=_positive("k", 1), default=4)
    sp.add_argument("--iters", type=_positive("iters", 1), default=10000)
    sp = add("dimension", cmd_dimension, "lengths, diameters and Hausdorff sums")
    sp.add_argument("--kmax", type=_positive("kmax", 2), default=20)
    sp.add_argument("--alpha", default="0.2,0.1,0.05")
    sp.add_argument("--direct-kmax", dest="direct_kmax", type=int, default=12)
    sp = add("recurrence", cmd_recurrence, "recurrence exponent estimates")
    sp.add_argument("--kmax", type=_positive("kmax", 1), default=20)
    sp = add("verify-all", cmd_verify_all, "run every certificate")
    sp.add_argument("--kmax", type=_positive("kmax", 1), default=10)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        conf = read_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}")
    # re-parse with config values as defaults so explicit flags still win
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = sorted(set(conf) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    typed = {}
    for a in sub._actions:
        if a.dest in conf:
            typed[a.dest] = a.type(conf[a.dest]) if a.type else conf[a.dest]
    sub.set_defaults(**typed)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = _apply_config(parser, argv)
        text, code = args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, argparse.ArgumentTypeError) as exc:
        print(f"fibtower: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"fibtower: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecisionExhausted as exc:
        print(f"fibtower: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except FibtowerError as exc:
        print(f"fibtower: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
