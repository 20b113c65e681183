"""Command-line front end.

Subcommands: cf, ostrowski, scan, cotangent, limitfn, verify, figures,
calibrate.  Machine output is JSON with hex-float reals or CSV for plotting;
every subcommand is deterministic given its flags and fixtures.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__, calibration, serialize
from .cf import PrecisionConfig, build_table, parse_alpha
from .cotangent import v_k, v_k_main_term, v_k_star
from .errors import SudlerError
from .limitfn import crossing_abscissa, empirical_limit, g_alpha, g_alpha_r
from .ostrowski import decode, encode, epsilon_profile
from .products import decompose, scan
from .theorems import (
    PredictionReport,
    bernoulli_b2_closed_forms,
    bernoulli_b2_integrals,
    lcnorm_prediction,
    pnstar_prediction,
    theorem1_check,
    vol41,
)

SUITES = ("constants", "decomp", "theorem1", "theorem2", "theorem3", "limits")


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("grid must be lo:hi:step")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise ValueError("grid requires step > 0 and hi >= lo")
    # Inclusive of lo; the step/2 guard keeps hi itself despite rounding.
    return np.arange(lo, hi + step / 2.0, step)


def _default_bits() -> int:
    return int(os.environ.get("SUDLER_BITS", "256"))


def _add_common(sub, alpha_default=None):
    sub.add_argument("--alpha", default=alpha_default,
                     required=alpha_default is None, help="alpha specification")
    sub.add_argument("--bits", type=int, default=_default_bits(),
                     help="working precision in bits (env SUDLER_BITS)")


def _table(args, K):
    cfg = PrecisionConfig(working_bits=args.bits)
    return build_table(parse_alpha(args.alpha), K, cfg)


def cmd_cf(args) -> int:
    table = _table(args, args.K)
    doc = serialize.table_to_dict(table)
    if args.out:
        serialize.dump_json(doc, args.out)
    print(f"alpha={table.alpha.render()} K_max={table.K_max} "
          f"q_K={table.q[table.K_max]} delta_K={float(table.delta[table.K_max]):.12g}")
    return 0


def cmd_ostrowski(args) -> int:
    table = _table(args, args.K)
    digits = encode(table, args.N, K=args.K)
    eps = epsilon_profile(digits)
    doc = {
        "schema_version": serialize.SCHEMA_VERSION,
        "alpha": table.alpha.render(),
        "N": str(args.N),
        "digits": digits.to_list(),
        "epsilon": {str(k): serialize.float_to_hex(float(v)) for k, v in eps.items()},
    }
    if args.out:
        serialize.dump_json(doc, args.out)
    print(f"N={args.N} digits={digits.to_list()} (decode={decode(digits)})")
    return 0


def cmd_scan(args) -> int:
    table = _table(args, args.K)
    c_list = tuple(float(c) for c in args.c.split(",")) if args.c else ()
    res = scan(table, args.K, c_list=c_list, parallelism=args.parallelism,
               top_m=args.top, budget=args.budget)
    if args.out:
        serialize.dump_json(serialize.scan_result_to_dict(res), args.out)
    digits = encode(table, res.argmax_N, K=args.K)
    print(f"q_K={res.q_K} argmax_N={res.argmax_N} digits={digits.to_list()} "
          f"max_log={res.max_log:.9f}")
    for c in sorted(res.sums):
        print(f"  c={c:g}: log sum = {res.sums[c]:.9f}")
    return 0


def cmd_cotangent(args) -> int:
    table = _table(args, max(args.k, 2))
    grid = args.grid_values
    rows = []
    for x in grid:
        val = (v_k_star(table, args.k, float(x)) if args.starred
               else v_k(table, args.k, float(x))).value
        main = v_k_main_term(table, args.k, float(x), starred=args.starred)
        rows.append((float(x), val, main, val - main))
    if args.out:
        serialize.write_csv(args.out, ["x", "direct", "main_term", "residual"], rows)
    worst = max(abs(r[3]) for r in rows)
    print(f"k={args.k} {'V*' if args.starred else 'V'}: {len(rows)} grid points, "
          f"max |residual|={worst:.3e}")
    return 0


def cmd_limitfn(args) -> int:
    table = _table(args, args.k)
    grid = args.grid_values
    emp = empirical_limit(table, args.k, grid, budget=args.budget)
    two_sin = np.abs(2.0 * np.sin(np.pi * grid))
    if args.closed_form:
        spec = table.alpha
        if spec.period is not None and len(spec.period) == 1 and not spec.preperiod:
            closed = g_alpha(spec.period[0], grid)
        elif spec.period is not None:
            p = len(spec.period)
            r = (args.k - len(spec.preperiod) - 1) % p + 1
            closed = g_alpha_r(spec, r, grid)
        else:
            raise SudlerError("--closed-form requires a periodic alpha")
    else:
        closed = np.full_like(grid, math.nan)
    rows = list(zip(map(float, grid), map(float, emp),
                    map(float, closed), map(float, two_sin)))
    if args.out:
        serialize.write_csv(args.out, ["x", "empirical", "closed_form", "two_sin"], rows)
    print(f"k={args.k} q_k={table.q[args.k]}: {len(rows)} points "
          f"max empirical={float(np.max(emp)):.6f}")
    return 0


def _figures_grid(args) -> np.ndarray:
    return args.grid_values if args.grid else _parse_grid("-1:1:0.005")


def cmd_figures(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    grid = _figures_grid(args)
    if args.which == "fig1":
        cols = {}
        for a in (5, 15, 50):
            table = build_table(f"[0;({a})]", 4)
            cols[a] = empirical_limit(table, 4, grid, budget=args.budget)
        two_sin = np.abs(2.0 * np.sin(np.pi * grid))
        rows = zip(map(float, grid), cols[5], cols[15], cols[50], two_sin)
        path = os.path.join(args.out, "fig1.csv")
        serialize.write_csv(path, ["x", "a5", "a15", "a50", "two_sin"], rows)
    elif args.which == "fig2":
        table = build_table("[0;(2,50)]", 5)
        k4 = empirical_limit(table, 4, grid, budget=args.budget)
        k5 = empirical_limit(table, 5, grid, budget=args.budget)
        two_sin = np.abs(2.0 * np.sin(np.pi * grid))
        path = os.path.join(args.out, "fig2.csv")
        serialize.write_csv(path, ["x", "k4", "k5", "two_sin"],
                            zip(map(float, grid), k4, k5, two_sin))
    else:
        table = build_table("[0;(15)]", 4)
        emp = empirical_limit(table, 4, grid, budget=args.budget)
        closed = g_alpha(15, grid)
        path = os.path.join(args.out, "fig3.csv")
        serialize.write_csv(path, ["x", "empirical", "closed_form", "residual"],
                            zip(map(float, grid), emp, closed, emp - closed))
    print(f"wrote {path}")
    return 0


def cmd_calibrate(args) -> int:
    path = args.out or calibration.default_fixture_path()
    calibration.calibrate(out_path=path)
    print(f"fixtures written to {path}")
    return 0


def _suite_constants(args, fixtures) -> list[PredictionReport]:
    v = vol41()
    twopi = 2.0 * math.pi
    n1, n2 = bernoulli_b2_integrals()
    c1, c2 = bernoulli_b2_closed_forms()
    return [
        PredictionReport.make("Vol(4_1)", 2.02988, v, 5e-6),
        PredictionReport.make("9 Vol / 25 pi", 0.23260748, 9 * v / (25 * math.pi), 1e-8),
        PredictionReport.make("Gamma(1/6) Gamma(5/6) = 2 pi", twopi,
                              math.gamma(1 / 6) * math.gamma(5 / 6), twopi * 1e-10),
        PredictionReport.make("B2 integral at 5/6", c1, n1, 1e-6),
        PredictionReport.make("B2 integral at 0", c2, n2, 1e-6),
    ]


def _suite_decomp(args, fixtures) -> list[PredictionReport]:
    K = min(args.K, 5)
    table = _table(args, K)
    worst = 0.0
    res = scan(table, K, keep_values=True)
    for N in range(res.q_K):
        digits = encode(table, N, K=K)
        total = decompose(table, digits).total
        direct = float(res.values[N])
        worst = max(worst, abs(total - direct) / (1.0 + abs(direct)))
    return [PredictionReport.make(f"decomposition identity N<q_{K}", 0.0, worst, 1e-9)]


def _suite_theorem1(args, fixtures) -> list[PredictionReport]:
    table = _table(args, args.K + 1)
    q_K = int(table.q[args.K])
    if q_K <= 4096:
        sample = range(q_K)
    else:
        rng = np.random.default_rng(args.seed)
        sample = sorted(int(n) for n in rng.integers(0, q_K, size=512))
    return theorem1_check(table, args.K, args.T, sample, fixtures)


def _suite_theorem2(args, fixtures) -> list[PredictionReport]:
    table = _table(args, args.K + 1)
    cs = tuple(float(c) for c in args.c.split(",")) if args.c else (0.5, 2.0, 64.0)
    res = scan(table, args.K, c_list=cs)
    return [lcnorm_prediction(table, args.K, c, args.T, fixtures, scan_result=res)
            for c in cs]


def _suite_theorem3(args, fixtures) -> list[PredictionReport]:
    table = _table(args, args.K + 1)
    return [pnstar_prediction(table, args.K, args.T, fixtures)]


def _suite_limits(args, fixtures) -> list[PredictionReport]:
    grid = np.round(np.arange(-0.95, 0.9501, 0.01), 10)
    table15 = build_table("[0;(15)]", 4)
    sup = float(np.max(np.abs(
        empirical_limit(table15, 4, grid) - g_alpha(15, grid)
    )))
    reports = [PredictionReport.make(
        "a=15 k=4 curve vs closed form", 0.0, sup,
        fixtures["limit_curve"]["a15_k4_sup"],
    )]
    table250 = build_table("[0;(2,50)]", 5)
    cross_grid = np.round(np.arange(0.5, 1.0001, 0.005), 10)
    c4 = crossing_abscissa(cross_grid, empirical_limit(table250, 4, cross_grid))
    c5 = crossing_abscissa(cross_grid, empirical_limit(table250, 5, cross_grid))
    reports.append(PredictionReport.make("fig2 crossing k=4", 0.95, c4, 0.02))
    reports.append(PredictionReport.make("fig2 crossing k=5", 5.0 / 6.0, c5, 0.02))
    return reports


def cmd_verify(args) -> int:
    fixtures = calibration.load_fixtures(args.fixtures)
    suite_fn = {
        "constants": _suite_constants,
        "decomp": _suite_decomp,
        "theorem1": _suite_theorem1,
        "theorem2": _suite_theorem2,
        "theorem3": _suite_theorem3,
        "limits": _suite_limits,
    }[args.suite]
    reports = suite_fn(args, fixtures)
    ok = all(r.passed for r in reports)
    for r in reports:
        tag = "PASS" if r.passed else "FAIL"
        print(f"{r.label}: observed={r.observed:.9g} prediction={r.prediction:.9g} "
              f"budget={r.error_budget:.3g} {tag}")
    if args.out:
        serialize.dump_json({
            "schema_version": serialize.SCHEMA_VERSION,
            "suite": args.suite,
            "alpha": args.alpha,
            "K": args.K,
            "T": args.T,
            "pass": ok,
            "reports": [
                {k: (serialize.float_to_hex(v) if isinstance(v, float) else v)
                 for k, v in r.as_dict().items()}
                for r in reports
            ],
        }, args.out)
    print(f"suite {args.suite}: {'PASS' if ok else 'FAIL'} "
          f"({sum(r.passed for r in reports)}/{len(reports)})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sudler", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("cf", help="build and emit a convergent table")
    _add_common(s)
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_cf)

    s = sub.add_parser("ostrowski", help="digit expansion of N")
    _add_common(s)
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_ostrowski)

    s = sub.add_parser("scan", help="sweep N < q_K for max and c-norm sums")
    _add_common(s)
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--c", default="", help="comma-separated norm exponents")
    s.add_argument("--parallelism", type=int, default=1)
    s.add_argument("--top", type=int, default=32)
    s.add_argument("--budget", type=int, default=10 ** 7)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_scan)

    s = sub.add_parser("cotangent", help="sine-weighted cotangent sums on a grid")
    _add_common(s)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--grid", required=True)
    s.add_argument("--starred", action="store_true")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_cotangent)

    s = sub.add_parser("limitfn", help="empirical limit curve, optionally vs closed form")
    _add_common(s)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--grid", required=True)
    s.add_argument("--closed-form", action="store_true")
    s.add_argument("--budget", type=int, default=10 ** 7)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_limitfn)

    s = sub.add_parser("figures", help="CSV data behind the reference figures")
    s.add_argument("--which", choices=("fig1", "fig2", "fig3"), required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--grid", default=None)
    s.add_argument("--budget", type=int, default=10 ** 7)
    s.set_defaults(fn=cmd_figures)

    s = sub.add_parser("verify", help="run a verification suite against fixtures")
    _add_common(s, alpha_default="[0;(10)]")
    s.add_argument("--suite", choices=SUITES, required=True)
    s.add_argument("--K", type=int, default=3)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--c", default="")
    s.add_argument("--fixtures", default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("calibrate", help="recompute and freeze envelope constants")
    s.add_argument("--out", default=None)
    s.set_defaults(fn=cmd_calibrate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    # Let `--grid -1:1:0.005` parse even though the value starts with '-'.
    argv = list(argv)
    for i, tok in enumerate(argv[:-1]):
        if tok == "--grid" and argv[i + 1].startswith("-"):
            argv[i : i + 2] = [f"--grid={argv[i + 1]}"]
            break
    args = ap.parse_args(argv)
    for attr in ("grid",):
        if hasattr(args, attr) and getattr(args, attr):
            try:
                args.grid_values = _parse_grid(getattr(args, attr))
            except ValueError as exc:
                ap.error(str(exc))  # exits 2
    try:
        return args.fn(args)
    except SudlerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
