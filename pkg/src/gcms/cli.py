"""Command-line front end.

Subcommands emit tables (CSV) or reports (JSON); figures are always data
files for external plotting.  Identical invocations produce byte-identical
output; grid cells may be evaluated by worker threads (capped by the
GCMS_THREADS environment variable) but are always assembled in grid order.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

from . import measures as ms
from . import thermo as th
from . import verification as vf
from .cylinders import Cyl, decompose, intersect_many, parse_expression
from .matrices import TransitionMatrix, from_dict, from_json
from .words import format_word

LOG2 = math.log(2.0)
PAIR_CRITICAL = math.log(1.0 + math.sqrt(2.0))


def _fmt(x: float) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _grid(spec: str) -> list[float]:
    """Parse ``start:stop:step`` or a comma list into a non-empty float grid."""
    if ":" in spec:
        start, stop, step = (float(p) for p in spec.split(":"))
        if step <= 0:
            raise SystemExit("grid step must be positive")
        out = []
        v = start
        while v <= stop + 1e-12:
            out.append(round(v, 12))
            v += step
    else:
        out = [float(p) for p in spec.split(",") if p.strip()]
    if not out:
        raise SystemExit("empty beta grid")
    return out


def _load_matrix(args: argparse.Namespace) -> TransitionMatrix:
    if getattr(args, "matrix_file", None):
        with open(args.matrix_file, "r", encoding="utf-8") as fh:
            return from_json(fh.read())
    if not getattr(args, "kind", None):
        raise SystemExit("either --kind or --matrix-file is required")
    d = {"kind": args.kind}
    if args.kind == "prime_renewal":
        d["prime_bound"] = getattr(args, "prime_bound", 7)
    return from_dict(d)


def _emit(args: argparse.Namespace, header: Sequence[str], rows: Iterable[Sequence],
          json_payload: dict | None = None) -> None:
    if args.format == "json":
        payload = json_payload if json_payload is not None else {
            "header": list(header),
            "rows": [[_fmt(v) for v in row] for row in rows],
        }
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _thread_map(fn: Callable, items: Sequence) -> list:
    workers = int(os.environ.get("GCMS_THREADS", "1") or "1")
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _potential(name: str) -> th.Potential:
    if name in ("const", "constant", "one"):
        return th.Constant(1.0)
    if name in ("log", "log_ratio"):
        return th.LogRatio()
    raise SystemExit(f"unknown potential {name!r} (use 'const' or 'log')")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_count(args: argparse.Namespace) -> int:
    A = _load_matrix(args)
    families = ([args.family] if args.family else
                [c.id for c in A.accumulation_catalog])
    rows = []
    all_match = True
    for fam in families:
        for r in vf.counting_suite(A, fam, args.n):
            rows.append((fam, r.n, r.enumerated, r.closed_form, "ok" if r.match else "MISMATCH"))
            all_match &= r.match
    _emit(args, ["family", "n", "enumerated", "closed_form", "match"], rows)
    return 0 if all_match else 1


def _phase_row(A: TransitionMatrix, potential: th.Potential, beta: float,
               tol: float) -> tuple:
    if isinstance(potential, th.Constant):
        y_exists: str
        sigma: str
        if A.kind == "renewal":
            y_exists = "1 measure" if beta > LOG2 else "absent"
            sigma = "1 measure" if abs(beta - LOG2) <= tol else "absent"
            crit = LOG2
        elif A.kind == "pair_renewal":
            y_exists = "2 extremal" if beta > PAIR_CRITICAL else "absent"
            sigma = "1 measure" if abs(beta - PAIR_CRITICAL) <= tol else "absent"
            crit = PAIR_CRITICAL
        elif A.kind == "prime_renewal":
            if beta > math.log(3.0):
                y_exists = "1 per family (countably many)"
            elif beta <= LOG2:
                y_exists = "absent"
            else:
                y_exists = "inconclusive"
            sigma = "not classified"
            crit = math.log(3.0)
        else:
            raise SystemExit(f"no phase table for kind {A.kind}")
        return (beta, y_exists, sigma, crit)
    # log-ratio potential: the renewal eigenmeasure switches support
    if A.kind != "renewal":
        raise SystemExit("the log-ratio phase table is specific to --kind renewal")
    bc = th.beta_c_log()
    support = "boundary family" if beta > bc else "sequence space"
    return (beta, support, "1 eigenmeasure for every beta", bc)


def cmd_phase(args: argparse.Namespace) -> int:
    A = _load_matrix(args)
    potential = _potential(args.potential)
    grid = _grid(args.beta_grid)
    rows = _thread_map(lambda b: _phase_row(A, potential, b, args.tol), grid)
    if isinstance(potential, th.Constant):
        header = ["beta", "boundary_measures", "sequence_measures", "critical_beta"]
    else:
        header = ["beta", "support", "existence", "critical_beta"]
    _emit(args, header, rows)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    A = _load_matrix(args)
    report: dict = {"kind": A.kind, "suite": args.suite}
    ok = True
    if args.suite == "cylinders":
        rep = vf.cylinder_oracle(A)
        report.update({"elements": rep.n_elems, "pairs": rep.n_pairs,
                       "configs": rep.n_configs, "mismatches": rep.mismatches,
                       "seconds": round(rep.seconds, 3)})
        report["whole_space_cover"] = vf.whole_space_cover_check(A)
        ok = rep.ok and report["whole_space_cover"]
    elif args.suite == "conformality":
        resid = vf.conformality_suite(A, args.beta)
        report["max_residuals"] = resid
        ok = all(v <= args.tol for v in resid.values())
    elif args.suite == "pressure":
        resid = vf.pressure_suite(A, args.beta)
        report["residuals"] = resid
        ok = all(v <= args.tol for v in resid.values())
    elif args.suite == "counting":
        fams = [c.id for c in A.accumulation_catalog]
        mismatch = [f for f in fams
                    if not all(r.match for r in vf.counting_suite(A, f, 10))]
        report["families_checked"] = fams
        report["families_mismatching"] = mismatch
        ok = not mismatch
    else:
        raise SystemExit(f"unknown suite {args.suite!r}")
    report["ok"] = ok
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def _converge_models(A: TransitionMatrix, potential: th.Potential):
    if isinstance(potential, th.Constant):
        if A.kind == "renewal":
            target = ms.sarig_measure_renewal(A)
            return LOG2, (lambda b: ms.y_measure(A, 1, potential, b)), target
        if A.kind == "pair_renewal":
            target = ms.pair_renewal_critical_measure(A)
            return PAIR_CRITICAL, (lambda b: ms.y_measure(A, 1, potential, b)), target
        raise SystemExit(f"no convergence construction for kind {A.kind}")
    bc = th.beta_c_log()
    return bc, (lambda b: ms.log_eigenmeasure(b, A)), ms.log_eigenmeasure(bc, A)


def cmd_converge(args: argparse.Namespace) -> int:
    A = _load_matrix(args)
    potential = _potential(args.potential)
    beta_c, model_of, target = _converge_models(A, potential)
    offsets = [float(x) for x in args.approach.split(",")]
    basis = [(format_word(w), decompose(Cyl(A, w)))
             for w in vf.cylinder_words_up_to(A, args.depth, args.symbol_bound)]
    rows = []
    for off in offsets:
        b = beta_c + off
        mb = model_of(b)
        for set_id, expr in basis:
            val = ms.measure_setexpr(mb, expr)
            tgt = ms.measure_setexpr(target, expr)
            rows.append((b, set_id, val, tgt, abs(val - tgt)))
    _emit(args, ["beta", "set", "value", "target", "abs_diff"], rows)
    return 0


def cmd_measure(args: argparse.Namespace) -> int:
    A = _load_matrix(args)
    name = args.measure
    if name == "y":
        m = ms.y_measure(A, args.family, _potential(args.potential), args.beta,
                         length_cap=args.length_cap)
    elif name == "sarig":
        m = ms.sarig_measure_renewal(A)
    elif name == "pair_critical":
        m = ms.pair_renewal_critical_measure(A)
    elif name == "log":
        m = ms.log_eigenmeasure(args.beta, A)
    else:
        raise SystemExit(f"unknown measure {name!r}")
    cyls = vf.cylinder_words_up_to(A, min(args.depth, 6), args.symbol_bound)
    if name == "sarig":
        rep = ms.verify_conformality(m, cyls, weight=th.Constant(-1.0), beta=args.beta,
                                     lam=2.0 * math.exp(-args.beta))
    else:
        rep = ms.verify_conformality(m, cyls)
    text = ms.measure_report_json(m, rep.max_residual) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_decompose(args: argparse.Namespace) -> int:
    A = _load_matrix(args)
    elems = parse_expression(A, args.expr)
    expr = intersect_many(elems)
    payload = {
        "expression": args.expr,
        "whole_space": expr.whole_space,
        "empty": expr.is_empty,
        "points": [f"stem={format_word(p.stem)};root={p.root.id}" for p in expr.points],
        "cylinders": [format_word(a) for a in expr.atoms],
        "families": [f"prefix={format_word(f.prefix)};symbols={_family_desc(f)}"
                     for f in expr.families],
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _family_desc(f) -> str:
    from . import symbolsets as sset
    return sset.describe(f.symbols)


def cmd_pressure(args: argparse.Namespace) -> int:
    A = _load_matrix(args)
    potential = _potential(args.potential)
    grid = _grid(args.beta_grid)

    def rows_for(beta: float) -> list[tuple]:
        est = th.gurevich_pressure(A, potential if not isinstance(potential, th.Constant)
                                   else th.Constant(-1.0), beta, 1, args.n_max)
        return [(beta, n, v, est.extrapolated, est.certificate) for n, v in est.values]

    blocks = _thread_map(rows_for, grid)
    rows = [row for block in blocks for row in block]
    _emit(args, ["beta", "n", "log_Zn_over_n", "extrapolated", "certificate"], rows)
    return 0


# --------------------------------------------------------------------------
# argument wiring
# --------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=["renewal", "pair_renewal", "prime_renewal",
                                      "alternating_renewal", "full_shift", "explicit"])
    p.add_argument("--matrix-file", help="JSON matrix specification file")
    p.add_argument("--prime-bound", type=int, default=7)
    p.add_argument("--beta", type=float, default=1.2)
    p.add_argument("--beta-grid", default="1.0:2.0:0.25",
                   help="start:stop:step or comma-separated values")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--symbol-bound", type=int, default=6)
    p.add_argument("--length-cap", type=int, default=400)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcms",
        description="thermodynamic formalism on generalized countable Markov shifts")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="generation counts against closed forms")
    _add_common(p)
    p.add_argument("--family", type=int)
    p.add_argument("--n", type=int, default=8)
    p.set_defaults(fn=cmd_count)

    p = sub.add_parser("phase", help="existence table over a beta grid")
    _add_common(p)
    p.add_argument("--potential", default="const")
    p.set_defaults(fn=cmd_phase)

    p = sub.add_parser("verify", help="run a verification suite")
    _add_common(p)
    p.add_argument("--suite", required=True,
                   choices=["cylinders", "conformality", "pressure", "counting"])
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("converge", help="measure convergence toward the critical point")
    _add_common(p)
    p.add_argument("--potential", default="const")
    p.add_argument("--approach", default="1e-1,1e-2,1e-3,1e-4,1e-5",
                   help="comma-separated offsets above the critical beta")
    p.set_defaults(fn=cmd_converge)

    p = sub.add_parser("measure", help="construct a measure and report it")
    _add_common(p)
    p.add_argument("--measure", required=True, choices=["y", "sarig", "pair_critical", "log"])
    p.add_argument("--family", type=int, default=1)
    p.add_argument("--potential", default="const")
    p.set_defaults(fn=cmd_measure)

    p = sub.add_parser("decompose", help="normalize a cylinder expression")
    _add_common(p)
    p.add_argument("--expr", required=True,
                   help="e.g. 'C[3.2.1] & !C[2.1;inv=3]'")
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("pressure", help="partition-function pressure sweep (CSV)")
    _add_common(p)
    p.add_argument("--potential", default="const")
    p.add_argument("--n-max", type=int, default=10)
    p.set_defaults(fn=cmd_pressure)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
