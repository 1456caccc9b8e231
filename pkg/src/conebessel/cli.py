"""Command-line front end.

Subcommands map one-to-one onto the library: series solutions (eval-j),
the K combinations (eval-k-series), the Monte Carlo cone integral
(eval-k-mc), the combination coefficient tables (coeffs), and the
self-verification registry (verify).

Exit codes: 0 success, 1 computation failed (divergence, domain, poles),
2 usage error, 3 one or more verification checks failed.
"""

import argparse
import json
import os
import sys

from . import algebra as alg
from . import cone_integral as ci
from . import series as se
from . import verify as vf
from .errors import ConeBesselError, UsageError


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}")


def _default_seed():
    raw = os.environ.get("CONEBESSEL_SEED")
    if raw is None:
        return vf.DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CONEBESSEL_SEED must be an integer, got {raw!r}")


def _emit(args, payload, human_lines):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for line in human_lines:
            print(line)


def _point_args(p, rank_choices):
    p.add_argument("--rank", type=int, choices=rank_choices, required=True)
    p.add_argument("--nu", type=float, required=True, help="series order")
    p.add_argument("--d", type=float, required=True, help="Peirce multiplicity")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--t", type=str, help="symmetric-function coordinates t1,t2[,t3]")
    g.add_argument("--x", type=str, help="eigenvalues x1,x2[,x3] (converted to t)")
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--max-degree", type=int, default=200)


def _resolve_point(args):
    if args.t is not None:
        t = _floats(args.t)
    else:
        t = se.elem_sym(_floats(args.x)).t
    if len(t) != args.rank:
        raise UsageError(f"rank {args.rank} needs {args.rank} coordinates, got {len(t)}")
    return t


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="conebessel",
        description="Bessel-type series and cone integrals on rank 1-3 symmetric cones")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    pj = sub.add_parser("eval-j", help="one series solution of the differential system")
    _point_args(pj, (2, 3))
    pj.add_argument("--j", type=int, required=True, help="solution index (1..rank+1)")
    pj.add_argument("--partner", action="store_true",
                    help="the t_r^(-nu)-twisted companion of order -nu")
    pj.add_argument("--variant", choices=("alternating", "positive"),
                    default="alternating")

    pk = sub.add_parser("eval-k-series", help="the K combination of all series solutions")
    _point_args(pk, (2, 3))

    pm = sub.add_parser("eval-k-mc", help="Monte Carlo cone integral for K")
    pm.add_argument("--rank", type=int, choices=(1, 2, 3), required=True)
    pm.add_argument("--nu", type=float, required=True)
    pm.add_argument("--d", type=float, default=1.0)
    pm.add_argument("--x", type=str, required=True,
                    help="diagonal entries of the argument, e.g. 0.5,1.0,2.0")
    pm.add_argument("--samples", type=int, default=100000)
    pm.add_argument("--seed", type=int, default=None)
    pm.add_argument("--threads", type=int, default=1)

    pc = sub.add_parser("coeffs", help="combination coefficient tables")
    pc.add_argument("--rank", type=int, choices=(2, 3), required=True)
    pc.add_argument("--nu", type=float, required=True)
    pc.add_argument("--d", type=float, required=True)

    pv = sub.add_parser("verify", help="run self-verification checks")
    pv.add_argument("--suite", type=str, default="all",
                    help="'all', or a comma-separated list of check names")
    pv.add_argument("--list", action="store_true", help="list check names and exit")
    pv.add_argument("--seed", type=int, default=None)
    pv.add_argument("--threads", type=int, default=1)
    return parser


def _cmd_eval_j(args):
    t = _resolve_point(args)
    p = se.SeriesParams(nu=args.nu, d=args.d, tol=args.tol, max_degree=args.max_degree)
    top = 2 if args.rank == 2 else 4
    if not 1 <= args.j <= top:
        raise UsageError(f"--j must be in 1..{top} for rank {args.rank}")
    ev = se.j2 if args.rank == 2 else se.j3
    if args.partner:
        q = se.SeriesParams(nu=-args.nu, d=args.d, tol=args.tol,
                            max_degree=args.max_degree)
        base = ev(args.j, q, t, variant=args.variant)
        scale = t[-1] ** (-args.nu)
        res = se.EvalResult(scale * base.value, abs(scale) * base.err, base.work)
    else:
        res = ev(args.j, p, t, variant=args.variant)
    payload = {"value": res.value, "err": res.err, "work": res.work, "t": list(t)}
    _emit(args, payload, [f"value = {res.value!r}",
                          f"err   = {res.err:.3e}   work = {res.work}"])
    return 0


def _cmd_eval_k_series(args):
    t = _resolve_point(args)
    p = se.SeriesParams(nu=args.nu, d=args.d, tol=args.tol, max_degree=args.max_degree)
    res = se.k2_series(p, t) if args.rank == 2 else se.k3_series(p, t)
    payload = {"value": res.value, "err": res.err, "work": res.work, "t": list(t)}
    _emit(args, payload, [f"value = {res.value!r}",
                          f"err   = {res.err:.3e}   work = {res.work}"])
    return 0


def _cmd_eval_k_mc(args):
    xv = _floats(args.x)
    if len(xv) != args.rank:
        raise UsageError(f"rank {args.rank} needs {args.rank} diagonal entries")
    desc = alg.AlgebraDescriptor(args.rank, args.d)
    seed = args.seed if args.seed is not None else _default_seed()
    est = ci.k_integral_mc(desc, args.nu, alg.from_diag(desc, xv),
                           args.samples, seed, threads=args.threads)
    payload = {"value": est.value, "std_error": est.std_error,
               "n_samples": est.n_samples, "seed": est.seed}
    _emit(args, payload, [f"value     = {est.value!r}",
                          f"std_error = {est.std_error:.3e}   n = {est.n_samples}   seed = {est.seed}"])
    return 0


def _cmd_coeffs(args):
    if args.rank == 2:
        c = se.k2_coeffs(args.nu, args.d)
        payload = {"c": list(c), "nu": args.nu, "d": args.d}
        lines = [f"c[{i + 1}] = {v!r}" for i, v in enumerate(c)]
    else:
        tab = se.coeffs3(args.nu, args.d)
        payload = {"a": list(tab.a), "b": list(tab.b), "nu": args.nu, "d": args.d}
        lines = [f"a[{i + 1}] = {v!r}" for i, v in enumerate(tab.a)]
        lines += [f"b[{i + 1}] = {v!r}" for i, v in enumerate(tab.b)]
    _emit(args, payload, lines)
    return 0


def _cmd_verify(args):
    if args.list:
        for name in vf.registry_names():
            print(name)
        return 0
    seed = args.seed if args.seed is not None else _default_seed()
    names = "all" if args.suite == "all" else [s for s in args.suite.split(",") if s]

    progress = None
    if not args.json:
        def progress(res):
            status = "PASS" if res.passed else "FAIL"
            print(f"{status}  {res.name:<34} observed {res.observed:.3e}  "
                  f"bound {res.bound:.3e}  [{res.wall_time:.2f}s]")
            if res.note and not res.passed:
                print(f"      {res.note}")

    report = vf.run_suite(names, seed=seed, threads=args.threads, progress=progress)
    if args.json:
        sys.stdout.write(vf.report_json(report))
    else:
        s = report["summary"]
        print(f"{s['pass']} passed, {s['fail']} failed (seed {seed})")
    return 0 if report["summary"]["fail"] == 0 else 3


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "eval-j": _cmd_eval_j,
        "eval-k-series": _cmd_eval_k_series,
        "eval-k-mc": _cmd_eval_k_mc,
        "coeffs": _cmd_coeffs,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConeBesselError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
