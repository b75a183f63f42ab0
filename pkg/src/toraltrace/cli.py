"""Command-line entry point: ``toraltrace <command> [options]``.

Every command writes ``<command>.csv`` and ``<command>.json`` into ``--out``.
Exit codes: 0 success, 1 audit failure, 2 usage error, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, arith, construct, lattice, measures, quadform, sobolev
from .errors import AuditFailure, QuadratureError, ToralTraceError
from .patches import Patch
from .report import write_pair

EXIT_OK, EXIT_AUDIT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """``"7"``, ``"1..100"``, ``"20..60:5"`` or ``"5,65,1105"``."""
    try:
        if "," in text:
            return [int(t) for t in text.split(",") if t]
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = span.split("..")
            return list(range(int(lo), int(hi) + 1, int(step) if step else 1))
        return [int(text)]
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}; use N, a..b, a..b:step or a,b,c")


def _single(args) -> int:
    ns = parse_range(args.n)
    if len(ns) != 1:
        raise UsageError("this command takes a single --n")
    return ns[0]


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} needs {', '.join(missing)}")


def _measure(args):
    _require(args, "measure")
    m, raw = measures.load_measure(args.measure)
    return m, {"path": args.measure, "raw": raw, "parsed": m.to_json()}


def _point(args, d):
    if args.x0 is None:
        return np.zeros(d)
    x = np.array([float(v) for v in args.x0.split(",")])
    if len(x) != d:
        raise UsageError(f"--x0 needs {d} coordinates")
    return x


# ------------------------------------------------------------------ commands


def cmd_shell(args):
    _require(args, "dim", "n")
    n = _single(args)
    shell = lattice.enumerate_shell(args.dim, n, cap=args.cap or lattice.DEFAULT_POINT_CAP)
    cols = [f"k{i + 1}" for i in range(args.dim)]
    rows = [dict(zip(cols, p.tolist())) for p in shell.points]
    result = {"d": args.dim, "n": n, "N": shell.size}
    if args.dim == 2 and n > 0:
        result["jacobi"] = arith.jacobi_count(n)
    return cols, rows, result, True


def cmd_counts(args):
    _require(args, "dim", "max")
    table = arith.count_table(args.dim, args.max)
    rows = [{"n": n, "N": int(c)} for n, c in enumerate(table)]
    result = {"d": args.dim, "max": args.max, "nonempty": int(np.count_nonzero(table))}
    ok = True
    if args.check_jacobi:
        if args.dim != 2:
            raise UsageError("--check-jacobi applies to --dim 2")
        bad = [n for n in range(1, args.max + 1) if arith.jacobi_count(n) != table[n]]
        result["jacobi_mismatches"] = bad[:20]
        ok = not bad
    return ["n", "N"], rows, result, ok


def cmd_clusters(args):
    _require(args, "dim", "n")
    shell = lattice.enumerate_shell(args.dim, _single(args))
    dec = lattice.cluster_decompose(shell, c=1.0 if args.c is None else args.c, exponent=args.exponent)
    rows = []
    for i, cl in enumerate(dec.clusters):
        rows.append({"cluster": i, "size": cl.size, "diameter": cl.diameter, "affine_dimension": cl.affine_dimension,
                     "radius_sq": str(cl.radius_sq), "members": " ".join(map(str, cl.indices.tolist()))})
    result = {"n": shell.n, "N": shell.size, "threshold": dec.threshold, "clusters": len(dec.clusters),
              "max_cluster_size": dec.max_cluster_size, "min_intercluster_distance": dec.min_intercluster_distance}
    return ["cluster", "size", "diameter", "affine_dimension", "radius_sq", "members"], rows, result, True


def cmd_jarnik(args):
    _require(args, "max")
    c = 0.1 if args.c is None else args.c
    res = lattice.jarnik_audit(args.max, c=c)
    rows = [{"n": n} for n in res["offending_n"]]
    return ["n"], rows, res, res["passed"]


def cmd_gram(args):
    _require(args, "dim", "n")
    m, echo = _measure(args)
    shell = lattice.enumerate_shell(args.dim, _single(args))
    g = quadform.assemble_gram(shell.points, m, args.cap or quadform.DEFAULT_CAP)
    rows = [{"n": shell.n, "N": shell.size, "lambda_min": g.lambda_min, "lambda_max": g.lambda_max}]
    result = {**rows[0], "measure": echo, "certificate": g.certificate()}
    return ["n", "N", "lambda_min", "lambda_max"], rows, result, True


def cmd_sweep(args):
    _require(args, "dim", "n")
    m, echo = _measure(args)
    sw = quadform.constants_sweep(args.dim, parse_range(args.n), m, args.cap or quadform.DEFAULT_CAP)
    result = {"measure": echo, "summary": sw.summary(),
              "running_extrema": [{"n": n, "inf_lambda_min": lo, "sup_lambda_max": hi}
                                  for n, lo, hi in sw.running_extrema()]}
    return ["n", "N", "lambda_min", "lambda_max", "status"], sw.rows, result, True


def cmd_blocks(args):
    _require(args, "dim", "n")
    m, echo = _measure(args)
    c = 1.0 if args.c is None else args.c
    rows = []
    for n in parse_range(args.n):
        if arith.sum_of_squares_count(args.dim, n).count == 0:
            continue
        b = quadform.cluster_block_split(n, args.dim, m, c=c, exponent=args.exponent)
        rows.append(b.as_dict())
    cols = ["n", "d", "block_min", "block_max", "cross_bound", "lambda_min", "lambda_max", "clusters",
            "max_cluster_size", "sandwich_ok", "dyadic_cross"]
    ok = all(r["sandwich_ok"] for r in rows)
    return cols, rows, {"measure": echo, "c": c, "sandwich_ok": ok}, ok


def cmd_bourgain(args):
    _require(args, "dim", "n")
    x0 = _point(args, args.dim)
    c0 = 1 / 6 if args.c0 is None else args.c0
    rng = np.random.default_rng(args.seed)
    unit = construct.ball_samples(args.dim, args.samples, rng)
    rows, dumps = [], {}
    for n in parse_range(args.n):
        shell = lattice.enumerate_shell(args.dim, n)
        if shell.size == 0 or n == 0:
            continue
        rep = construct.concentration_check(shell, x0, c0, unit_samples=unit)
        u = construct.bourgain(shell, x0)
        rows.append({**rep.as_dict(), "u_x0": float(u.evaluate(x0)[0].real)})
        if len(dumps) < 4:
            dumps[str(n)] = u.to_json()
    ok = all(r["passed"] for r in rows)
    cols = ["n", "N", "c0", "samples", "min_ratio", "u_x0", "passed"]
    return cols, rows, {"x0": x0, "c0": c0, "passed": ok, "eigenfunctions": dumps}, ok


def cmd_frostman(args):
    _require(args, "dim", "n")
    m, echo = _measure(args)
    x0 = _point(args, args.dim)
    c0 = 1 / 6 if args.c0 is None else args.c0
    rows = construct.frostman_audit(m, args.dim, parse_range(args.n), x0, c0)
    ok = all(r["chain_ok"] for r in rows)
    cols = ["n", "N", "r", "ball_mass", "quad_bound", "trace_bound", "lambda_max", "mass_over_r_d2", "chain_ok"]
    return cols, rows, {"measure": echo, "x0": x0, "c0": c0, "chain_ok": ok}, ok


def cmd_cylinder(args):
    _require(args, "n")
    d = args.dim or 3
    rows = []
    for n in parse_range(args.n):
        if arith.sum_of_squares_count(2, n).count == 0:
            continue
        ratio, expected = construct.cylinder_witness(n, d)
        rows.append({"n": n, "ratio": ratio, "expected": expected})
    return ["n", "ratio", "expected"], rows, {"d": d}, True


def _patch(args):
    _require(args, "patch", "eps", "eta")
    with open(args.patch, encoding="utf-8") as fh:
        raw = fh.read()
    patch = Patch.from_json(json.loads(raw), d=args.dim)
    return patch, {"path": args.patch, "raw": raw, "parsed": patch.to_json()}


def cmd_nullspace(args):
    patch, echo = _patch(args)
    _require(args, "lam")
    lams = parse_range(args.lam)
    guard = None if args.guard <= 1 else args.guard
    sweep = construct.null_sweep(patch, args.eps, args.eta, lams, weight=args.weight, guard=guard)
    rows = [r.as_dict() for r in sweep]
    ok = all(r["residual"] <= 1e-8 for r in rows)
    last = lattice.enumerate_shell(patch.d, sweep[-1].n)
    A = construct.amatrix(patch, args.eps, args.eta, last)
    u = construct.nullspace_eigenfunction(A, last, guard).u
    cols = ["lam_target", "n", "N", "rows", "residual", "kernel_dim", "vanish", "vanish_unguarded"]
    result = {"patch": echo, "eps": args.eps, "eta": args.eta, "guard": guard, "residual_ok": ok,
              "eigenfunction_n": last.n, "eigenfunction": u.to_json()}
    return cols, rows, result, ok


def cmd_vanish(args):
    _require(args, "coeffs")
    m, echo = _measure(args)
    with open(args.coeffs, encoding="utf-8") as fh:
        obj = json.load(fh)
    if isinstance(obj, dict):
        obj = obj.get("result", obj).get("eigenfunction")
        if obj is None:
            raise UsageError("--coeffs JSON has no eigenfunction dump")
    u = construct.EigenfunctionCoeffs.from_json(obj)
    ratio = construct.vanish_audit(u, m)
    rows = [{"N": len(u.F), "norm2": u.norm2, "ratio": ratio}]
    ok = args.max_ratio is None or ratio <= args.max_ratio
    return ["N", "norm2", "ratio"], rows, {"measure": echo, "ratio": ratio, "max_ratio": args.max_ratio}, ok


def cmd_cantor(args):
    _require(args, "alpha", "eps", "depth")
    res = sobolev.cantor_bound_check(args.alpha, args.eps, args.depth)
    cols = ["depth", "seminorm", "partial", "bound", "ratio", "increment"]
    return cols, res["rows"], res, res["passed"]


def cmd_irregular(args):
    _require(args, "max", "eps")
    res = sobolev.irregular_divergence_audit(args.max, args.eps)
    cols = ["N", "partial", "closed_form", "relative_gap", "partial_tenth", "growth_ratio", "passed"]
    return cols, [res], res, res["passed"]


def cmd_measure_probe(args):
    m, echo = _measure(args)
    K = args.max or 8
    inv = measures.check_invariants(m, K=min(K, 8))
    sup, arg = measures.sup_offzero(m, min(K, 8))
    result = {"measure": echo, "invariants": inv, "sup_offzero": {"value": sup, "k": list(arg)}}
    rows = []
    if K >= 8:
        fit = measures.decay_fit(m, K)
        result["decay_fit"] = fit.as_dict()
        rows = fit.blocks
    ok = inv["ok"]
    return ["j", "lo", "hi", "max"], rows, result, ok


COMMANDS = {
    "shell": (cmd_shell, "enumerate the lattice points of one shell"),
    "counts": (cmd_counts, "shell sizes N_d for n <= --max"),
    "clusters": (cmd_clusters, "cluster decomposition of a shell"),
    "jarnik": (cmd_jarnik, "planar clusters at 0.1 lambda^(1/3) have <= 2 points"),
    "gram": (cmd_gram, "extreme eigenvalues of one shell's Gram matrix"),
    "sweep": (cmd_sweep, "per-shell constants over an n range"),
    "blocks": (cmd_blocks, "cluster-block sandwich of the Gram spectrum"),
    "bourgain": (cmd_bourgain, "concentration of the point-peaked eigenfunctions"),
    "frostman": (cmd_frostman, "ball-mass chain from the point-peaked eigenfunctions"),
    "cylinder": (cmd_cylinder, "planar witness for the {x1 = x2 = 0} measure"),
    "nullspace": (cmd_nullspace, "eigenfunctions vanishing on a curve patch"),
    "vanish": (cmd_vanish, "mass of a coefficient dump against a measure"),
    "cantor": (cmd_cantor, "fat Cantor seminorms against the geometric bound"),
    "irregular": (cmd_irregular, "seminorm growth on the irregular set"),
    "measure-probe": (cmd_measure_probe, "invariants, sup and decay fit of a measure"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int)
    common.add_argument("--n", help="N, a..b, a..b:step or a,b,c")
    common.add_argument("--measure", help="measure spec JSON file")
    common.add_argument("--c", type=float, help="cluster constant")
    common.add_argument("--exponent", type=float, help="cluster exponent override")
    common.add_argument("--eps", type=float)
    common.add_argument("--eta", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--depth", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=1000)
    common.add_argument("--c0", type=float)
    common.add_argument("--x0", help="comma-separated point")
    common.add_argument("--max", type=int)
    common.add_argument("--cap", type=int, help="size cap (points or matrix rows)")
    common.add_argument("--check-jacobi", action="store_true")
    common.add_argument("--patch", help="patch spec JSON file")
    common.add_argument("--lam", help="lambda targets, same syntax as --n")
    common.add_argument("--guard", type=float, default=1.5, help="guard band factor (<= 1 disables)")
    common.add_argument("--weight", choices=("ball", "bump"), default="ball")
    common.add_argument("--coeffs", help="eigenfunction JSON dump")
    common.add_argument("--max-ratio", type=float)
    common.add_argument("--out", default=".", help="output directory")

    parser = argparse.ArgumentParser(prog="toraltrace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    func = COMMANDS[args.command][0]
    config = {k: v for k, v in sorted(vars(args).items())}
    try:
        cols, rows, result, ok = func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"toraltrace {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as exc:
        print(f"toraltrace {args.command}: {exc} (at {exc.where})", file=sys.stderr)
        return EXIT_NUMERIC
    except AuditFailure as exc:
        print(f"toraltrace {args.command}: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    except (ToralTraceError, ValueError, KeyError, OSError) as exc:
        print(f"toraltrace {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {"command": args.command, "version": __version__, "config": config, "passed": bool(ok),
              "result": result}
    stem = args.command.replace("-", "_")
    csv_path, json_path = write_pair(args.out, stem, cols, rows, report)
    print(f"{args.command}: {'ok' if ok else 'FAILED'} -> {csv_path}, {json_path}")
    return EXIT_OK if ok else EXIT_AUDIT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
