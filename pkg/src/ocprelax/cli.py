"""Command-line entry point: load a problem, sweep relaxation orders,
solve, compare against analytic oracles, and emit reports."""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .compactify import CompactifyError, compactify
from . import conicsolve, hierarchy, ocpmodel, oracles, seqsim
from .polyalg import VariableSpace, parse_poly

TOL_ENV = "OCPRELAX_TOL"


def _parse_params(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise SystemExit(f"--param expects name=value, got {item!r}")
        name, value = item.split("=", 1)
        out[name] = float(value)
    return out


def _options(args) -> conicsolve.SolveOptions:
    tol = args.tol
    if tol is None:
        tol = float(os.environ.get(TOL_ENV, 1e-8))
    return conicsolve.SolveOptions(
        feas_tol=tol, gap_tol=tol, verbose=args.verbose, backend=args.backend
    )


def _marginals(result, cp, degree):
    """Marginal moments per variable, mapped back to original coordinates."""
    var_map = cp.variable_map()
    table = {}
    for name in cp.space.names:
        m = var_map[name]
        column = []
        for k in range(degree + 1):
            # E[(off + scale*x)^k] from the rescaled moments
            value = sum(
                math.comb(k, j) * m.offset ** (k - j) * m.scale**j
                * result.moments.marginal(name, j)
                for j in range(k + 1)
            )
            column.append(value)
        table[name] = column
    return table


def _print_marginals(table, degree, fmt, out=sys.stdout):
    names = list(table)
    if fmt == "csv":
        out.write("k," + ",".join(names) + "\n")
        for k in range(degree + 1):
            out.write(f"{k}," + ",".join(f"{table[n][k]:.10g}" for n in names) + "\n")
    else:
        out.write("   k " + "".join(f"{n:>12}" for n in names) + "\n")
        for k in range(degree + 1):
            out.write(f"{k:4d} " + "".join(f"{table[n][k]:12.4f}" for n in names) + "\n")


def _solve_problem(problem, order, opts, export_path=None):
    cp = compactify(problem)
    program = hierarchy.assemble(cp, order)
    if export_path:
        hierarchy.export_sdpa(program, export_path)
    result = conicsolve.solve(program, opts)
    return cp, program, result


def cmd_solve(args) -> int:
    problem = ocpmodel.load_problem(args.problem, _parse_params(args.param))
    cp, program, result = _solve_problem(
        problem, args.order, _options(args), args.export_sdp
    )
    report = conicsolve.verify(result, program)
    print(f"status:        {result.status} (solver: {result.solver_status})")
    print(f"bound:         {result.bound:.6f}")
    print(f"eq residual:   {result.eq_residual:.3e}")
    print(f"min eigenvalue:{result.min_eigenvalue: .3e}")
    print(f"iterations:    {result.iterations}   wall time: {result.wall_time:.2f}s")
    if result.moments is not None:
        _print_marginals(_marginals(result, cp, 2 * args.order), 2 * args.order, args.format)
    for flag in report.flags:
        print(f"FLAG: {flag}", file=sys.stderr)
    ok = result.status in ("optimal", "near-optimal") and report.clean
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    problem = ocpmodel.load_problem(args.problem, _parse_params(args.param))
    opts = _options(args)
    orders = args.orders

    def run(d):
        _, program, result = _solve_problem(problem, d, opts)
        return d, result

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = sorted(pool.map(run, orders))
    if args.format == "csv":
        print("order,bound,status,eq_residual,min_eigenvalue")
        for d, r in results:
            print(f"{d},{r.bound:.10g},{r.status},{r.eq_residual:.3e},{r.min_eigenvalue:.3e}")
    else:
        print("order       bound  status")
        for d, r in results:
            print(f"{d:5d} {r.bound:12.6f}  {r.status}")
    bounds = [r.bound for _, r in results if not math.isnan(r.bound)]
    monotone = all(b2 >= b1 - 1e-7 for b1, b2 in zip(bounds, bounds[1:]))
    if not monotone:
        print("FLAG: bounds are not non-decreasing in the order", file=sys.stderr)
    ok = monotone and all(r.status in ("optimal", "near-optimal") for _, r in results)
    return 0 if ok else 1


def cmd_oracle(args) -> int:
    entry = oracles.get_entry(args.entry, args.eps)
    names = entry.space.names
    print("k," + ",".join(names))
    for k in range(args.degree + 1):
        row = []
        for i in range(len(names)):
            exps = [0] * len(names)
            exps[i] = k
            row.append(f"{entry.moment(tuple(exps)):.10g}")
        print(f"{k}," + ",".join(row))
    if args.entry == "jump":
        print("marginal,k,closed_form")
        for which in ("t", "y", "r", "w"):
            for k in range(args.degree + 1):
                print(f"{which},{k},{oracles.table_moment(which, k, args.eps):.10g}")
    return 0


def cmd_seq(args) -> int:
    f = parse_poly(args.f, VariableSpace.of("t")) if args.f else None
    g0 = parse_poly(args.g0, VariableSpace.of("s")) if args.g0 else None
    g = parse_poly(args.g, VariableSpace.of("u")) if args.g else None
    h = parse_poly(args.h, VariableSpace.of("y")) if args.h else None
    k_list = [int(2**i) for i in range(1, args.kmax_log2 + 1)]

    if args.cost:
        print("k,value,error")
        limit = (
            oracles.jump_objective_value(args.eps) if args.name == "jump" else 0.0
        )
        for k in k_list:
            value = seqsim.cost(seqsim.make_sequence(args.name, k, args.eps))
            print(f"{k},{value:.12g},{abs(value - limit):.3e}")
    else:
        rows, limit = seqsim.convergence_report(
            args.name, f, g0 if g0 is not None else g, h,
            k_list=k_list, p=args.p, eps=args.eps,
        )
        print(f"# limit,{limit:.12g}")
        print("k,value,error")
        for row in rows:
            print(f"{row.k},{row.value:.12g},{row.error:.3e}")

    if args.gnuplot:
        seq = seqsim.make_sequence(args.name, k_list[-1], args.eps)
        with open(args.gnuplot, "w") as fh:
            fh.write("# t u y (staircase samples at breakpoints)\n")
            for piece in seq.pieces:
                y1 = piece.y0 + piece.slope * (piece.t1 - piece.t0)
                fh.write(f"{piece.t0} {piece.u} {piece.y0}\n")
                fh.write(f"{piece.t1} {piece.u} {y1}\n")
    return 0


def cmd_compare(args) -> int:
    params = _parse_params(args.param)
    problem = ocpmodel.load_problem(args.problem, params)
    if not problem.oracle:
        print("error: no oracle registered for this problem", file=sys.stderr)
        return 2
    eps = params.get("eps", args.eps)
    entry = oracles.get_entry(problem.oracle, eps)
    cp, program, result = _solve_problem(problem, args.order, _options(args))
    if result.moments is None:
        print(f"error: solve failed with status {result.status}", file=sys.stderr)
        return 1
    table = _marginals(result, cp, 2 * args.order)

    worst = 0.0
    print("variable,k,solved,oracle,abs_diff")
    failed = False
    for i, name in enumerate(entry.space.names):
        if name not in table:
            continue
        for k in range(2 * args.order + 1):
            exps = [0] * entry.space.dim
            exps[i] = k
            ref = entry.moment(tuple(exps))
            got = table[name][k]
            diff = abs(got - ref)
            worst = max(worst, diff)
            mark = "" if diff <= args.tolerance else ",MISMATCH"
            if diff > args.tolerance:
                failed = True
            print(f"{name},{k},{got:.6f},{ref:.6f},{diff:.2e}{mark}")
    print(f"# max |diff| = {worst:.3e}, tolerance = {args.tolerance:g}")
    print("# " + ("FAIL" if failed else "PASS"))
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ocprelax",
        description="Measure relaxations of polynomial optimal control problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_problem=True):
        if with_problem:
            p.add_argument("--problem", required=True, help="problem file path")
            p.add_argument("--param", action="append", metavar="NAME=VALUE",
                           help="override a declared problem parameter")
        p.add_argument("--tol", type=float, default=None,
                       help=f"solver tolerance (default from ${TOL_ENV} or 1e-8)")
        p.add_argument("--backend", default="cvxopt", choices=["cvxopt", "clarabel"])
        p.add_argument("--format", default="table", choices=["table", "csv"])
        p.add_argument("--verbose", action="store_true")

    def positive_order(value):
        d = int(value)
        if d < 1:
            raise argparse.ArgumentTypeError("order must be >= 1")
        return d

    p = sub.add_parser("solve", help="solve one relaxation order")
    add_common(p)
    p.add_argument("--order", type=positive_order, required=True)
    p.add_argument("--export-sdp", metavar="PATH", default=None,
                   help="write the assembled program in sparse SDPA format")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve a range of relaxation orders")
    add_common(p)
    p.add_argument("--orders", type=positive_order, nargs="+", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="print analytic moments as CSV")
    p.add_argument("--entry", required=True)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--degree", type=int, default=12)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("seq", help="minimizing-sequence convergence tables")
    p.add_argument("--name", required=True)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--kmax-log2", type=int, default=10)
    p.add_argument("--f", default=None, help="polynomial in t")
    p.add_argument("--g0", default=None, help="polynomial in s (compactified)")
    p.add_argument("--g", default=None, help="polynomial in u (unweighted)")
    p.add_argument("--h", default=None, help="polynomial in y")
    p.add_argument("--cost", action="store_true", help="report benchmark cost")
    p.add_argument("--gnuplot", metavar="PATH", default=None)
    p.set_defaults(func=cmd_seq)

    p = sub.add_parser("compare", help="diff solved moments against the oracle")
    add_common(p)
    p.add_argument("--order", type=positive_order, required=True)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--tolerance", type=float, default=5e-4)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ocpmodel.SchemaError, CompactifyError, oracles.OracleError,
            seqsim.SequenceError, hierarchy.AssemblyError,
            conicsolve.SolveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
