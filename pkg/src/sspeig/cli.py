"""Command-line front end: solve, verify, rates, bench, generate.

Exit codes: 0 success, 1 non-convergence, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import glob
import statistics
import sys
import time

import numpy as np

from .errors import SkewEigError
from .generators import ConvectionSpec, embed_block, generate_convection, skew_symmetrize
from .io import SolveReport, mm_read, mm_write, trace_export
from .operators import SparseSkewOperator
from .oracle import eigspace_angle, oracle_spectrum
from .solvers import SolveConfig, convergence_rates, ssp_solve_many

ORACLE_DIM_LIMIT = 5000


def _add_source_flags(parser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--matrix", metavar="PATH",
                       help="Matrix Market file holding a skew-symmetric matrix")
    group.add_argument("--convection", metavar="L,Z1,Z2,Z3",
                       help="convection operator of dimension L**3")
    group.add_argument("--skewsym", metavar="PATH",
                       help="Matrix Market file; solve the skew part (A - A.T)/2")
    group.add_argument("--embed", metavar="PATH",
                       help="Matrix Market file; solve [0, A; -A.T, 0]")


def _add_solver_flags(parser):
    parser.add_argument("--tol", type=float, default=1e-8)
    parser.add_argument("--maxit", type=int, default=20000)
    parser.add_argument("--seed", type=int, default=42,
                        help="seed for the random initial-vector fallback")


def _parse_convection(text: str) -> ConvectionSpec:
    parts = text.split(",")
    if len(parts) != 4:
        raise SkewEigError(f"--convection needs L,Z1,Z2,Z3, got {text!r}")
    return ConvectionSpec(int(parts[0]), (float(parts[1]), float(parts[2]), float(parts[3])))


def _load_operator(args):
    """Build the operator named by the source flags; returns (op, label)."""
    if args.convection is not None:
        spec = _parse_convection(args.convection)
        return generate_convection(spec), f"convection(l={spec.l})"
    if args.matrix is not None:
        data = mm_read(args.matrix)
        if data.header.symmetry == "skew-symmetric":
            op = SparseSkewOperator.from_lower_triplets(
                data.nrows, data.rows, data.cols, data.values
            )
        else:
            op = SparseSkewOperator.from_matrix(data.to_sparse())
        return op, args.matrix
    if args.skewsym is not None:
        return skew_symmetrize(mm_read(args.skewsym).to_sparse()), args.skewsym
    return embed_block(mm_read(args.embed).to_sparse()), args.embed


def _config(args) -> SolveConfig:
    return SolveConfig(tol=args.tol, max_iter=args.maxit, seed=args.seed)


def _print_stages(result):
    for i, pair in enumerate(result.pairs, start=1):
        print(
            f"stage {i}: sigma = {pair.sigma:.11e}  (eigenvalues +-{pair.sigma:.11e}i)"
            f"  IT = {pair.iterations}  MV = {pair.matvecs}  ERR = {pair.err:.3e}"
        )
    if result.failure is not None:
        f = result.failure
        print(
            f"stage {result.failure_stage}: NOT CONVERGED after {f.iterations} "
            f"iterations (ERR = {f.err:.3e})"
        )
    print(f"total: IT = {result.total_iterations}  MV = {result.total_matvecs}")


def cmd_solve(args) -> int:
    op, label = _load_operator(args)
    config = _config(args)
    start = time.perf_counter()
    result = ssp_solve_many(op, args.s, config)
    elapsed = time.perf_counter() - start
    _print_stages(result)
    if args.report:
        report = SolveReport.from_result(
            label, result, elapsed,
            {"tol": args.tol, "max_iter": args.maxit, "seed": args.seed,
             "initial_vector": "auto"},
        )
        report.save(args.report)
    if args.trace:
        for i, tr in enumerate(result.traces, start=1):
            if args.s == 1:
                path = args.trace
            else:
                stem, dot, ext = args.trace.rpartition(".")
                path = f"{stem}_stage{i}.{ext}" if dot else f"{args.trace}_stage{i}"
            trace_export(tr, "json" if path.endswith(".json") else "csv", path)
    return 0 if result.converged else 1


def cmd_verify(args) -> int:
    op, label = _load_operator(args)
    if op.dim > ORACLE_DIM_LIMIT:
        print(f"error: n = {op.dim} too large for the dense oracle "
              f"(limit {ORACLE_DIM_LIMIT})", file=sys.stderr)
        return 2
    spectrum = oracle_spectrum(op.to_dense())
    result = ssp_solve_many(op, args.s, _config(args))
    if not result.converged:
        _print_stages(result)
        print("verify: FAIL (non-convergence)")
        return 1
    sigma1 = spectrum.sigmas[0]
    worst_sigma = 0.0
    worst_angle = 0.0
    for i, pair in enumerate(result.pairs):
        worst_sigma = max(worst_sigma, abs(pair.sigma - spectrum.sigmas[i]) / sigma1)
        angle = eigspace_angle(
            np.column_stack([pair.u, pair.v]), spectrum.plane(i)
        )
        worst_angle = max(worst_angle, angle)
    bound = 10.0 * args.tol
    ok = worst_sigma <= bound and worst_angle <= bound
    print(f"verify {label}: max |sigma - oracle|/sigma1 = {worst_sigma:.3e}, "
          f"max eigenspace angle = {worst_angle:.3e} (bound {bound:.1e})")
    print(f"verify: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_rates(args) -> int:
    op, label = _load_operator(args)
    if op.dim > ORACLE_DIM_LIMIT:
        print(f"error: n = {op.dim} too large for the dense oracle "
              f"(limit {ORACLE_DIM_LIMIT})", file=sys.stderr)
        return 2
    spectrum = oracle_spectrum(op.to_dense())
    if args.count >= spectrum.m:
        print(f"error: --count {args.count} needs at least {args.count + 1} "
              f"conjugate pairs, matrix has {spectrum.m}", file=sys.stderr)
        return 2
    rates = convergence_rates(spectrum.sigmas, args.count)
    print(" ".join(f"{g:.4f}" for g in rates))
    return 0


def cmd_bench(args) -> int:
    paths = sorted(glob.glob(args.suite))
    if not paths:
        print(f"error: no files match {args.suite!r}", file=sys.stderr)
        return 2
    config = _config(args)
    out = open(args.out, "w", encoding="ascii") if args.out else sys.stdout
    any_failed = False
    try:
        out.write("matrix,n,nnz,s,IT,MV,median_time_s,ave_cpu_per_it\n")
        for path in paths:
            try:
                data = mm_read(path)
                if data.header.symmetry == "skew-symmetric":
                    op = SparseSkewOperator.from_lower_triplets(
                        data.nrows, data.rows, data.cols, data.values
                    )
                else:
                    op = SparseSkewOperator.from_matrix(data.to_sparse())
                times = []
                result = None
                for _ in range(args.repeat):
                    start = time.perf_counter()
                    result = ssp_solve_many(op, args.s, config)
                    times.append(time.perf_counter() - start)
                med = statistics.median(times)
                it = result.total_iterations
                ave = med / it if it else float("nan")
                out.write(
                    f"{path},{op.dim},{op.nnz},{args.s},{it},"
                    f"{result.total_matvecs},{med:.6g},{ave:.6g}\n"
                )
                if not result.converged:
                    any_failed = True
            except (OSError, SkewEigError, ValueError) as exc:
                any_failed = True
                out.write(f"{path},,,,,,failed: {exc},\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 1 if any_failed else 0


def cmd_generate(args) -> int:
    spec = _parse_convection(args.convection)
    op = generate_convection(spec)
    if spec.dim > ORACLE_DIM_LIMIT:
        print(f"error: refusing to assemble n = {spec.dim} densely", file=sys.stderr)
        return 2
    dense = op.to_dense()
    mm_write(dense, args.out, symmetry="skew-symmetric")
    print(f"wrote {args.out} ({spec.dim}x{spec.dim})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sspeig",
        description="Dominant conjugate eigenpairs of sparse skew-symmetric "
                    "matrices by the alternating power iteration with deflation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="compute s dominant conjugate pairs")
    _add_source_flags(p_solve)
    _add_solver_flags(p_solve)
    p_solve.add_argument("--s", type=int, default=1)
    p_solve.add_argument("--trace", metavar="PATH", help="write per-stage trace files")
    p_solve.add_argument("--report", metavar="PATH", help="write a JSON solve report")
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="cross-check the solver against the dense oracle")
    _add_source_flags(p_verify)
    _add_solver_flags(p_verify)
    p_verify.add_argument("--s", type=int, default=1)
    p_verify.set_defaults(func=cmd_verify)

    p_rates = sub.add_parser("rates", help="print oracle convergence rates sigma_{i+1}/sigma_i")
    _add_source_flags(p_rates)
    p_rates.add_argument("--count", type=int, default=5)
    p_rates.set_defaults(func=cmd_rates)

    p_bench = sub.add_parser("bench", help="run a suite of Matrix Market files")
    p_bench.add_argument("--suite", required=True, metavar="GLOB")
    p_bench.add_argument("--s", type=int, default=1)
    p_bench.add_argument("--repeat", type=int, default=3)
    p_bench.add_argument("--out", metavar="PATH", help="CSV output (default stdout)")
    _add_solver_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_gen = sub.add_parser("generate", help="write a generated matrix as Matrix Market")
    p_gen.add_argument("--convection", required=True, metavar="L,Z1,Z2,Z3")
    p_gen.add_argument("--out", required=True, metavar="PATH")
    p_gen.set_defaults(func=cmd_generate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SkewEigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
