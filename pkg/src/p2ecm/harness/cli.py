"""Command-line front end: ``p2ecm {verify,predict,bench,scale,memory,codegen}``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
CSV output always uses a dot decimal separator and a fixed header.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings
from pathlib import Path

from .. import codegen, grid, sparse
from ..ecm import (LcFixture, core_model, default_machine, load_machine, predict_kernel, predict_scaling,
                   reference_states)
from ..ecm.states import parse_level_range
from ..errors import P2EcmError
from ..stencils import BUILTIN_SPECS, KERNEL_NAMES
from . import bench as benchmod
from . import verify as verifymod

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PREDICT_HEADER = ("kernel", "level", "lc_state", "t_ol", "t_nol", "t_l1l2", "t_l2l3", "t_l3mem",
                  "pred_cycles", "pred_gflops")
MEMORY_HEADER = ("level", "dofs", "crs32_bytes", "crs64_bytes", "matrixfree_bytes", "hyteg_bytes",
                 "crs_mb", "matrixfree_mb", "hyteg_mb", "crs_over_matrixfree", "crs_over_hyteg")
BENCH_HEADER = ("kernel", "level", "repetitions", "wall_seconds", "iterations_done", "achieved_gflops",
                "predicted_gflops", "ratio")
SCALE_HEADER = ("threads", "aggregate_gflops", "per_thread_gflops", "predicted_aggregate")

# Published Skylake GFLOP/s for the edge-to-edge kernel, which do not follow
# from its flop count; reported next to the engine's values.
ETE_PUBLISHED_GFLOPS = (11.5, 10.8, 8.1)


class UsageError(Exception):
    pass


def _levels(text: str) -> list[int]:
    try:
        lo, hi = parse_level_range(text)
    except ValueError as exc:
        raise UsageError(f"bad --levels {text!r}: {exc}") from None
    for lv in (lo, hi):
        grid.check_level(lv)
    return list(range(lo, hi + 1))


def _kernels(text: str) -> list[str]:
    if text == "all":
        return list(KERNEL_NAMES)
    names = [k.strip().lower() for k in text.split(",") if k.strip()]
    bad = [k for k in names if k not in KERNEL_NAMES]
    if bad or not names:
        raise UsageError(f"unknown kernel(s) {bad or text!r}; choose from {', '.join(KERNEL_NAMES)}")
    return names


def _machine(args):
    return load_machine(args.machine) if args.machine else default_machine()


def _fixture(args):
    if not getattr(args, "lc_fixture", None):
        return None
    if args.lc_fixture == "reference":
        return reference_states()
    return LcFixture.load(args.lc_fixture)


def _num(v, digits=4) -> str:
    if v is None:
        return ""
    return f"{v:.{digits}f}".rstrip("0").rstrip(".") if isinstance(v, float) else str(v)


def _emit(rows, header, path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if path:
        Path(path).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())


def predict_rows(machine, kernels, levels, fixture=None):
    rows = []
    for k in kernels:
        for lv in levels:
            state = fixture.lookup(k, lv) if fixture else None
            p = predict_kernel(k, lv, machine, state)
            t_ol, t_nol, l1l2, l2l3, mem = p.terms
            rows.append((k, lv, p.state.label, _num(t_ol), _num(t_nol), _num(l1l2), _num(l2l3), _num(mem),
                         _num(p.predicted_cycles), _num(p.predicted_gflops)))
    return rows


def memory_rows(levels, ratio_index_bytes=4):
    rows = []
    for lv in levels:
        f32 = sparse.footprint_model(lv, 4)
        f64 = sparse.footprint_model(lv, 8)
        fp = f32 if ratio_index_bytes == 4 else f64
        mb = fp.megabytes()
        rows.append((lv, grid.dof_counts(lv).total, f32.crs_total, f64.crs_total, fp.matrix_free_total,
                     fp.hyteg_traffic_total, f"{mb['crs_total']:.1f}", f"{mb['matrix_free_total']:.1f}",
                     f"{mb['hyteg_traffic_total']:.1f}", f"{fp.crs_over_matrix_free:.3f}",
                     f"{fp.crs_over_hyteg:.3f}"))
    return rows


def cmd_verify(args) -> int:
    results = verifymod.run_verify(args.max_level, perturb=args.inject_fault)
    for r in results:
        if not r.ok or args.verbose:
            print(r.line())
    for suite, (passed, total) in verifymod.summary(results).items():
        print(f"{suite:15s} {passed}/{total} passed")
    bad = verifymod.failed(results)
    print("verify: OK" if not bad else f"verify: {len(bad)} failure(s)")
    return EXIT_OK if not bad else EXIT_FAIL


def cmd_predict(args) -> int:
    machine = _machine(args)
    kernels = _kernels(args.kernels)
    fixture = _fixture(args)
    _emit(predict_rows(machine, kernels, _levels(args.levels), fixture), PREDICT_HEADER, args.csv)
    if fixture:
        print("note: LC states pinned from fixture where a range matches; policy elsewhere", file=sys.stderr)
    if "ete" in kernels:
        flops = machine.elements_per_line * core_model("ete").flops_per_iteration
        print(f"note: ete GFLOP/s use {flops} flops per work unit; "
              f"the published Skylake values {ETE_PUBLISHED_GFLOPS} are not consistent with that count",
              file=sys.stderr)
    return EXIT_OK


def cmd_memory(args) -> int:
    _emit(memory_rows(_levels(args.levels), args.index_bytes), MEMORY_HEADER, args.csv)
    return EXIT_OK


def cmd_codegen(args) -> int:
    kernel = _kernels(args.kernel)
    if len(kernel) != 1:
        raise UsageError("codegen takes exactly one kernel")
    gen = codegen.generate(BUILTIN_SPECS[kernel[0]], args.level)
    try:
        Path(args.out).write_text(gen.source_text, encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    print(gen.summary())
    return EXIT_OK


def _predicted_gflops(machine, fixture, kernel, level):
    state = fixture.lookup(kernel, level) if fixture else None
    return predict_kernel(kernel, level, machine, state).predicted_gflops


def cmd_bench(args) -> int:
    machine = _machine(args)
    fixture = _fixture(args)
    rows = []
    for k in _kernels(args.kernels):
        for lv in _levels(args.levels):
            if not benchmod.fits_in_memory(lv):
                print(f"note: skipping {k} level {lv}: not enough free memory", file=sys.stderr)
                continue
            r = benchmod.bench_kernel(k, lv, seed=args.seed,
                                      predicted_gflops=_predicted_gflops(machine, fixture, k, lv))
            rows.append((k, lv, r.repetitions, _num(r.wall_seconds, 6), r.iterations_done,
                         _num(r.achieved_gflops), _num(r.predicted_gflops), _num(r.ratio)))
    _emit(rows, BENCH_HEADER, args.csv)
    return EXIT_OK


def cmd_scale(args) -> int:
    machine = _machine(args)
    kernel = _kernels(args.kernels)
    if len(kernel) != 1:
        raise UsageError("scale takes exactly one kernel")
    kernel = kernel[0]
    if not benchmod.fits_in_memory(args.level, copies=args.max_threads):
        print(f"error: {args.max_threads} copies of level {args.level} do not fit in memory", file=sys.stderr)
        return EXIT_USAGE
    fixture = _fixture(args)
    state = fixture.lookup(kernel, args.level) if fixture else None
    pred = predict_kernel(kernel, args.level, machine, state)
    limit = machine.sockets * machine.cores_per_socket
    curve = predict_scaling(pred, machine, min(args.max_threads, limit))
    reps = benchmod.bench_kernel(kernel, args.level, seed=args.seed).repetitions
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        for t in range(1, args.max_threads + 1):
            predicted = curve[t - 1] if t <= limit else None
            res, _ = benchmod.run_scaling(kernel, args.level, t, seed=args.seed, reps=reps, predicted=predicted)
            rows.append((t, _num(res.aggregate_gflops), _num(res.per_thread_gflops),
                         _num(res.predicted_aggregate)))
    _emit(rows, SCALE_HEADER, args.csv)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="p2ecm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--machine", help="machine file (default: built-in Skylake 8174 node)")
    common.add_argument("--csv", help="write CSV here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--lc-fixture", help="file pinning LC states per kernel/level range, or 'reference'")

    v = sub.add_parser("verify", help="hermetic correctness suites")
    v.add_argument("--max-level", type=int, default=verifymod.MAX_VERIFY_LEVEL)
    v.add_argument("--inject-fault", type=float, default=0.0, metavar="DELTA",
                   help="shift one matrix-free stencil weight by DELTA (the SpMV suite must then fail)")
    v.add_argument("-v", "--verbose", action="store_true")
    v.set_defaults(func=cmd_verify)

    pr = sub.add_parser("predict", parents=[common], help="ECM predictions as CSV")
    pr.add_argument("--kernels", default="all")
    pr.add_argument("--levels", default="7..14")
    pr.set_defaults(func=cmd_predict)

    b = sub.add_parser("bench", parents=[common], help="time the kernels on this host")
    b.add_argument("--kernels", default="all")
    b.add_argument("--levels", default="7..11")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("scale", parents=[common], help="weak-scaling run, one triangle per worker")
    s.add_argument("--kernels", default="vtv", help="a single kernel")
    s.add_argument("--level", type=int, default=10)
    s.add_argument("--max-threads", type=int, default=len(benchmod.physical_cores()))
    s.set_defaults(func=cmd_scale)

    m = sub.add_parser("memory", parents=[common], help="CRS vs matrix-free footprint as CSV")
    m.add_argument("--levels", default="0..14")
    m.add_argument("--index-bytes", type=int, choices=(4, 8), default=4,
                   help="index width used for the ratio columns")
    m.set_defaults(func=cmd_memory)

    c = sub.add_parser("codegen", help="write generated kernel source")
    c.add_argument("--kernel", required=True)
    c.add_argument("--level", type=int, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_codegen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, P2EcmError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
