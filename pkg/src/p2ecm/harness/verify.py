"""Hermetic self-checks: no machine file, no timing, deterministic outcome."""

from __future__ import annotations

from dataclasses import dataclass

from .. import codegen, grid, kernels, sparse
from ..ecm import classify_accesses, default_machine, predict_kernel, reference_states, replay_counts
from ..fields import P2Operator, allocate, pseudo_random
from ..stencils import BUILTIN_SPECS, KERNEL_NAMES

MAX_VERIFY_LEVEL = 6
SPMV_TOLERANCE = 1e-13

EXPECTED_CLASSES = {"vtv": (1, 4, 2), "etv": (3, 5, 4), "vte": (1, 3, 2), "ete": (3, 3, 3)}

# Exact byte count of the CRS footprint at level 10 with 4-byte indices. The
# published rounded figure is 332.1 MB; see the footprint suite.
CRS_TOTAL_L10 = 331_927_800

ECM_CASES = (
    # kernel, level, shorthand, GFLOP/s
    ("vtv", 10, "{10 || 8 | 3 | 8 | -}", 14.78),
    ("vtv", 12, "{10 || 8 | 5 | 8 | 5}", 10.80),
    ("etv", 8, "{24 || 12 | 5 | 16 | -}", 15.05),
    ("etv", 12, "{24 || 12 | 9 | 24 | 8}", 9.37),
    ("vte", 8, "{14.8 || 12 | 7 | 16 | -}", 12.96),
    ("vte", 10, "{14.8 || 12 | 9 | 24 | -}", 10.08),
    ("vte", 12, "{14.8 || 12 | 9 | 24 | 11.6}", 8.01),
    ("ete", 7, "{20 || 10 | 9 | 24 | -}", 13.56),
)


@dataclass(frozen=True)
class CaseResult:
    suite: str
    case: str
    ok: bool
    observed: str = ""
    expected: str = ""

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        text = f"[{status}] {self.suite}: {self.case}"
        if not self.ok or self.observed:
            text += f" (observed {self.observed}, expected {self.expected})"
        return text


def _bits(f) -> bytes:
    return f.flat().tobytes()


def suite_kernels(max_level: int, seed: int = 0) -> list[CaseResult]:
    """Vectorised kernels, interpreter and generated plans agree bit for bit."""
    out = []
    op = P2Operator.random(seed)
    for level in range(2, max_level + 1):
        src = allocate(level, pseudo_random(seed))
        for name in KERNEL_NAMES:
            spec = BUILTIN_SPECS[name]
            a, b, c = allocate(level), allocate(level), allocate(level)
            kernels.apply_kernel(name, op.weights(name), src, a)
            kernels.reference_apply(spec, op.weights(name), src.arrays("src"), b.arrays("dst"))
            plan = codegen.generate(spec, level)
            codegen.execute_plan(plan, op.weights(name), src.arrays("src"), c.arrays("dst"))
            ok = _bits(a) == _bits(b) == _bits(c)
            out.append(CaseResult("kernels", f"{name} level {level}", ok,
                                  "" if ok else "bitwise mismatch", "" if ok else "identical"))
        a, b, c = allocate(level), allocate(level), allocate(level)
        kernels.apply_p2(op, src, a)
        kernels.apply_p2(op, src, b, fused=True)
        kernels.reference_apply_p2(op, src, c)
        ok = _bits(a) == _bits(b) == _bits(c)
        out.append(CaseResult("kernels", f"apply_p2 level {level}", ok,
                              "" if ok else "bitwise mismatch", "" if ok else "identical"))
    return out


def suite_spmv(max_level: int, seeds=range(3), perturb: float = 0.0) -> list[CaseResult]:
    """Assembled CRS matrix times vector against the matrix-free apply.

    A non-zero ``perturb`` shifts the first vertex weight of the table the
    matrix-free side uses, simulating a corrupted stencil table.
    """
    out = []
    for seed in seeds:
        op = P2Operator.random(seed)
        mf_op = perturbed_operator(seed, delta=perturb) if perturb else op
        for level in range(2, max_level + 1):
            mat = sparse.assemble(op, level)
            x = sparse.zero_boundary(allocate(level, pseudo_random(seed)))
            y = allocate(level)
            kernels.apply_p2(mf_op, x, y)
            diff = sparse.relative_difference(mat, x.flat(), y.flat(), sparse.interior_rows(level))
            out.append(CaseResult("spmv", f"seed {seed} level {level}", diff <= SPMV_TOLERANCE,
                                  f"{diff:.2e}", f"<= {SPMV_TOLERANCE:.0e}"))
    return out


def suite_classification() -> list[CaseResult]:
    out = []
    for name in KERNEL_NAMES:
        spec = BUILTIN_SPECS[name]
        counts = classify_accesses(spec).counts
        oracle = replay_counts(spec)
        expected = EXPECTED_CLASSES[name]
        out.append(CaseResult("classification", name, counts == expected == oracle,
                              f"{counts} replay {oracle}", str(expected)))
    return out


def suite_footprint() -> list[CaseResult]:
    out = []
    counts = tuple(grid.dof_counts(10))
    out.append(CaseResult("footprint", "dof counts level 10", counts == (525825, 524800, 2100225),
                          str(counts), "(525825, 524800, 2100225)"))
    fp = sparse.footprint_model(10, 4)
    mb = fp.megabytes()
    out.append(CaseResult("footprint", "crs bytes level 10", fp.crs_total == CRS_TOTAL_L10,
                          str(fp.crs_total), f"{CRS_TOTAL_L10} (published rounding 332.1 MB)"))
    for key, want in (("matrix_free_total", 33.6), ("hyteg_traffic_total", 67.2)):
        got = mb[key]
        out.append(CaseResult("footprint", f"{key} level 10", abs(got - want) <= 0.1, f"{got:.2f} MB", f"{want} MB"))
    for key, want in (("crs_over_matrix_free", 9.9), ("crs_over_hyteg", 4.9)):
        got = getattr(fp, key)
        out.append(CaseResult("footprint", key, abs(got - want) <= 0.05, f"{got:.3f}", str(want)))
    level = sparse.index_overflow_level(4, 2)
    out.append(CaseResult("footprint", "int32 overflow level (2 triangles)", level == 13, str(level), "13"))
    return out


def suite_codegen() -> list[CaseResult]:
    gen = codegen.generate(BUILTIN_SPECS["vtv"], 10)
    text = gen.source_text
    out = [CaseResult("codegen", f"vtv level 10 contains {s!r}", s in text)
           for s in ("1026*ctr_2", "- ((ctr_2*(ctr_2 + 1)) / (2))", "1024 - ctr_2")]
    out.append(CaseResult("codegen", "vtv hoisted weights", len(gen.hoisted) == 7, str(len(gen.hoisted)), "7"))
    again = codegen.generate(BUILTIN_SPECS["vtv"], 10).source_text
    out.append(CaseResult("codegen", "deterministic output", again == text))
    return out


def suite_ecm() -> list[CaseResult]:
    machine = default_machine()
    states = reference_states()
    out = []
    for name, level, shorthand, gflops in ECM_CASES:
        pred = predict_kernel(name, level, machine, states.lookup(name, level))
        got = pred.shorthand()
        ok = got == shorthand and abs(pred.predicted_gflops - gflops) <= 0.1
        out.append(CaseResult("ecm", f"{name} level {level}", ok,
                              f"{got} {pred.predicted_gflops:.2f}", f"{shorthand} {gflops:.2f}"))
    return out


def run_verify(max_level: int = MAX_VERIFY_LEVEL, perturb: float = 0.0) -> list[CaseResult]:
    if not 2 <= max_level <= MAX_VERIFY_LEVEL:
        raise ValueError(f"max_level must be in 2..{MAX_VERIFY_LEVEL}, got {max_level}")
    return (suite_kernels(max_level) + suite_spmv(max_level, perturb=perturb) + suite_classification()
            + suite_footprint() + suite_codegen() + suite_ecm())


def perturbed_operator(seed: int = 0, kernel: str = "vtv", index: int = 0, delta: float = 1e-3) -> P2Operator:
    """``P2Operator.random(seed)`` with one weight shifted by ``delta``."""
    op = P2Operator.random(seed)
    w = list(op.weights(kernel))
    w[index] += delta
    return P2Operator(**{**{k: op.weights(k) for k in KERNEL_NAMES}, kernel: tuple(w)})


def failed(results) -> list[CaseResult]:
    return [r for r in results if not r.ok]


def summary(results) -> dict:
    by_suite: dict = {}
    for r in results:
        passed, total = by_suite.get(r.suite, (0, 0))
        by_suite[r.suite] = (passed + r.ok, total + 1)
    return by_suite

