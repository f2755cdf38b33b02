"""Kernel timing and weak-scaling runs.

Timing policy: fields are allocated and touched once (one untimed apply),
then the repetition count is doubled until a single window lasts at least
``min_seconds``. Several windows of that length are timed with a monotonic
clock and the fastest is reported. Flops come from interior-domain sizes.
"""

from __future__ import annotations

import mmap
import multiprocessing as mp
import os
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import grid, kernels
from ..fields import P2Operator, allocate, pseudo_random

MIN_SECONDS = 0.2
WINDOWS = 5


@dataclass(frozen=True)
class BenchResult:
    kernel: str
    level: int
    repetitions: int
    wall_seconds: float
    iterations_done: int
    achieved_gflops: float
    predicted_gflops: float = float("nan")

    @property
    def flops_per_iteration(self) -> int:
        return kernels.flops_per_point(self.kernel)

    @property
    def ratio(self) -> float:
        return self.achieved_gflops / self.predicted_gflops


@dataclass(frozen=True)
class ScalingResult:
    threads: int
    aggregate_gflops: float
    per_thread_gflops: float
    predicted_aggregate: float = float("nan")


def fields_bytes(level: int) -> int:
    """Bytes held by one source and one destination P2 function."""
    return 2 * 8 * grid.dof_counts(level).total


def available_memory() -> int | None:
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return None


def fits_in_memory(level: int, copies: int = 1, headroom: float = 1.5) -> bool:
    free = available_memory()
    return free is None or copies * fields_bytes(level) * headroom <= free


PAGE = 4096
# distinct sub-page offsets keep the arrays out of each other's 4 KiB alias set
STAGGER = 448


def _place(fields, first_slot: int):
    """Move every sub-field into fresh anonymous pages with a fixed stagger.

    Heap allocations otherwise land at arbitrary relative offsets (and, in a
    long-lived process, on recycled memory), and the resulting cache-set
    aliasing changes throughput from one run to the next.
    """
    for k, f in enumerate(fields):
        offset = ((first_slot + k) * STAGGER) % PAGE
        n = len(f) * 8
        raw = np.frombuffer(mmap.mmap(-1, n + PAGE), dtype=np.uint8)
        buf = raw[offset:offset + n].view(np.float64)
        buf[:] = f.values
        f.values = buf


def _setup(kernel: str, level: int, seed: int):
    src = allocate(level, pseudo_random(seed))
    dst = allocate(level)
    _place(src.parts(), 0)
    _place(dst.parts(), 4)
    weights = P2Operator.random(seed).weights(kernel)
    return src, dst, weights


def _time(fn, reps: int) -> float:
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return time.perf_counter() - t0


def _best_window(run, reps: int, windows: int = WINDOWS, min_seconds: float = MIN_SECONDS) -> tuple[float, int]:
    """Fastest of ``windows`` timed windows, each at least ``min_seconds`` long."""
    while True:
        best = min(_time(run, reps) for _ in range(windows))
        if best >= min_seconds:
            return best, reps
        # a window came in under the minimum; lengthen and retime
        reps *= 2


def bench_kernel(kernel: str, level: int, *, seed: int = 0, min_seconds: float = MIN_SECONDS,
                 windows: int = WINDOWS, predicted_gflops: float = float("nan"),
                 reps: int | None = None) -> BenchResult:
    src, dst, weights = _setup(kernel, level, seed)

    def run():
        kernels.apply_kernel(kernel, weights, src, dst)

    run()  # pre-touch
    if reps is None:
        reps = 1
        while _time(run, reps) < min_seconds:
            reps *= 2
    best, reps = _best_window(run, reps, windows, min_seconds)
    iterations = reps * kernels.kernel_domain(kernel, level).size
    gflops = kernels.flops_per_point(kernel) * iterations / best / 1e9
    return BenchResult(kernel, level, reps, best, iterations, gflops, predicted_gflops)


def physical_cores() -> list[int]:
    """Usable logical CPUs, one per physical core, ordered socket by socket.

    Falls back to the plain affinity set when the topology is not exposed.
    """
    try:
        cpus = sorted(os.sched_getaffinity(0))
    except AttributeError:
        return list(range(os.cpu_count() or 1))
    seen, ordered = set(), []
    for cpu in cpus:
        topo = Path(f"/sys/devices/system/cpu/cpu{cpu}/topology")
        try:
            key = (int((topo / "physical_package_id").read_text()), int((topo / "core_id").read_text()))
        except (OSError, ValueError):
            key = (0, cpu)
        if key not in seen:
            seen.add(key)
            ordered.append((key, cpu))
    return [cpu for _, cpu in sorted(ordered)]


def _worker(rank, cpu, kernel, level, seed, reps, barrier, results):
    if cpu is not None:
        try:
            os.sched_setaffinity(0, {cpu})
        except (AttributeError, OSError):
            pass
    src, dst, weights = _setup(kernel, level, seed)

    def run():
        kernels.apply_kernel(kernel, weights, src, dst)

    run()
    barrier.wait()
    best, reps = _best_window(run, reps)
    results.put((rank, reps / best, dst.flat().tobytes() if level <= 4 else b""))


def run_scaling(kernel: str, level: int, threads: int, *, seed: int = 0, reps: int | None = None,
                predicted=None) -> tuple[ScalingResult, list[bytes]]:
    """Weak scaling: ``threads`` processes, each applying the kernel to its own triangle.

    Workers are pinned to one physical core each, filling the first socket
    before the next, when the platform allows it. ``reps`` defaults to the
    single-process auto-tuned count so every worker times windows of at
    least the minimum length on its own.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if reps is None:
        reps = bench_kernel(kernel, level, seed=seed).repetitions
    cores = physical_cores()
    pinned = hasattr(os, "sched_setaffinity") and threads <= len(cores)
    if not pinned:
        warnings.warn(f"cannot pin {threads} workers to distinct physical cores; running unpinned",
                      RuntimeWarning, stacklevel=2)
    ctx = mp.get_context("spawn")
    barrier = ctx.Barrier(threads)
    results = ctx.Queue()
    procs = [ctx.Process(target=_worker, args=(r, cores[r] if pinned else None, kernel, level, seed, reps,
                                               barrier, results))
             for r in range(threads)]
    try:
        for p in procs:
            p.start()
    except OSError as exc:
        for p in procs:
            if p.is_alive():
                p.terminate()
        raise RuntimeError(f"failed to spawn worker: {exc}") from exc
    collected = sorted(results.get() for _ in procs)
    for p in procs:
        p.join()
        if p.exitcode != 0:
            raise RuntimeError(f"worker exited with code {p.exitcode}")
    # each worker reports applies per second; a worker that had to lengthen its windows still counts fully
    per_point = kernels.kernel_domain(kernel, level).size * kernels.flops_per_point(kernel)
    aggregate = sum(rate for _, rate, _ in collected) * per_point / 1e9
    result = ScalingResult(threads, aggregate, aggregate / threads,
                           float("nan") if predicted is None else predicted)
    return result, [d for _, _, d in collected]


def _window_server(conn, cpu, kernel, level, seed):
    if cpu is not None:
        try:
            os.sched_setaffinity(0, {cpu})
        except (AttributeError, OSError):
            pass
    src, dst, weights = _setup(kernel, level, seed)

    def run():
        kernels.apply_kernel(kernel, weights, src, dst)

    run()
    conn.send(None)
    while (reps := conn.recv()) is not None:
        conn.send(_time(run, reps))


def _lockstep(kernel, level, seed, reps, windows, best):
    ctx = mp.get_context("spawn")
    pinned = hasattr(os, "sched_setaffinity")
    pipes, procs = [], []
    for cpu in (None, physical_cores()[0] if pinned else None):
        ours, theirs = ctx.Pipe()
        proc = ctx.Process(target=_window_server, args=(theirs, cpu, kernel, level, seed))
        proc.start()
        pipes.append(ours)
        procs.append(proc)
    try:
        for c in pipes:
            c.recv()
        for i in range(windows):
            for side in ((0, 1) if i % 2 == 0 else (1, 0)):
                pipes[side].send(reps)
                best[side] = min(best[side], pipes[side].recv())
    finally:
        for c in pipes:
            c.send(None)
        for proc in procs:
            proc.join()


def compare_single(kernel: str, level: int, pairs: int = 5, windows: int = 10, *,
                   seed: int = 0) -> tuple[float, float]:
    """Best-window throughput of a bench-style process and a pinned 1-worker scaling process.

    Two effects would otherwise swamp a few-percent comparison on a shared
    host. Throughput drifts between phases lasting seconds, so the two
    processes stay alive side by side and time alternate windows. And each
    interpreter process draws its own memory layout and hash seed, so the
    comparison is repeated over ``pairs`` fresh process pairs. Each side
    reports its fastest window overall.
    """
    reps = bench_kernel(kernel, level, seed=seed).repetitions
    while True:
        best = [float("inf"), float("inf")]
        for _ in range(pairs):
            _lockstep(kernel, level, seed, reps, windows, best)
        if min(best) >= MIN_SECONDS:
            break
        reps *= 2
    flops = reps * kernels.kernel_domain(kernel, level).size * kernels.flops_per_point(kernel)
    return flops / best[0] / 1e9, flops / best[1] / 1e9
