"""Verification, benchmarking and reporting front end."""

from .bench import BenchResult, ScalingResult, bench_kernel, compare_single, run_scaling
from .verify import CaseResult, run_verify

__all__ = ["BenchResult", "CaseResult", "ScalingResult", "bench_kernel", "compare_single", "run_scaling",
           "run_verify"]
