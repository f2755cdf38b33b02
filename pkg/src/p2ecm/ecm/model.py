"""ECM assembly: in-core cycles, layer conditions, cache traffic, prediction.

All times are core cycles per work unit, where a work unit is the set of
iterations that consume one cache line of each stream (8 iterations for
8-byte values on 64-byte lines).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .. import grid
from ..stencils import BUILTIN_SPECS, StencilAccessSpec
from .classify import AccessClassification, classify_accesses
from .machine import MachineModel, select_bandwidth

HOMES = ("L1", "L2", "L3", "MEM")


@dataclass(frozen=True)
class KernelCoreModel:
    name: str
    mults: int
    adds: int
    loads: int    # distinct scalar loads per iteration
    stores: int   # scalar stores per iteration
    t_ol_fixture: float = None
    t_nol_fixture: float = None

    @property
    def flops_per_iteration(self) -> int:
        return self.mults + self.adds

    @classmethod
    def from_spec(cls, spec: StencilAccessSpec, t_ol=None, t_nol=None) -> "KernelCoreModel":
        mults = spec.n_weights
        adds = sum(len(r) - 1 for r in spec.accesses)
        loads = sum(len(spec.offsets(a)) for a in spec.sources)
        return cls(spec.name, mults, adds, loads, len(spec.targets), t_ol, t_nol)


# In-core times from the Intel Architecture Code Analyzer on Skylake (AVX2).
_IN_CORE_FIXTURES = {
    "vtv": (10.0, 8.0),
    "etv": (24.0, 12.0),
    "vte": (14.8, 12.0),
    "ete": (20.0, 10.0),
}


def core_model(kernel: str) -> KernelCoreModel:
    t_ol, t_nol = _IN_CORE_FIXTURES[kernel]
    return KernelCoreModel.from_spec(BUILTIN_SPECS[kernel], t_ol, t_nol)


def theoretical_core_cycles(core: KernelCoreModel, machine: MachineModel) -> tuple[float, float]:
    """Port-throughput bound of the vectorised loop body, per work unit.

    Every multiply becomes one lane of a fused multiply-add; loads and
    stores are vector-wide.
    """
    lanes = machine.simd_bytes // 8
    vectors_per_unit = machine.elements_per_line // lanes
    fma = core.mults * vectors_per_unit
    loads = core.loads * vectors_per_unit
    stores = core.stores * vectors_per_unit
    t_ol = math.ceil(fma / machine.fma_per_cycle)
    t_nol = max(math.ceil(loads / machine.loads_per_cycle), math.ceil(stores / machine.stores_per_cycle))
    return float(t_ol), float(t_nol)


def layer_condition(classification: AccessClassification, level: int, cache_bytes: int) -> bool:
    """Whether every row needed for LC-dependent reuse fits in the cache.

    Uses the nominal row length ``2**level`` throughout the sweep.
    """
    n = grid.row_extent(level)
    return classification.rows_in_flight * n * 8 <= cache_bytes


def dataset_bytes(spec: StencilAccessSpec, level: int) -> int:
    arrays = list(spec.sources) + list(spec.targets)
    return sum(8 * grid.layout_size(spec.layout_of(a), level) for a in arrays)


def dataset_home(spec: StencilAccessSpec, level: int, machine: MachineModel) -> str:
    """Innermost of L2/L3 that holds every touched array, else main memory.

    A cache counts as holding the data while the data fills at most
    ``machine.cache_fill_fraction`` of it.
    """
    size = dataset_bytes(spec, level)
    for home in ("L2", "L3"):
        if size <= machine.cache_fill_fraction * machine.cache_bytes(home):
            return home
    return "MEM"


@dataclass(frozen=True)
class LcState:
    l1_pink_hits: bool
    l2_pink_miss_count: int
    dataset_home: str
    pinned: bool = False

    def __post_init__(self):
        if self.dataset_home not in HOMES:
            raise ValueError(f"dataset_home must be one of {HOMES}")
        if self.l2_pink_miss_count < 0:
            raise ValueError("l2_pink_miss_count must be >= 0")

    @property
    def lc_level(self) -> str:
        return "L1" if self.l1_pink_hits else "L2"

    @property
    def label(self) -> str:
        tag = self.lc_level
        if not self.l1_pink_hits and self.l2_pink_miss_count:
            tag += f"-{self.l2_pink_miss_count}miss"
        return f"{tag}/{self.dataset_home}"


def lc_policy(classification: AccessClassification, spec: StencilAccessSpec, level: int,
              machine: MachineModel) -> LcState:
    """LC state derived from cache capacities alone."""
    l1 = layer_condition(classification, level, machine.l1_bytes)
    l2 = layer_condition(classification, level, machine.l2_bytes)
    misses = 0 if (l1 or l2) else classification.lc_dependent
    return LcState(l1, misses, dataset_home(spec, level, machine))


@dataclass(frozen=True)
class Traffic:
    t_l1l2: float
    t_l2l3: float
    t_l3mem: float


def traffic(classification: AccessClassification, state: LcState, machine: MachineModel,
            exact_bandwidth: bool = False) -> Traffic:
    """Cache-line transfer cycles per work unit across each interface.

    Stores cause a write-allocate load on every cache interface. A
    half-duplex interface serialises loads and stores; a full-duplex one
    only pays for loads. Memory traffic counts application-level streams,
    since the bandwidth table already includes write-allocate.
    """
    stores = classification.store_streams
    new = classification.new
    pinks = classification.lc_dependent
    l1_loads = stores + new + (0 if state.l1_pink_hits else pinks)
    l2_misses = 0 if state.l1_pink_hits else min(state.l2_pink_miss_count, pinks)
    l2_loads = stores + new + l2_misses

    def lines(loads, duplex):
        return loads + stores if duplex == "half" else loads

    t_l1l2 = lines(l1_loads, machine.l1l2_duplex) * machine.cycles_l1l2()
    t_l2l3 = lines(l2_loads, machine.l2l3_duplex) * machine.cycles_l2l3()
    t_mem = 0.0
    if state.dataset_home == "MEM":
        entry = select_bandwidth(machine.bandwidth_table, new, stores)
        cy = entry.exact_cycles(machine.frequency_ghz, machine.cacheline_bytes) if exact_bandwidth \
            else entry.cycles_per_cacheline
        t_mem = (new + stores) * cy
    return Traffic(t_l1l2, t_l2l3, t_mem)


@dataclass(frozen=True)
class EcmPrediction:
    kernel: str
    level: int
    state: LcState
    t_ol: float
    t_nol: float
    t_l1l2: float
    t_l2l3: float
    t_l3mem: float
    flops_per_unit: int
    frequency_ghz: float

    @property
    def cumulative(self) -> tuple[float, float, float, float]:
        c1 = self.t_nol
        c2 = c1 + self.t_l1l2
        c3 = c2 + self.t_l2l3
        return c1, c2, c3, c3 + self.t_l3mem

    @property
    def chain(self) -> tuple[float, ...]:
        """Per-home predictions ``max(T_OL, cumulative)`` up to the dataset home."""
        upto = HOMES.index(self.state.dataset_home) + 1
        return tuple(max(self.t_ol, c) for c in self.cumulative[:upto])

    @property
    def predicted_cycles(self) -> float:
        return max(self.t_ol, self.cumulative[HOMES.index(self.state.dataset_home)])

    @property
    def predicted_gflops(self) -> float:
        return self.flops_per_unit * self.frequency_ghz / self.predicted_cycles

    @property
    def terms(self) -> tuple:
        mem = self.t_l3mem if self.state.dataset_home == "MEM" else None
        return self.t_ol, self.t_nol, self.t_l1l2, self.t_l2l3, mem

    def shorthand(self) -> str:
        t = [_fmt(v) for v in self.terms]
        return f"{{{t[0]} || {t[1]} | {t[2]} | {t[3]} | {t[4]}}}"

    def chain_text(self) -> str:
        return "{" + " ⌉ ".join(_fmt(c) for c in self.chain) + "}"


def _fmt(v) -> str:
    if v is None:
        return "-"
    return f"{v:g}" if float(v) == round(float(v), 1) else f"{v:.2f}"


def predict(core: KernelCoreModel, classification: AccessClassification, state: LcState,
            machine: MachineModel, level: int = 0, use_theoretical: bool = False,
            exact_bandwidth: bool = False) -> EcmPrediction:
    if use_theoretical or core.t_ol_fixture is None:
        t_ol, t_nol = theoretical_core_cycles(core, machine)
    else:
        t_ol, t_nol = core.t_ol_fixture, core.t_nol_fixture
    tr = traffic(classification, state, machine, exact_bandwidth)
    return EcmPrediction(core.name, level, state, t_ol, t_nol, tr.t_l1l2, tr.t_l2l3, tr.t_l3mem,
                         machine.elements_per_line * core.flops_per_iteration, machine.frequency_ghz)


def predict_kernel(kernel: str, level: int, machine: MachineModel, state: LcState = None,
                   **kw) -> EcmPrediction:
    """Full pipeline for a built-in kernel; LC state from policy unless given."""
    spec = BUILTIN_SPECS[kernel]
    cls = classify_accesses(spec)
    if state is None:
        state = lc_policy(cls, spec, level, machine)
    return predict(core_model(kernel), cls, state, machine, level=level, **kw)
