"""Machine description for the ECM model and its flat ``key=value`` file format.

Recognised keys::

    name, frequency_ghz, cores_per_socket, sockets, cacheline_bytes,
    l1_bytes, l2_bytes, l3_bytes,
    l1l2_bytes_per_cycle, l1l2_duplex, l2l3_bytes_per_cycle, l2l3_duplex,
    cache_fill_fraction, flops_per_cycle, simd_bytes,
    fma_per_cycle, loads_per_cycle, stores_per_cycle,
    bw.<L>l<S>s_gbs, bw.<L>l<S>s_cycl

``bw.3l1s_gbs=87`` is the measured memory bandwidth of a kernel with three
load and one store stream; ``bw.3l1s_cycl=2.0`` the rounded cycles per
cache line used in predictions. Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from ..errors import MachineFileError

CONSISTENCY_TOLERANCE = 0.02


def cycles_per_cacheline(bandwidth_gbs: float, frequency_ghz: float, cacheline_bytes: int = 64) -> float:
    """Core cycles needed to move one cache line at a sustained bandwidth."""
    if bandwidth_gbs <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth_gbs}")
    if frequency_ghz <= 0:
        raise ValueError(f"frequency must be positive, got {frequency_ghz}")
    return cacheline_bytes * frequency_ghz / bandwidth_gbs


@dataclass(frozen=True)
class BandwidthEntry:
    load_streams: int
    store_streams: int
    bandwidth_gbs: float
    cycles_per_cacheline: float

    @property
    def ratio(self) -> float:
        return self.load_streams / self.store_streams if self.store_streams else math.inf

    @property
    def store_share(self) -> float:
        return self.store_streams / (self.load_streams + self.store_streams)

    def exact_cycles(self, frequency_ghz: float, cacheline_bytes: int = 64) -> float:
        return cycles_per_cacheline(self.bandwidth_gbs, frequency_ghz, cacheline_bytes)


def select_bandwidth(table, load_streams: int, store_streams: int) -> BandwidthEntry:
    """Entry whose load:store ratio matches, else the nearest in log-ratio.

    Ties go to the entry with the larger share of store streams.
    """
    table = list(table)
    if not table:
        raise ValueError("empty bandwidth table")
    if load_streams < 0 or store_streams < 0 or load_streams + store_streams == 0:
        raise ValueError(f"need at least one stream, got {load_streams} loads / {store_streams} stores")
    for e in table:
        if load_streams * e.store_streams == store_streams * e.load_streams:
            return e
    if store_streams == 0:
        return max(table, key=lambda e: (e.ratio, -e.store_share))
    if load_streams == 0:
        return max(table, key=lambda e: (e.store_share, -e.ratio))
    target = math.log(load_streams / store_streams)

    def distance(e):
        if e.store_streams == 0 or e.load_streams == 0:
            return math.inf
        return abs(math.log(e.ratio) - target)

    return min(table, key=lambda e: (round(distance(e), 12), -e.store_share))


@dataclass(frozen=True)
class MachineModel:
    name: str
    frequency_ghz: float
    cores_per_socket: int
    cacheline_bytes: int
    l1_bytes: int
    l2_bytes: int
    l3_bytes: int
    l1l2_bytes_per_cycle: float
    l2l3_bytes_per_cycle: float
    bandwidth_table: tuple = field(default=())
    l1l2_duplex: str = "half"
    l2l3_duplex: str = "full"
    sockets: int = 2
    # share of a cache a dataset may occupy and still be considered resident
    cache_fill_fraction: float = 0.5
    flops_per_cycle: int = 16
    simd_bytes: int = 32
    fma_per_cycle: int = 2
    loads_per_cycle: int = 2
    stores_per_cycle: int = 1

    def __post_init__(self):
        if self.cacheline_bytes <= 0:
            raise ValueError("cacheline_bytes must be positive")
        if not self.l1_bytes < self.l2_bytes < self.l3_bytes:
            raise ValueError("cache sizes must increase strictly from L1 to L3")
        for name in ("l1l2_duplex", "l2l3_duplex"):
            if getattr(self, name) not in ("half", "full"):
                raise ValueError(f"{name} must be 'half' or 'full'")
        if self.frequency_ghz <= 0 or self.cores_per_socket <= 0:
            raise ValueError("frequency and core count must be positive")
        if not 0 < self.cache_fill_fraction <= 1:
            raise ValueError("cache_fill_fraction must be in (0, 1]")
        object.__setattr__(self, "bandwidth_table", tuple(self.bandwidth_table))
        for e in self.bandwidth_table:
            exact = e.exact_cycles(self.frequency_ghz, self.cacheline_bytes)
            if abs(e.cycles_per_cacheline - exact) > CONSISTENCY_TOLERANCE * exact:
                raise ValueError(
                    f"bandwidth entry {e.load_streams}l{e.store_streams}s: {e.cycles_per_cacheline} cy/CL "
                    f"is not within 2% of {exact:.3f}")

    @property
    def elements_per_line(self) -> int:
        return self.cacheline_bytes // 8

    @property
    def peak_gflops(self) -> float:
        return self.flops_per_cycle * self.frequency_ghz

    def cycles_l1l2(self) -> float:
        return self.cacheline_bytes / self.l1l2_bytes_per_cycle

    def cycles_l2l3(self) -> float:
        return self.cacheline_bytes / self.l2l3_bytes_per_cycle

    def cache_bytes(self, level: str) -> int:
        return {"L1": self.l1_bytes, "L2": self.l2_bytes, "L3": self.l3_bytes}[level]

    def with_changes(self, **kw) -> "MachineModel":
        return replace(self, **kw)


_INT_KEYS = {"cores_per_socket", "cacheline_bytes", "l1_bytes", "l2_bytes", "l3_bytes", "sockets",
             "flops_per_cycle", "simd_bytes", "fma_per_cycle", "loads_per_cycle", "stores_per_cycle"}
_FLOAT_KEYS = {"frequency_ghz", "l1l2_bytes_per_cycle", "l2l3_bytes_per_cycle", "cache_fill_fraction"}
_STR_KEYS = {"name", "l1l2_duplex", "l2l3_duplex"}
_REQUIRED = ("frequency_ghz", "cores_per_socket", "cacheline_bytes", "l1_bytes", "l2_bytes", "l3_bytes",
             "l1l2_bytes_per_cycle", "l2l3_bytes_per_cycle")
_BW_KEY = re.compile(r"^bw\.(\d+)l(\d+)s_(gbs|cycl)$")


def parse_machine(text: str, source="<string>") -> MachineModel:
    values: dict = {}
    lines: dict = {}
    bw: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MachineFileError(f"expected key=value, got {raw.strip()!r}", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        m = _BW_KEY.match(key)
        try:
            if m:
                streams = (int(m.group(1)), int(m.group(2)))
                bw.setdefault(streams, {})[m.group(3)] = float(value)
                lines[streams] = lineno
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _STR_KEYS:
                values[key] = value
            else:
                raise MachineFileError(f"unknown key {key!r}", lineno, source)
        except ValueError as exc:
            if isinstance(exc, MachineFileError):
                raise
            raise MachineFileError(f"bad value for {key}: {value!r}", lineno, source) from None
        lines.setdefault(key, lineno)
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise MachineFileError(f"missing keys: {', '.join(missing)}", None, source)
    table = []
    for (loads, stores), entry in sorted(bw.items()):
        if set(entry) != {"gbs", "cycl"}:
            raise MachineFileError(f"bw.{loads}l{stores}s needs both _gbs and _cycl", lines[(loads, stores)], source)
        table.append(BandwidthEntry(loads, stores, entry["gbs"], entry["cycl"]))
    values.setdefault("name", Path(str(source)).stem)
    try:
        return MachineModel(bandwidth_table=tuple(table), **values)
    except ValueError as exc:
        raise MachineFileError(str(exc), None, source) from None


def load_machine(path) -> MachineModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MachineFileError(f"cannot read machine file: {exc.strerror}", None, path) from None
    return parse_machine(text, path)


def default_machine() -> MachineModel:
    """The dual-socket Skylake Xeon Platinum 8174 node at a fixed 2.7 GHz."""
    text = resources.files("p2ecm.data").joinpath("skylake_8174.machine").read_text(encoding="utf-8")
    return parse_machine(text, "skylake_8174.machine")


def dump_machine(m: MachineModel) -> str:
    out = [f"name={m.name}"]
    for key in ("frequency_ghz", "cores_per_socket", "sockets", "cacheline_bytes", "l1_bytes", "l2_bytes",
                "l3_bytes", "l1l2_bytes_per_cycle", "l1l2_duplex", "l2l3_bytes_per_cycle", "l2l3_duplex",
                "cache_fill_fraction", "flops_per_cycle", "simd_bytes", "fma_per_cycle", "loads_per_cycle",
                "stores_per_cycle"):
        out.append(f"{key}={getattr(m, key)}")
    for e in m.bandwidth_table:
        out.append(f"bw.{e.load_streams}l{e.store_streams}s_gbs={e.bandwidth_gbs}")
        out.append(f"bw.{e.load_streams}l{e.store_streams}s_cycl={e.cycles_per_cacheline}")
    return "\n".join(out) + "\n"
