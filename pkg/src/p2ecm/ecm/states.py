"""Pinned layer-condition states (``--lc-fixture`` files).

One whitespace-separated line per kernel and level range::

    vtv  7..10   L1  0  L3

``lc`` is ``L1`` when LC-dependent reads hit in L1 and ``L2`` otherwise;
the fourth column is the number of LC-dependent reads that also miss L2;
the last column is the dataset home.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..errors import MachineFileError
from ..stencils import KERNEL_NAMES
from .model import HOMES, LcState


def parse_level_range(text: str) -> tuple[int, int]:
    """``"7..10"`` -> (7, 10); a bare ``"9"`` -> (9, 9)."""
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
    else:
        lo = hi = int(text)
    if lo > hi:
        raise ValueError(f"empty level range {text!r}")
    return lo, hi


class LcFixture:
    def __init__(self, entries=()):
        self.entries = list(entries)  # (kernel, lo, hi, LcState)

    def lookup(self, kernel: str, level: int):
        for k, lo, hi, state in self.entries:
            if k == kernel and lo <= level <= hi:
                return state
        return None

    def ranges(self, kernel: str):
        return [(lo, hi, s) for k, lo, hi, s in self.entries if k == kernel]

    @classmethod
    def parse(cls, text: str, source="<string>") -> "LcFixture":
        entries = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].split()
            if not line:
                continue
            if len(line) != 5:
                raise MachineFileError(f"expected 5 columns, got {len(line)}", lineno, source)
            kernel, levels, lc, misses, home = line
            kernel = kernel.lower()
            if kernel not in KERNEL_NAMES:
                raise MachineFileError(f"unknown kernel {kernel!r}", lineno, source)
            if lc not in ("L1", "L2") or home not in HOMES:
                raise MachineFileError(f"bad LC state {lc}/{home}", lineno, source)
            try:
                lo, hi = parse_level_range(levels)
                state = LcState(lc == "L1", int(misses), home, pinned=True)
            except ValueError as exc:
                raise MachineFileError(str(exc), lineno, source) from None
            entries.append((kernel, lo, hi, state))
        return cls(entries)

    @classmethod
    def load(cls, path) -> "LcFixture":
        path = Path(path)
        try:
            return cls.parse(path.read_text(encoding="utf-8"), path)
        except OSError as exc:
            raise MachineFileError(f"cannot read LC fixture: {exc.strerror}", None, path) from None


def reference_states() -> LcFixture:
    """States pinned for the Skylake 8174 reference predictions."""
    text = resources.files("p2ecm.data").joinpath("skylake_reference_lc.txt").read_text(encoding="utf-8")
    return LcFixture.parse(text, "skylake_reference_lc.txt")
