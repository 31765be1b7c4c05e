"""Core types and trace I/O for the tiered-memory simulator.

A trace is a cycle-ordered sequence of page accesses.  Two on-disk formats
are supported, chosen by file extension:

* binary (default): a 20-byte header -- 8-byte magic ``TIERTRC1``, u32
  format version (currently 1), u64 record count -- followed by packed
  13-byte little-endian records ``(u64 cycle, u32 page, u8 op)`` where op
  0 is a read and 1 is a write.
* text (``.csv`` / ``.txt``): one ``cycle,page,R`` or ``cycle,page,W`` line
  per record; ``#`` comment lines and blank lines are ignored on read.

In memory a trace is a numpy structured array with fields ``cycle``,
``page``, ``op`` (see :data:`EVENT_DTYPE`); page indices are 32-bit.
"""

from __future__ import annotations

import enum
import io
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

TRACE_MAGIC = b"TIERTRC1"
TRACE_VERSION = 1
_HEADER = struct.Struct("<8sIQ")
_TEXT_EXTENSIONS = {".csv", ".txt"}

#: In-memory trace layout.  Little-endian and alignment-free, so a trace
#: array's raw bytes are exactly the binary record stream.
EVENT_DTYPE = np.dtype([("cycle", "<u8"), ("page", "<u4"), ("op", "u1")])
assert EVENT_DTYPE.itemsize == 13

#: PRNG backing every stochastic component; recorded in report metadata.
RNG_ALGORITHM = "numpy-pcg64"


class Op(enum.IntEnum):
    """Access direction, encoded as one byte in trace records."""

    READ = 0
    WRITE = 1


class AccessEvent(NamedTuple):
    """A single page access: when, where, and which direction."""

    cycle: int
    page: int
    op: Op


class ConfigError(ValueError):
    """Invalid configuration or experiment setup (CLI exit code 1)."""


class TraceIOError(OSError):
    """Unreadable/unwritable trace file (CLI exit code 2)."""


class TraceFormatError(TraceIOError):
    """Malformed trace content; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class SimulationError(RuntimeError):
    """Inconsistent simulation state, e.g. an access outside the
    configured address space (CLI exit code 3)."""


@dataclass
class SimConfig:
    """Capacities and device timings for a two-tier memory system.

    ``fast_pages`` + ``slow_pages`` is the address-space size in pages;
    every trace page index must fall below it.  Latencies are per-access
    device latencies in nanoseconds.
    """

    fast_pages: int
    slow_pages: int
    fast_latency_ns: float = 120.0
    slow_latency_ns: float = 430.0
    page_bits: int = 32
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.fast_pages < 0 or self.slow_pages < 0:
            raise ConfigError("tier capacities must be nonnegative")
        if self.fast_pages + self.slow_pages <= 0:
            raise ConfigError("at least one tier must have capacity")
        if self.fast_latency_ns <= 0 or self.slow_latency_ns <= 0:
            raise ConfigError("latencies must be positive")
        if not 1 <= self.page_bits <= 32:
            raise ConfigError("page_bits must be in [1, 32]")
        if self.fast_pages + self.slow_pages > 1 << self.page_bits:
            raise ConfigError("address space exceeds 2**page_bits pages")

    @property
    def total_pages(self) -> int:
        return self.fast_pages + self.slow_pages


def make_rng(seed: int, *stream: int | str) -> np.random.Generator:
    """Deterministic generator for a component stream.

    Distinct ``stream`` keys (small ints or short labels) derived from the
    same experiment seed give statistically independent streams, so
    components don't perturb each other's draws.  String keys are folded
    through crc32, which is stable across processes (unlike ``hash``).
    """
    keys = [zlib.crc32(s.encode()) if isinstance(s, str) else s for s in stream]
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def events_to_array(events: Iterable[AccessEvent] | Sequence[tuple]) -> np.ndarray:
    """Pack an iterable of (cycle, page, op) into a trace array."""
    rows = list(events)
    out = np.zeros(len(rows), dtype=EVENT_DTYPE)
    for i, (cycle, page, op) in enumerate(rows):
        out[i] = (cycle, page, int(op))
    return out


def array_to_events(arr: np.ndarray) -> list[AccessEvent]:
    return [
        AccessEvent(int(c), int(p), Op(int(o)))
        for c, p, o in zip(arr["cycle"], arr["page"], arr["op"])
    ]


def _is_text_path(path: Path) -> bool:
    return path.suffix.lower() in _TEXT_EXTENSIONS


def _validate_trace(arr: np.ndarray, *, sorted_required: bool) -> None:
    if arr.dtype != EVENT_DTYPE:
        raise ConfigError(f"trace array must have dtype {EVENT_DTYPE}")
    if not np.all((arr["op"] == Op.READ) | (arr["op"] == Op.WRITE)):
        bad = int(np.flatnonzero((arr["op"] != Op.READ) & (arr["op"] != Op.WRITE))[0])
        raise ConfigError(f"record {bad}: op must be 0 (read) or 1 (write)")
    if sorted_required and arr.size > 1 and np.any(np.diff(arr["cycle"].astype(np.int64)) < 0):
        bad = int(np.flatnonzero(np.diff(arr["cycle"].astype(np.int64)) < 0)[0])
        raise ConfigError(f"trace not sorted by cycle at record {bad + 1}")


def write_trace(events: np.ndarray | Iterable[AccessEvent], path: str | Path) -> None:
    """Write a cycle-sorted trace; format chosen by extension.

    Raises :class:`ConfigError` for malformed/unsorted events and
    :class:`TraceIOError` if the file cannot be written.
    """
    path = Path(path)
    arr = events if isinstance(events, np.ndarray) else events_to_array(events)
    _validate_trace(arr, sorted_required=True)
    try:
        if _is_text_path(path):
            with open(path, "w", encoding="ascii") as fh:
                for cycle, page, op in zip(arr["cycle"], arr["page"], arr["op"]):
                    fh.write(f"{cycle},{page},{'R' if op == Op.READ else 'W'}\n")
        else:
            with open(path, "wb") as fh:
                fh.write(_HEADER.pack(TRACE_MAGIC, TRACE_VERSION, arr.size))
                fh.write(arr.tobytes())
    except OSError as exc:
        raise TraceIOError(f"cannot write trace {path}: {exc}") from exc


def _read_binary(path: Path) -> np.ndarray:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise TraceIOError(f"cannot read trace {path}: {exc}") from exc
    if len(data) < _HEADER.size:
        raise TraceFormatError("truncated header", offset=len(data))
    magic, version, count = _HEADER.unpack_from(data)
    if magic != TRACE_MAGIC:
        raise TraceFormatError(f"bad magic {magic!r}", offset=0)
    if version != TRACE_VERSION:
        raise TraceFormatError(f"unsupported trace version {version}", offset=8)
    body = len(data) - _HEADER.size
    if body != count * EVENT_DTYPE.itemsize:
        raise TraceFormatError(
            f"header promises {count} records ({count * EVENT_DTYPE.itemsize} bytes), "
            f"file body has {body} bytes",
            offset=_HEADER.size + min(body, count * EVENT_DTYPE.itemsize),
        )
    arr = np.frombuffer(data, dtype=EVENT_DTYPE, count=count, offset=_HEADER.size).copy()
    bad_op = (arr["op"] != Op.READ) & (arr["op"] != Op.WRITE)
    if np.any(bad_op):
        i = int(np.flatnonzero(bad_op)[0])
        raise TraceFormatError(
            f"record {i}: op byte {arr['op'][i]} is neither 0 nor 1",
            offset=_HEADER.size + i * EVENT_DTYPE.itemsize + 12,
        )
    return arr


def _read_text(path: Path) -> np.ndarray:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise TraceIOError(f"cannot read trace {path}: {exc}") from exc
    rows: list[tuple[int, int, int]] = []
    offset = 0
    for line in io.BytesIO(raw):
        stripped = line.strip()
        if stripped and not stripped.startswith(b"#"):
            parts = stripped.split(b",")
            if len(parts) != 3:
                raise TraceFormatError("expected 'cycle,page,R|W'", offset=offset)
            try:
                cycle, page = int(parts[0]), int(parts[1])
            except ValueError:
                raise TraceFormatError("non-integer cycle or page", offset=offset) from None
            opc = parts[2].strip()
            if opc == b"R":
                op = Op.READ
            elif opc == b"W":
                op = Op.WRITE
            else:
                raise TraceFormatError(f"op must be R or W, got {opc!r}", offset=offset)
            if not 0 <= cycle < 1 << 64:
                raise TraceFormatError("cycle out of u64 range", offset=offset)
            if not 0 <= page < 1 << 32:
                raise TraceFormatError("page out of u32 range", offset=offset)
            rows.append((cycle, page, op))
        offset += len(line)
    out = np.zeros(len(rows), dtype=EVENT_DTYPE)
    if rows:
        cyc, pg, op = zip(*rows)
        out["cycle"], out["page"], out["op"] = cyc, pg, op
    return out


def read_trace(path: str | Path) -> np.ndarray:
    """Read a trace file into a structured array, in file order.

    Sortedness is *not* enforced here (the writer enforces it); the
    simulation validates it before use.
    """
    path = Path(path)
    return _read_text(path) if _is_text_path(path) else _read_binary(path)
