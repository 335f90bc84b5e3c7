"""Loading CSI traces from CSV files and assembling integer amplitude matrices.

Phase information is never used: I/Q inputs are reduced to their magnitude
and floored to integers on the spot, amplitude inputs are floored directly.
Excluded subcarriers (pilots, invariant bins) are dropped by a configurable
index filter; there is no built-in exclusion list because the indices are
hardware-specific.
"""

import math
import operator
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DataDomainError,
    EmptyTraceError,
    LengthMismatchError,
    TraceParseError,
)

AMPLITUDE_CSV = "amplitude-csv"
IQ_CSV = "iq-csv"
TRACE_FORMATS = (AMPLITUDE_CSV, IQ_CSV)


@dataclass(frozen=True)
class RawCsiRecord:
    """One packet straight from a trace file.

    ``values`` holds either plain amplitudes (floats) or (I, Q) float pairs,
    one element per raw subcarrier. All records of a trace share one width.
    """

    packet_index: int
    values: tuple


@dataclass(frozen=True)
class SubcarrierFilter:
    """Set of 0-based raw subcarrier indices to drop before encoding."""

    excluded_indices: frozenset = frozenset()

    def __post_init__(self):
        normalized = set()
        for idx in self.excluded_indices:
            try:
                idx = operator.index(idx)
            except TypeError:
                raise ConfigError(f"subcarrier index {idx!r} is not an integer") from None
            if idx < 0:
                raise ConfigError(f"subcarrier index {idx} is negative")
            normalized.add(idx)
        object.__setattr__(self, "excluded_indices", frozenset(normalized))

    @classmethod
    def empty(cls) -> "SubcarrierFilter":
        return cls(frozenset())


def load_filter(path) -> SubcarrierFilter:
    """Read a filter file: one 0-based index per line, '#' comments allowed."""
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                idx = int(text)
            except ValueError:
                raise ConfigError(f"{path}: line {lineno}: not an integer index: {text!r}") from None
            if idx < 0:
                raise ConfigError(f"{path}: line {lineno}: negative subcarrier index {idx}")
            if idx in seen:
                raise ConfigError(f"{path}: line {lineno}: duplicate subcarrier index {idx}")
            seen.add(idx)
    return SubcarrierFilter(frozenset(seen))


@dataclass(frozen=True)
class AmplitudeMatrix:
    """Integer CSI amplitudes, packets by retained subcarriers.

    ``subcarrier_mask`` lists the retained raw column indices in order, so
    the matrix remembers which physical subcarriers its columns came from.
    """

    data: np.ndarray
    subcarrier_mask: tuple
    position_label: str | None = None

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ValueError("amplitude data must be 2-D (packets x subcarriers)")
        if not np.issubdtype(data.dtype, np.integer):
            raise ValueError("amplitude data must have an integer dtype")
        if data.size and int(data.min()) < 0:
            raise DataDomainError("amplitudes must be non-negative")
        mask = tuple(int(i) for i in self.subcarrier_mask)
        if len(mask) != data.shape[1]:
            raise ValueError("subcarrier_mask length must equal the column count")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "subcarrier_mask", mask)

    @property
    def packet_count(self) -> int:
        return int(self.data.shape[0])

    @property
    def subcarrier_count(self) -> int:
        return int(self.data.shape[1])


def amplitude_from_iq(i: float, q: float) -> int:
    """Integer part of the complex-channel magnitude sqrt(i^2 + q^2)."""
    i = float(i)
    q = float(q)
    if not (math.isfinite(i) and math.isfinite(q)):
        raise DataDomainError("I/Q components must be finite")
    return int(math.floor(math.hypot(i, q)))


def load_trace(path, format: str = AMPLITUDE_CSV) -> list[RawCsiRecord]:
    """Parse a trace CSV into per-packet records.

    Grammar: UTF-8, comma-separated numeric fields; lines starting with '#'
    and blank lines are skipped; every data row must have the same field
    count. In ``iq-csv`` each row holds 2r fields read as (I1, Q1, ..., Ir, Qr).
    """
    if format not in TRACE_FORMATS:
        raise ConfigError(f"unknown trace format {format!r}; expected one of {TRACE_FORMATS}")
    records: list[RawCsiRecord] = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split(",")
            try:
                numbers = [float(f) for f in fields]
            except ValueError:
                raise TraceParseError(f"{path}: line {lineno}: non-numeric field") from None
            if any(not math.isfinite(v) for v in numbers):
                raise DataDomainError(f"{path}: line {lineno}: non-finite value")
            if width is None:
                width = len(numbers)
                if format == IQ_CSV and width % 2:
                    raise TraceParseError(
                        f"{path}: line {lineno}: I/Q rows need an even field count, got {width}"
                    )
            elif len(numbers) != width:
                raise TraceParseError(
                    f"{path}: line {lineno}: expected {width} fields, got {len(numbers)}"
                )
            if format == AMPLITUDE_CSV:
                if any(v < 0 for v in numbers):
                    raise DataDomainError(f"{path}: line {lineno}: negative amplitude")
                values = tuple(numbers)
            else:
                values = tuple(zip(numbers[0::2], numbers[1::2]))
            records.append(RawCsiRecord(packet_index=len(records), values=values))
    if not records:
        raise EmptyTraceError(f"{path}: no data rows")
    return records


def build_matrix(records, subcarrier_filter: SubcarrierFilter | None = None,
                 position_label: str | None = None) -> AmplitudeMatrix:
    """Integer amplitude matrix with excluded raw columns removed.

    Retained columns keep their original relative order. Amplitude records
    are floored; I/Q records go through the magnitude-then-floor rule of
    :func:`amplitude_from_iq`.
    """
    records = list(records)
    if not records:
        raise EmptyTraceError("no records to assemble")
    width = len(records[0].values)
    iq = bool(records[0].values) and isinstance(records[0].values[0], tuple)
    for rec in records:
        if len(rec.values) != width:
            raise LengthMismatchError(
                f"packet {rec.packet_index}: expected {width} values, got {len(rec.values)}"
            )
        if bool(rec.values) and isinstance(rec.values[0], tuple) != iq:
            raise ValueError("records mix amplitude and I/Q forms")
    if width == 0:
        raise EmptyTraceError("records have zero subcarriers")

    flt = subcarrier_filter if subcarrier_filter is not None else SubcarrierFilter.empty()
    out_of_range = sorted(i for i in flt.excluded_indices if i >= width)
    if out_of_range:
        raise ConfigError(
            f"excluded subcarrier indices {out_of_range} out of range for width {width}"
        )
    keep = tuple(i for i in range(width) if i not in flt.excluded_indices)
    if not keep:
        raise ConfigError("filter excludes every subcarrier")

    arr = np.asarray([rec.values for rec in records], dtype=float)
    if arr.size and not np.all(np.isfinite(arr)):
        raise DataDomainError("values must be finite")
    if iq:
        amplitudes = np.floor(np.hypot(arr[..., 0], arr[..., 1]))
    else:
        if arr.size and float(arr.min()) < 0:
            raise DataDomainError("negative amplitude")
        amplitudes = np.floor(arr)
    data = amplitudes[:, keep].astype(np.int64)
    return AmplitudeMatrix(data=data, subcarrier_mask=keep, position_label=position_label)
