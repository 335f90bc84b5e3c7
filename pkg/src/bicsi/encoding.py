"""Binary quantization of integer CSI amplitudes into per-packet gene sequences.

Each amplitude expands to a ten-bit code (anything at or above the 1024
cutoff collapses to all zeros), which is then compressed to two bits by
majority vote over the high and low five-bit halves. A packet row of k
amplitudes becomes a packed bit vector of 2k bits, the packet's gene
sequence. The two-bit stage is what shrinks fingerprint storage by 80%
relative to keeping the ten-bit codes.
"""

import operator
from dataclasses import dataclass

import numpy as np

ENCODER_OVERFLOW = 1024  # amplitudes at or above this encode as the all-zero code
TEN_BITS = 10

TenBitCode = tuple[int, ...]
TwoBitCode = tuple[int, int]

# popcount lookup for 5-bit values
_POPCOUNT5 = np.array([bin(v).count("1") for v in range(32)], dtype=np.uint8)


@dataclass(frozen=True)
class GeneSequence:
    """Packed 2-bit-per-subcarrier code for one packet (or derived window).

    Bits are packed MSB-first into bytes; pair j holds the high-half bit
    followed by the low-half bit for subcarrier j, subcarriers in matrix
    column order. Padding bits past ``bit_length`` in the final byte must be
    zero so that whole-vector integer operations (xor/and/or popcounts) stay
    exact.
    """

    packed: bytes
    subcarrier_count: int

    def __post_init__(self):
        if self.subcarrier_count < 1:
            raise ValueError("subcarrier_count must be >= 1")
        expected = (self.bit_length + 7) // 8
        if len(self.packed) != expected:
            raise ValueError(
                f"packed payload is {len(self.packed)} bytes, "
                f"{self.bit_length} bits need {expected}"
            )
        tail = self.bit_length % 8
        if tail and self.packed[-1] & ((1 << (8 - tail)) - 1):
            raise ValueError("padding bits past the bit length must be zero")

    @property
    def bit_length(self) -> int:
        return 2 * self.subcarrier_count

    @classmethod
    def from_bits(cls, bits) -> "GeneSequence":
        """Build from an iterable of 0/1 values of even, nonzero length."""
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1 or arr.size == 0 or arr.size % 2:
            raise ValueError("bit vector must be 1-D with even, nonzero length")
        if arr.max(initial=0) > 1:
            raise ValueError("bits must be 0 or 1")
        return cls(packed=np.packbits(arr).tobytes(), subcarrier_count=arr.size // 2)

    def bits(self) -> np.ndarray:
        """Unpacked bit vector, dtype uint8, length ``bit_length``."""
        raw = np.frombuffer(self.packed, dtype=np.uint8)
        return np.unpackbits(raw, count=self.bit_length)

    def as_int(self) -> int:
        """Packed bits as a big-endian integer (zero padding included)."""
        return int.from_bytes(self.packed, "big")


def encode10(ap) -> TenBitCode:
    """Ten-bit binary code of a non-negative integer amplitude, MSB first.

    Values below 1024 keep their base-2 representation zero-padded to ten
    bits; values at or above 1024 collapse to ten zero bits.
    """
    ap = operator.index(ap)
    if ap < 0:
        raise ValueError("amplitude must be non-negative")
    value = ap if ap < ENCODER_OVERFLOW else 0
    return tuple((value >> shift) & 1 for shift in range(TEN_BITS - 1, -1, -1))


def majority5(bits) -> int:
    """1 when at least three of the five bits are set, else 0."""
    bits = tuple(bits)
    if len(bits) != 5:
        raise ValueError("majority vote is defined over exactly five bits")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    return 1 if sum(bits) >= 3 else 0


def reencode2(code) -> TwoBitCode:
    """Collapse a ten-bit code to (H, L): majority of each five-bit half."""
    code = tuple(code)
    if len(code) != TEN_BITS:
        raise ValueError(f"expected a {TEN_BITS}-bit code, got {len(code)} bits")
    return majority5(code[:5]), majority5(code[5:])


def _amplitude_bits(amplitudes: np.ndarray) -> np.ndarray:
    """Vectorized encoder: integer array (..., k) -> bit array (..., 2k).

    Equivalent to ``reencode2(encode10(a))`` per element with the (H, L)
    pairs interleaved along the last axis.
    """
    a = np.asarray(amplitudes)
    if not np.issubdtype(a.dtype, np.integer):
        raise ValueError("amplitudes must have an integer dtype")
    if a.size and int(a.min()) < 0:
        raise ValueError("amplitudes must be non-negative")
    a = np.where(a >= ENCODER_OVERFLOW, 0, a)
    high = (_POPCOUNT5[a >> 5] >= 3).astype(np.uint8)
    low = (_POPCOUNT5[a & 31] >= 3).astype(np.uint8)
    out = np.empty(a.shape[:-1] + (2 * a.shape[-1],), dtype=np.uint8)
    out[..., 0::2] = high
    out[..., 1::2] = low
    return out


def encode_row(amplitudes) -> GeneSequence:
    """Gene sequence for one packet row of integer amplitudes."""
    a = np.asarray(amplitudes)
    if a.ndim != 1:
        raise ValueError("expected a single 1-D row of amplitudes")
    if a.size == 0:
        raise ValueError("row must contain at least one amplitude")
    return GeneSequence.from_bits(_amplitude_bits(a))


def encode_matrix(matrix) -> list[GeneSequence]:
    """One gene sequence per packet row, in packet order.

    Accepts an :class:`~bicsi.ingest.AmplitudeMatrix` or a 2-D integer array.
    """
    data = getattr(matrix, "data", matrix)
    data = np.asarray(data)
    if data.ndim != 2:
        raise ValueError("expected a 2-D amplitude matrix")
    if data.shape[1] == 0:
        raise ValueError("matrix must have at least one subcarrier column")
    k = int(data.shape[1])
    packed = np.packbits(_amplitude_bits(data), axis=1)
    return [GeneSequence(packed=row.tobytes(), subcarrier_count=k) for row in packed]
