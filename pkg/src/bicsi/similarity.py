"""Distance and similarity measures over gene sequences.

Hamming distance is the primary measure. The alternates exist for the
metric-substitution study; :func:`distance` maps every kind onto a uniform
lower-is-better scale so the matcher never branches on metric semantics.
On 0/1 vectors the Manhattan distance coincides with the Hamming distance
and the Euclidean distance is its square root, so those three kinds always
rank candidates identically.
"""

import enum
import math

import numpy as np

from .encoding import GeneSequence
from .errors import ConfigError, LengthMismatchError


class MetricKind(enum.Enum):
    HAMMING = "hamming"
    MANHATTAN = "manhattan"
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"
    PEARSON = "pearson"
    JACCARD = "jaccard"

    @classmethod
    def parse(cls, name: str) -> "MetricKind":
        """Case-insensitive lookup by metric name."""
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown metric {name!r}; valid metrics: {valid}") from None


def _require_same_length(a: GeneSequence, b: GeneSequence) -> None:
    if a.bit_length != b.bit_length:
        raise LengthMismatchError(
            f"sequence lengths differ: {a.bit_length} vs {b.bit_length} bits"
        )


def _one_counts(a: GeneSequence, b: GeneSequence) -> tuple[int, int, int, int]:
    """(ones in a, ones in b, ones in a&b, ones in a|b)."""
    ia, ib = a.as_int(), b.as_int()
    return ia.bit_count(), ib.bit_count(), (ia & ib).bit_count(), (ia | ib).bit_count()


def hamming(a: GeneSequence, b: GeneSequence) -> int:
    """Number of bit positions where the two sequences differ."""
    _require_same_length(a, b)
    return (a.as_int() ^ b.as_int()).bit_count()


def manhattan_bits(a: GeneSequence, b: GeneSequence) -> int:
    """Sum of absolute bitwise differences, computed from unpacked bits."""
    _require_same_length(a, b)
    diff = a.bits().astype(np.int64) - b.bits().astype(np.int64)
    return int(np.abs(diff).sum())


def euclidean_bits(a: GeneSequence, b: GeneSequence) -> float:
    """Euclidean norm of the bitwise difference vector."""
    _require_same_length(a, b)
    diff = a.bits().astype(np.int64) - b.bits().astype(np.int64)
    return math.sqrt(float((diff * diff).sum()))


def cosine_bits(a: GeneSequence, b: GeneSequence) -> float:
    """Cosine similarity over 0/1 vectors.

    Two all-zero sequences are identical and score 1; a single all-zero
    sequence has no direction and scores 0 against anything else.
    """
    _require_same_length(a, b)
    na, nb, m11, _ = _one_counts(a, b)
    if na == 0 and nb == 0:
        return 1.0
    if na == 0 or nb == 0:
        return 0.0
    return m11 / math.sqrt(na * nb)


def pearson_bits(a: GeneSequence, b: GeneSequence) -> float:
    """Pearson correlation over 0/1 vectors.

    Identical sequences correlate perfectly (including constant ones);
    otherwise a constant sequence has zero variance and scores 0.
    """
    _require_same_length(a, b)
    if a.packed == b.packed:
        return 1.0
    n = a.bit_length
    na, nb, m11, _ = _one_counts(a, b)
    var_a = na * (n - na)
    var_b = nb * (n - nb)
    if var_a == 0 or var_b == 0:
        return 0.0
    return (n * m11 - na * nb) / math.sqrt(var_a * var_b)


def jaccard_bits(a: GeneSequence, b: GeneSequence) -> float:
    """Jaccard index over bit supports; two empty supports count as identical."""
    _require_same_length(a, b)
    _, _, m11, union = _one_counts(a, b)
    if union == 0:
        return 1.0
    return m11 / union


def distance(kind: MetricKind, a: GeneSequence, b: GeneSequence) -> float:
    """Lower-is-better distance for any metric kind.

    Distances pass through unchanged; similarities map as 1 - cosine,
    1 - jaccard and (1 - pearson) / 2, so zero always means a perfect match
    and all outputs are non-negative.
    """
    if kind is MetricKind.HAMMING:
        return float(hamming(a, b))
    if kind is MetricKind.MANHATTAN:
        return float(manhattan_bits(a, b))
    if kind is MetricKind.EUCLIDEAN:
        return euclidean_bits(a, b)
    if kind is MetricKind.COSINE:
        return 1.0 - cosine_bits(a, b)
    if kind is MetricKind.PEARSON:
        return (1.0 - pearson_bits(a, b)) / 2.0
    if kind is MetricKind.JACCARD:
        return 1.0 - jaccard_bits(a, b)
    raise ConfigError(f"unsupported metric kind: {kind!r}")
