"""Nearest-fingerprint matching of parent sequences.

Every ancestor of every set of every position competes; the position owning
the globally closest ancestor wins. Scan order is fixed (entries in stored
order, first ancestors before second, sets in stored order) and ties keep
the earliest candidate, so results are reproducible across platforms.
"""

import math
from dataclasses import dataclass

from .errors import BicsiError, EmptyInputError, LengthMismatchError
from .fingerprint import FingerprintDb, ParentSequence
from .similarity import MetricKind, distance


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching one window against the database.

    ``runner_up_margin`` is the gap between the best non-predicted entry's
    distance and the best distance (infinite for a single-entry database);
    it is a diagnostic, not part of the matching rule.
    """

    window_index: int
    predicted_label: str
    predicted_coord: tuple
    best_distance: float
    runner_up_margin: float


def match_one(ps: ParentSequence, db: FingerprintDb,
              kind: MetricKind = MetricKind.HAMMING) -> MatchResult:
    """Predict the position whose ancestors come closest to ``ps``."""
    if not db.entries:
        raise EmptyInputError("fingerprint database has no entries")
    seq = ps.sequence
    if seq.bit_length != 2 * db.subcarrier_count:
        raise LengthMismatchError(
            f"parent sequence has {seq.bit_length} bits, "
            f"database stores {2 * db.subcarrier_count}"
        )
    entry_best = []
    for entry in db.entries:
        best = math.inf
        for pick_second in (False, True):
            for pair in entry.ancestor_sets:
                anc = pair.as2 if pick_second else pair.as1
                d = distance(kind, anc, seq)
                if d < best:
                    best = d
        entry_best.append(best)
    best_idx = 0
    for i, d in enumerate(entry_best):
        if d < entry_best[best_idx]:
            best_idx = i
    runner_up = min(
        (d for i, d in enumerate(entry_best) if i != best_idx),
        default=math.inf,
    )
    winner = db.entries[best_idx]
    return MatchResult(
        window_index=ps.window_index,
        predicted_label=winner.label,
        predicted_coord=winner.coord,
        best_distance=entry_best[best_idx],
        runner_up_margin=runner_up - entry_best[best_idx],
    )


def match_trace(parents, db: FingerprintDb,
                kind: MetricKind = MetricKind.HAMMING) -> list[MatchResult]:
    """Elementwise :func:`match_one` over a window sequence, order preserved.

    A failing window aborts the whole trace with its index in the message.
    """
    results = []
    for ps in parents:
        try:
            results.append(match_one(ps, db, kind))
        except BicsiError as exc:
            raise type(exc)(f"window {ps.window_index}: {exc}") from exc
    return results
