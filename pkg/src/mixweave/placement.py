"""Choose where a clip enters the base track.

Candidates are the base track's beat times (a 0.25 s grid when the beat
estimate is low-confidence). Each candidate window is summarized by the
mean of MFCC coefficients 1-12 over the frames fully inside it, and the
candidate whose summary is most cosine-similar to the clip's wins.
Coefficient 0 is excluded on purpose: it tracks loudness, and placement
should match timbre, not level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import SAMPLE_RATE
from .errors import LengthMismatch, NoCandidate, TooShort
from .features import FRAME_LEN, HOP, BeatGrid, MfccMatrix

FALLBACK_GRID_S = 0.25
MAX_OVERLAP_FRACTION = 0.5


@dataclass(frozen=True)
class PlacementPlan:
    element_id: str
    start_s: float
    end_s: float
    score: float  # cosine similarity in [-1, 1]
    snapped_beat_index: int | None  # None when placed on the fallback grid
    hint_window: tuple[float, float] | None = None
    truncated: bool = False  # clip ran past the track end and was cut


def clip_signature(clip_mfcc: MfccMatrix) -> np.ndarray:
    """Mean of MFCC coefficients 1-12 over all frames (length-12 vector)."""
    if clip_mfcc.n_frames < 1:
        raise TooShort("signature needs at least one MFCC frame")
    return clip_mfcc.frames[:, 1:].mean(axis=0)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """a.b / (|a||b|), clamped to [-1, 1]; 0 when either norm is degenerate."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"vector lengths differ: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < 1e-12 or nb < 1e-12:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def window_frame_range(start_s: float, end_s: float, n_frames: int) -> tuple[int, int]:
    """Indices [f0, f1) of analysis frames fully inside [start_s, end_s),
    computed in integer samples so engine and test oracles agree exactly."""
    s0 = int(round(start_s * SAMPLE_RATE))
    s1 = int(round(end_s * SAMPLE_RATE))
    f0 = max(0, -(-s0 // HOP))  # ceil division
    f1 = min(n_frames, (s1 - FRAME_LEN) // HOP + 1)
    return f0, f1


def _overlap_ok(start: float, end: float, limit: float, occupied) -> bool:
    for lo, hi in occupied:
        if min(end, hi) - max(start, lo) >= limit:
            return False
    return True


def candidate_starts(beats: BeatGrid, base_duration_s: float) -> list[tuple[float, int | None]]:
    """(start_s, beat_index) candidates: beat times, or a 0.25 s grid when
    the tempo estimate fell back."""
    if beats.low_confidence:
        n = int(np.floor(base_duration_s / FALLBACK_GRID_S)) + 1
        return [(i * FALLBACK_GRID_S, None) for i in range(n)]
    return [(float(t), i) for i, t in enumerate(beats.beat_times_s)]


def find_placement(base_mfcc: MfccMatrix, base_beats: BeatGrid, clip_mfcc: MfccMatrix,
                   clip_duration_s: float, base_duration_s: float,
                   hint: tuple[float, float] | None = None,
                   occupied: list[tuple[float, float]] | None = None,
                   element_id: str = "") -> PlacementPlan:
    """Best-scoring candidate start for the clip, earliest on ties.

    A hint window is a hard constraint: the placed interval must lie
    inside it. Candidates overlapping any occupied interval by half the
    clip length or more are dropped.
    """
    if base_duration_s <= clip_duration_s:
        raise ValueError("base track must be longer than the clip")
    if hint is not None:
        lo, hi = hint
        if hi - lo < clip_duration_s:
            raise ValueError(f"hint window [{lo}, {hi}] narrower than the "
                             f"{clip_duration_s:.2f}s clip")
    occupied = occupied or []
    target = clip_signature(clip_mfcc)

    best: tuple[float, float, int | None, bool] | None = None  # score, start, beat_idx, truncated
    for start, beat_idx in candidate_starts(base_beats, base_duration_s):
        if start >= base_duration_s:
            continue
        end = start + clip_duration_s
        truncated = end > base_duration_s
        window_end = min(end, base_duration_s)
        if hint is not None and not (hint[0] <= start and end <= hint[1]):
            continue
        if not _overlap_ok(start, window_end,
                           MAX_OVERLAP_FRACTION * clip_duration_s, occupied):
            continue
        f0, f1 = window_frame_range(start, window_end, base_mfcc.n_frames)
        if f1 <= f0:
            continue
        window_sig = base_mfcc.frames[f0:f1, 1:].mean(axis=0)
        score = cosine_similarity(window_sig, target)
        if best is None or score > best[0]:
            best = (score, start, beat_idx, truncated)

    if best is None:
        raise NoCandidate("no insertion candidate satisfies the hint/occupancy filters",
                          hint_window=hint)
    score, start, beat_idx, truncated = best
    return PlacementPlan(element_id=element_id, start_s=start,
                         end_s=min(start + clip_duration_s, base_duration_s),
                         score=score, snapped_beat_index=beat_idx,
                         hint_window=hint, truncated=truncated)
