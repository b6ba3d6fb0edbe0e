"""Render the composition: gain-matched clips added into the base track.

Clips get equal-power (sin/cos) edge fades, the sum is peak-normalized to
0.999, and entries are summed in a canonical order so any permutation of
the manifest renders bit-identical audio. Peak normalization rather than
a limiter keeps rendering a pure function of the manifest.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .audio import SAMPLE_RATE, AudioBuffer, rms
from .errors import EmptyInterval, InvalidManifest, InvalidPlacement, UnknownElement
from .placement import PlacementPlan

PEAK_CEILING = 0.999
CLIP_TARGET_VS_BASE = 0.8  # clip loudness relative to the base interval
GAIN_MIN = 0.05
GAIN_MAX = 4.0
FADE_CAP_S = 0.5
FADE_FRACTION = 0.1


@dataclass(frozen=True)
class MixEntry:
    element_id: str
    placement: PlacementPlan
    gain: float
    fade_s: float


@dataclass(frozen=True)
class MixManifest:
    base: AudioBuffer
    entries: tuple[MixEntry, ...] = ()
    master_gain: float = 1.0


def default_fade_s(clip_duration_s: float) -> float:
    return min(FADE_CAP_S, FADE_FRACTION * clip_duration_s)


def auto_gain(base: AudioBuffer, clip: AudioBuffer, placement: PlacementPlan) -> float:
    """Gain that puts the clip at 0.8x the base's loudness over the
    placement interval, clamped to [0.05, 4.0]; 1.0 for a silent clip."""
    try:
        clip_rms = rms(clip, 0.0, clip.duration_s)
    except EmptyInterval:
        return 1.0
    if clip_rms < 1e-12:
        return 1.0
    base_rms = rms(base, placement.start_s, placement.end_s)
    return float(np.clip(CLIP_TARGET_VS_BASE * base_rms / clip_rms, GAIN_MIN, GAIN_MAX))


def shaped_clip(clip: AudioBuffer, gain: float, fade_s: float,
                span_samples: int | None = None) -> np.ndarray:
    """Gain-scaled clip with equal-power fades at both ends, truncated to
    `span_samples`. Fades shrink to fit when the span is short."""
    n = len(clip.samples) if span_samples is None else min(span_samples, len(clip.samples))
    out = clip.samples[:n] * gain
    nf = min(int(round(fade_s * SAMPLE_RATE)), n // 2)
    if nf > 0:
        ramp = np.arange(1, nf + 1) / nf
        out[:nf] *= np.sin(0.5 * np.pi * ramp)
        out[n - nf:] *= np.cos(0.5 * np.pi * ramp)
    return out


def _check_manifest(manifest: MixManifest, elements: dict) -> None:
    if manifest.master_gain <= 0:
        raise InvalidManifest("master_gain must be positive")
    base_dur = manifest.base.duration_s
    for entry in manifest.entries:
        if entry.element_id not in elements:
            raise InvalidManifest(f"entry references unknown element {entry.element_id!r}")
        p = entry.placement
        if not (0.0 <= p.start_s < p.end_s <= base_dur + 1e-9):
            raise InvalidManifest(f"placement [{p.start_s}, {p.end_s}] outside base track")
        if entry.gain < 0:
            raise InvalidManifest("entry gain must be non-negative")
        clip_dur = elements[entry.element_id].clip.duration_s
        if entry.fade_s > clip_dur / 2 + 1e-9:
            raise InvalidManifest(f"fade {entry.fade_s}s exceeds half the clip duration")


def render_mix(manifest: MixManifest, elements: dict) -> AudioBuffer:
    """Sum all entries into the base, apply master gain, peak-normalize.

    Output duration equals the base duration exactly; clips hanging past
    the end are truncated. Entries are added in element-id order so the
    result does not depend on manifest ordering.
    """
    _check_manifest(manifest, elements)
    out = manifest.base.samples.copy()
    n_out = len(out)
    for entry in sorted(manifest.entries, key=lambda e: e.element_id):
        clip = elements[entry.element_id].clip
        s0 = int(round(entry.placement.start_s * SAMPLE_RATE))
        span = min(len(clip.samples), n_out - s0)
        if span <= 0:
            continue
        out[s0:s0 + span] += shaped_clip(clip, entry.gain, entry.fade_s, span)
    out *= manifest.master_gain
    peak = float(np.max(np.abs(out))) if n_out else 0.0
    if peak > PEAK_CEILING:
        out *= PEAK_CEILING / peak
    return AudioBuffer(samples=out, sample_rate_hz=manifest.base.sample_rate_hz)


def update_entry(manifest: MixManifest, element_id: str, *, gain: float | None = None,
                 start_s: float | None = None, fade_s: float | None = None) -> MixManifest:
    """New manifest with one entry's gain/position/fade changed."""
    idx = next((i for i, e in enumerate(manifest.entries) if e.element_id == element_id), None)
    if idx is None:
        raise UnknownElement(f"no manifest entry for element {element_id!r}")
    entry = manifest.entries[idx]

    if gain is not None:
        if gain < 0:
            raise InvalidPlacement("gain must be non-negative")
        entry = replace(entry, gain=float(gain))
    if start_s is not None:
        length = entry.placement.end_s - entry.placement.start_s
        if start_s < 0 or start_s + length > manifest.base.duration_s + 1e-9:
            raise InvalidPlacement(f"start {start_s}s leaves [{start_s}, "
                                   f"{start_s + length:.2f}] outside the base track")
        moved = replace(entry.placement, start_s=float(start_s),
                        end_s=float(start_s + length), snapped_beat_index=None)
        entry = replace(entry, placement=moved)
    if fade_s is not None:
        length = entry.placement.end_s - entry.placement.start_s
        if fade_s < 0 or fade_s > length / 2 + 1e-9:
            raise InvalidPlacement("fade must be within half the clip duration")
        entry = replace(entry, fade_s=float(fade_s))

    entries = list(manifest.entries)
    entries[idx] = entry
    return replace(manifest, entries=tuple(entries))
