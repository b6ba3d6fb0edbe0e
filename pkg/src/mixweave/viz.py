"""Stacked-streamgraph model of a composition, plus SVG export.

One layer per input element, stacked above the base track's loudness
envelope in insertion order. Layer thickness is the per-bin RMS of the
gain-scaled, fade-shaped clip ("intensity"), color is the element's
extracted color, and the x axis is time in 50 ms bins. A UI draws the
same geometry from the JSON form; `export_svg` is the reference layout:

    n_bins      = ceil(duration / bin_s)
    x(bin b)    = center of [b*bin_s, min((b+1)*bin_s, duration)] * W/duration
    scale       = 0.9 * H / max(base[b] + sum of thickness[b])   (0 if silent)
    stack       = base first, then layers in order; y = H - scale * cumsum
    layer path  = top edge left-to-right, bottom edge right-to-left, closed,
                  over the layer's interval bins only; 2-decimal precision
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .audio import SAMPLE_RATE, AudioBuffer
from .errors import EmptyModel, OutOfRange
from .mixer import MixManifest, shaped_clip

BIN_S = 0.05
STACK_HEIGHT_FRACTION = 0.9
BASE_FILL = "#888888"
LAYER_OPACITY = 0.8


@dataclass(frozen=True)
class StreamLayer:
    element_id: str
    color: tuple[int, int, int]
    interval: tuple[float, float]
    thickness: np.ndarray  # per-bin RMS, zero outside the interval
    label: str
    thumbnail_ref: str | None = None


@dataclass(frozen=True)
class VizModel:
    duration_s: float
    bin_s: float
    base_layer: np.ndarray
    layers: tuple[StreamLayer, ...]
    playhead_s: float = 0.0

    @property
    def n_bins(self) -> int:
        return len(self.base_layer)


def _bin_rms(samples: np.ndarray, n_bins: int) -> np.ndarray:
    """RMS over each 50 ms bin of a canonical-rate signal."""
    out = np.zeros(n_bins)
    for b in range(n_bins):
        i0 = int(round(b * BIN_S * SAMPLE_RATE))
        i1 = min(int(round((b + 1) * BIN_S * SAMPLE_RATE)), len(samples))
        if i1 > i0:
            chunk = samples[i0:i1]
            out[b] = np.sqrt(np.mean(chunk * chunk))
    return out


def build_viz(base: AudioBuffer, manifest: MixManifest, elements: dict) -> VizModel:
    """Envelope model for the given manifest (pre-master-gain, pre-limiting:
    the layers show each entry's own contribution)."""
    duration = base.duration_s
    n_bins = int(np.ceil(duration / BIN_S))
    base_layer = _bin_rms(base.samples, n_bins)

    layers = []
    for entry in manifest.entries:
        element = elements[entry.element_id]
        p = entry.placement
        shaped = shaped_clip(element.clip, entry.gain, entry.fade_s,
                             int(round((p.end_s - p.start_s) * SAMPLE_RATE)))
        placed = np.zeros(len(base.samples))
        s0 = int(round(p.start_s * SAMPLE_RATE))
        span = min(len(shaped), len(placed) - s0)
        placed[s0:s0 + span] = shaped[:span]
        thickness = _bin_rms(placed, n_bins)
        if element.kind == "audio":
            label = element.source_name or element.id
        else:
            label = element.caption
        layers.append(StreamLayer(element_id=element.id, color=element.color,
                                  interval=(p.start_s, p.end_s), thickness=thickness,
                                  label=label))
    return VizModel(duration_s=duration, bin_s=BIN_S, base_layer=base_layer,
                    layers=tuple(layers))


def playhead_state(viz: VizModel, t_s: float) -> dict:
    """Playhead fraction plus the layers audible at time t."""
    if not (0.0 <= t_s <= viz.duration_s):
        raise OutOfRange(f"t={t_s} outside [0, {viz.duration_s}]")
    active = [layer.element_id for layer in viz.layers
              if layer.interval[0] <= t_s <= layer.interval[1]]
    return {"x_fraction": t_s / viz.duration_s if viz.duration_s else 0.0,
            "active_element_ids": active}


def to_json_dict(viz: VizModel) -> dict:
    return {
        "duration_s": viz.duration_s,
        "bin_s": viz.bin_s,
        "base": [float(v) for v in viz.base_layer],
        "layers": [
            {
                "id": layer.element_id,
                "color": list(layer.color),
                "start_s": layer.interval[0],
                "end_s": layer.interval[1],
                "thickness": [float(v) for v in layer.thickness],
                "label": layer.label,
            }
            for layer in viz.layers
        ],
    }


def to_json_bytes(viz: VizModel) -> bytes:
    return json.dumps(to_json_dict(viz), separators=(",", ":")).encode("utf-8")


def _bin_centers_px(viz: VizModel, width_px: float) -> np.ndarray:
    starts = np.arange(viz.n_bins) * viz.bin_s
    ends = np.minimum(starts + viz.bin_s, viz.duration_s)
    return (starts + ends) / 2.0 * width_px / viz.duration_s


def _interval_bins(viz: VizModel, interval: tuple[float, float]) -> tuple[int, int]:
    b_lo = max(0, int(np.floor(interval[0] / viz.bin_s)))
    b_hi = min(viz.n_bins - 1, int(np.ceil(interval[1] / viz.bin_s)) - 1)
    return b_lo, b_hi


def _area_path(x: np.ndarray, y_top: np.ndarray, y_bot: np.ndarray) -> str:
    fwd = " ".join(f"L{x[i]:.2f},{y_top[i]:.2f}" for i in range(len(x)))
    back = " ".join(f"L{x[i]:.2f},{y_bot[i]:.2f}" for i in range(len(x) - 1, -1, -1))
    return f"M{x[0]:.2f},{y_bot[0]:.2f} {fwd} {back} Z"


def export_svg(viz: VizModel, width_px: int, height_px: int) -> bytes:
    """Deterministic SVG of the stacked streamgraph (byte-stable)."""
    if width_px <= 0 or height_px <= 0:
        raise ValueError("SVG dimensions must be positive")
    if viz.n_bins == 0:
        raise EmptyModel("visualization model has no bins")

    x = _bin_centers_px(viz, float(width_px))
    stack = [np.asarray(viz.base_layer, dtype=np.float64)]
    for layer in viz.layers:
        stack.append(stack[-1] + layer.thickness)
    top_total = float(np.max(stack[-1]))
    scale = STACK_HEIGHT_FRACTION * height_px / top_total if top_total > 0 else 0.0

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" '
        f'height="{height_px}" viewBox="0 0 {width_px} {height_px}">'
    ]
    y_base_top = height_px - scale * stack[0]
    y_floor = np.full(viz.n_bins, float(height_px))
    parts.append(f'<path d="{_area_path(x, y_base_top, y_floor)}" fill="{BASE_FILL}"/>')

    labels = []
    for k, layer in enumerate(viz.layers):
        b_lo, b_hi = _interval_bins(viz, layer.interval)
        sel = slice(b_lo, b_hi + 1)
        y_bot = height_px - scale * stack[k][sel]
        y_top = height_px - scale * stack[k + 1][sel]
        r, g, b = layer.color
        parts.append(f'<path d="{_area_path(x[sel], y_top, y_bot)}" '
                     f'fill="rgb({r},{g},{b})" fill-opacity="{LAYER_OPACITY}"/>')

        mid_t = (layer.interval[0] + layer.interval[1]) / 2.0
        b_mid = min(viz.n_bins - 1, int(mid_t / viz.bin_s))
        y_mid = height_px - scale * (stack[k][b_mid] + layer.thickness[b_mid] / 2.0)
        labels.append(f'<text x="{x[b_mid]:.2f}" y="{y_mid:.2f}" '
                      f'text-anchor="middle" font-size="12" '
                      f'font-family="sans-serif">{escape(layer.label)}</text>')
    parts.extend(labels)
    parts.append("</svg>")
    return "\n".join(parts).encode("utf-8")
