#!/usr/bin/env python3
"""Regenerate the geometry-parity fixtures from the engine.

Each fixture is a rendered project's viz JSON plus the engine's SVG export
at 1000x300. The frontend test lays the JSON out itself and must land on
the same coordinates. Run from the repo root:

    python frontend/scripts/make_fixtures.py
"""

import io
from pathlib import Path

import numpy as np
from PIL import Image

from mixweave import ProjectStore, encode_wav, export_svg
from mixweave.audio import SAMPLE_RATE, AudioBuffer
from mixweave.viz import to_json_bytes

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def textured(duration_s, bpm, seed):
    r = np.random.default_rng(seed)
    n = int(duration_s * SAMPLE_RATE)
    x = np.zeros(n)
    seg = int(60.0 / bpm * SAMPLE_RATE)
    for s0 in range(0, n, seg):
        f = r.uniform(150, 900)
        tt = np.arange(min(seg, n - s0)) / SAMPLE_RATE
        x[s0:s0 + len(tt)] = 0.3 * np.sin(2 * np.pi * f * tt)
    t = 60.0 / bpm
    while t < duration_s:
        s = int(round(t * SAMPLE_RATE))
        x[s:s + 80] += 0.5 * np.sin(2 * np.pi * 3000 * np.arange(min(80, n - s)) / SAMPLE_RATE)
        t += 60.0 / bpm
    return AudioBuffer(np.clip(x, -0.95, 0.95), SAMPLE_RATE)


def main():
    import tempfile

    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        store = ProjectStore(tmp)

        specs = [
            ("one text layer", 20.0, 120, 1, [("text", "a calm blue evening", None)]),
            ("three kinds", 24.0, 100, 2, [
                ("text", "fast gold sparks", None),
                ("image", None, None),
                ("audio", None, (14.0, 20.0)),
            ]),
            ("crowded", 30.0, 132, 3, [
                ("text", "red morning", None),
                ("text", "a green field", None),
                ("text", "slow silver rain", (18.0, 28.0)),
                ("text", "white noise and pink clouds", None),
            ]),
        ]
        for idx, (name, dur, bpm, seed, elements) in enumerate(specs, start=1):
            base = textured(dur, bpm, seed)
            project = store.create_project(name, encode_wav(base), seed=seed)
            for kind, payload, hint in elements:
                if kind == "text":
                    store.add_element(project.id, "text", payload, hint_window=hint)
                elif kind == "image":
                    img = io.BytesIO()
                    Image.new("RGB", (16, 16), (40, 90, 200)).save(img, format="PNG")
                    store.add_element(project.id, "image", img.getvalue(), hint_window=hint)
                else:
                    tone = 0.4 * np.sin(2 * np.pi * 500 * np.arange(2 * SAMPLE_RATE) / SAMPLE_RATE)
                    store.add_element(project.id, "audio",
                                      encode_wav(AudioBuffer(tone, SAMPLE_RATE)),
                                      source_name="tone.wav", hint_window=hint)
            _, viz = store.render(project.id)
            (OUT / f"model{idx}.viz.json").write_bytes(to_json_bytes(viz))
            (OUT / f"model{idx}.svg").write_bytes(export_svg(viz, 1000, 300))
            print(f"model{idx}: {len(viz.layers)} layers, {viz.n_bins} bins -> fixtures written")


if __name__ == "__main__":
    main()
