#!/usr/bin/env python3
"""A whole editing session against the project store: create a project,
add one element of each kind, edit, render the mix, and export the
streamgraph. Artifacts land in ./demo_output/.

    python demos/03_full_session.py
"""

import io
from pathlib import Path

import numpy as np
from PIL import Image

from mixweave import SAMPLE_RATE, AudioBuffer, ProjectStore, encode_wav, export_svg, playhead_state

out_dir = Path("demo_output")
out_dir.mkdir(exist_ok=True)

# --- a base track to work against -------------------------------------------

rng = np.random.default_rng(11)
dur = 25.0
beat = 60.0 / 112.0
x = np.zeros(int(dur * SAMPLE_RATE))
seg = int(beat * SAMPLE_RATE)  # one tone segment per beat
for s0 in range(0, len(x), seg):
    f = rng.uniform(160, 800)
    tt = np.arange(min(seg, len(x) - s0)) / SAMPLE_RATE
    x[s0:s0 + len(tt)] = 0.35 * np.sin(2 * np.pi * f * tt)
tick = beat
while tick < dur:
    x[int(tick * SAMPLE_RATE):int(tick * SAMPLE_RATE) + 70] += 0.5
    tick += beat

store = ProjectStore(out_dir / "projects")
project = store.create_project("demo session", encode_wav(AudioBuffer(np.clip(x, -1, 1), SAMPLE_RATE)))
print(f"project {project.id}: {project.base.duration_s:.1f}s base at "
      f"{project.beat_grid.tempo_bpm:.1f} BPM")

# --- three inputs: text, image, audio ----------------------------------------

el_text, plan = store.add_element(project.id, "text", "a calm blue evening")
print(f"text  -> color {el_text.color}, placed {plan.start_s:.2f}-{plan.end_s:.2f}s "
      f"(score {plan.score:.3f})")

img = io.BytesIO()
Image.new("RGB", (32, 32), (235, 205, 30)).save(img, format="PNG")
el_img, plan = store.add_element(project.id, "image", img.getvalue())
print(f"image -> caption {el_img.caption!r}, color {el_img.color}, "
      f"placed {plan.start_s:.2f}s")

meow = 0.4 * np.sin(2 * np.pi * 600 * np.arange(2 * SAMPLE_RATE) / SAMPLE_RATE)
meow *= np.linspace(1.0, 0.0, len(meow)) ** 0.5
el_wav, plan = store.add_element(project.id, "audio", encode_wav(AudioBuffer(meow, SAMPLE_RATE)),
                                 source_name="meow.wav", hint_window=(16.0, 22.0))
print(f"audio -> placed {plan.start_s:.2f}s inside hint [16, 22]")

# --- edit: drop the text layer's gain, then render ---------------------------

store.update_element(project.id, el_text.id, gain=0.4)
mix_bytes, viz = store.render(project.id)
(out_dir / "mix.wav").write_bytes(mix_bytes)
(out_dir / "streamgraph.svg").write_bytes(export_svg(viz, 1000, 300))
print(f"\nwrote {out_dir / 'mix.wav'} ({len(mix_bytes)} bytes) and streamgraph.svg")

# --- what the moving dot would report during playback ------------------------

for t in (0.0, plan.start_s + 0.5, viz.duration_s):
    state = playhead_state(viz, t)
    print(f"t={t:5.2f}s  x={state['x_fraction']:.3f}  active={state['active_element_ids']}")
