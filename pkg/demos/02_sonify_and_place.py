#!/usr/bin/env python3
"""From words to placed audio: color extraction, the stub generator, and
similarity-driven insertion-point search.

    python demos/02_sonify_and_place.py
"""

import numpy as np

from mixweave import (
    SAMPLE_RATE,
    AudioBuffer,
    StubGenerator,
    analyze_rhythm,
    extract_colors,
    find_placement,
    mfcc,
    sonify,
)

# --- color words drive the visualization palette ----------------------------

for text in ("a yellow and white striped cat",
             "deep blue water under a gray sky",
             "a quiet melody with no colors at all"):
    print(f"{text!r:55s} -> {extract_colors(text)}")

# --- the stub generator: deterministic pentatonic motifs --------------------

clip_a = sonify("a calm blue evening", 4.0, StubGenerator(), seed=7)
clip_b = sonify("a calm blue evening", 4.0, StubGenerator(), seed=7)
clip_c = sonify("a fast silver sprint", 4.0, StubGenerator(), seed=7)
print(f"\nsame text+seed twice -> identical: {np.array_equal(clip_a.samples, clip_b.samples)}")
print(f"different text       -> different: {not np.array_equal(clip_a.samples, clip_c.samples)}")

# --- build a base track with sections of different character -----------------

rng = np.random.default_rng(0)
dur = 24.0
x = np.zeros(int(dur * SAMPLE_RATE))
for s0 in range(0, len(x), SAMPLE_RATE // 2):
    f = rng.uniform(150, 900)
    tt = np.arange(min(SAMPLE_RATE // 2, len(x) - s0)) / SAMPLE_RATE
    x[s0:s0 + len(tt)] = 0.3 * np.sin(2 * np.pi * f * tt)
beat = 60.0 / 120.0
tick = beat
while tick < dur:
    s = int(tick * SAMPLE_RATE)
    x[s:s + 80] += 0.5
    tick += beat
base = AudioBuffer(np.clip(x, -1, 1), SAMPLE_RATE)

base_mfcc = mfcc(base)
grid = analyze_rhythm(base)
print(f"\nbase: {dur:.0f}s at {grid.tempo_bpm:.1f} BPM, {len(grid.beat_times_s)} beats")

# --- where does the clip fit best? ------------------------------------------

plan = find_placement(base_mfcc, grid, mfcc(clip_a), clip_a.duration_s, base.duration_s)
print(f"free placement:   start {plan.start_s:6.2f}s  score {plan.score:.4f} "
      f"(beat #{plan.snapped_beat_index})")

# the same search, but the user brushed a window: hard constraint
hinted = find_placement(base_mfcc, grid, mfcc(clip_a), clip_a.duration_s,
                        base.duration_s, hint=(15.0, 22.0))
print(f"hinted [15, 22]:  start {hinted.start_s:6.2f}s  score {hinted.score:.4f}")

# a second copy must dodge the first (overlap capped at half the clip)
second = find_placement(base_mfcc, grid, mfcc(clip_a), clip_a.duration_s,
                        base.duration_s, occupied=[(plan.start_s, plan.end_s)])
overlap = max(0.0, min(plan.end_s, second.end_s) - max(plan.start_s, second.start_s))
print(f"second copy:      start {second.start_s:6.2f}s  overlap with first {overlap:.2f}s")
