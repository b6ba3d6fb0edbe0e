#!/usr/bin/env python3
"""Tour of the audio analysis layer: codec, MFCC, tempo, beats, pitch.

Everything here is synthetic, so the script runs offline in a second or
two. Run it from the repo root:

    python demos/01_features_tour.py
"""

import numpy as np

from mixweave import (
    SAMPLE_RATE,
    AudioBuffer,
    analyze_rhythm,
    decode_wav,
    encode_wav,
    estimate_pitch,
    mfcc,
    onset_envelope,
    rms,
)

# --- build a little test signal: 4 s of A3 sine with clicks at 100 BPM ----

duration = 8.0
t = np.arange(int(duration * SAMPLE_RATE)) / SAMPLE_RATE
signal = 0.4 * np.sin(2 * np.pi * 220 * t)
period = 60.0 / 100.0
click = period
while click < duration:
    s = int(click * SAMPLE_RATE)
    signal[s:s + 60] += 0.5  # short positive burst = a percussive hit
    click += period
buf = AudioBuffer(np.clip(signal, -1, 1), SAMPLE_RATE)

# --- codec round trip ------------------------------------------------------

wav_bytes = encode_wav(buf)
back = decode_wav(wav_bytes)
print(f"encoded {len(wav_bytes)} bytes, round-trip max error "
      f"{np.max(np.abs(back.samples - buf.samples)):.2e} (PCM16 step is {1 / 32768:.2e})")
print(f"overall loudness: rms = {rms(buf, 0.0, duration):.3f}")

# --- MFCC: the timbre fingerprint used for placement -----------------------

m = mfcc(buf)
print(f"\nMFCC matrix: {m.n_frames} frames x {m.frames.shape[1]} coefficients "
      f"(hop {m.frame_hop_s * 1000:.1f} ms)")
print("first frame, coefficients 0-4:", np.round(m.frames[0, :5], 2))

# --- onset envelope, tempo, beats ------------------------------------------

env = onset_envelope(buf)
grid = analyze_rhythm(buf)
print(f"\nestimated tempo: {grid.tempo_bpm:.2f} BPM (truth: 100)")
print(f"tracked {len(grid.beat_times_s)} beats; first five at "
      f"{np.round(grid.beat_times_s[:5], 3)} s")

# --- pitch ------------------------------------------------------------------

pe = estimate_pitch(buf)
print(f"\npitch: {pe.f0_hz:.1f} Hz at confidence {pe.confidence:.2f} (truth: 220 Hz)"
      if pe.voiced else "\npitch: unvoiced")
