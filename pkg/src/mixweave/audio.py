"""WAV codec, resampling, and the engine's canonical mono buffer.

Everything downstream works on `AudioBuffer`: mono float64 samples in
[-1, 1]. The canonical engine rate is 22050 Hz; decoding keeps the source
rate and callers resample with `to_canonical` / `resample`.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInterval, MalformedWav, UnsupportedEncoding

SAMPLE_RATE = 22050  # canonical engine rate, mono

_MIN_RATE = 8000
_MAX_RATE = 96000


@dataclass(frozen=True)
class AudioBuffer:
    """Decoded mono PCM. Value-semantic: treat `samples` as read-only."""

    samples: np.ndarray  # 1-D float64, every value in [-1, 1]
    sample_rate_hz: int

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    @property
    def channel_count(self) -> int:
        return 1

    def copy_samples(self) -> np.ndarray:
        return self.samples.copy()


def _read_chunks(data: bytes):
    """Yield (chunk_id, payload) for every RIFF sub-chunk."""
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise MalformedWav(f"chunk {cid!r} truncated: {len(body)} of {size} bytes")
        yield cid, body
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def decode_wav(data: bytes) -> AudioBuffer:
    """Decode RIFF/WAVE bytes to a mono buffer at the source rate.

    Accepts PCM 16-bit and IEEE float 32-bit, 1-2 channels, 8-96 kHz.
    Stereo collapses by per-sample mean; int16 scales by 1/32768; float
    samples are clipped into [-1, 1].
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWav("not a RIFF/WAVE stream")

    fmt = None
    payload = None
    for cid, body in _read_chunks(data):
        if cid == b"fmt " and fmt is None:
            if len(body) < 16:
                raise MalformedWav("fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data" and payload is None:
            payload = body
    if fmt is None:
        raise MalformedWav("missing fmt chunk")
    if payload is None:
        raise MalformedWav("missing data chunk")

    audio_format, channels, rate, _byte_rate, _block_align, bits = fmt
    if audio_format not in (1, 3):
        raise UnsupportedEncoding(f"audio format tag {audio_format} (want PCM or IEEE float)")
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{channels} channels (want 1 or 2)")
    if not (_MIN_RATE <= rate <= _MAX_RATE):
        raise UnsupportedEncoding(f"sample rate {rate} outside {_MIN_RATE}-{_MAX_RATE} Hz")
    if audio_format == 1 and bits != 16:
        raise UnsupportedEncoding(f"{bits}-bit PCM (only 16-bit PCM supported)")
    if audio_format == 3 and bits != 32:
        raise UnsupportedEncoding(f"{bits}-bit float (only 32-bit float supported)")

    bytes_per_frame = channels * bits // 8
    if len(payload) % bytes_per_frame:
        raise MalformedWav("data chunk truncated mid-frame")

    if audio_format == 1:
        raw = np.frombuffer(payload, dtype="<i2").astype(np.float64) / 32768.0
    else:
        raw = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if channels == 2:
        raw = raw.reshape(-1, 2).mean(axis=1)
    samples = np.clip(raw, -1.0, 1.0)
    return AudioBuffer(samples=samples, sample_rate_hz=rate)


def encode_wav(buf: AudioBuffer) -> bytes:
    """Encode as 16-bit PCM mono RIFF/WAVE at the buffer's own rate."""
    ints = np.clip(np.round(buf.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    out = io.BytesIO()
    out.write(b"RIFF")
    out.write(struct.pack("<I", 36 + len(payload)))
    out.write(b"WAVE")
    out.write(b"fmt ")
    out.write(struct.pack("<IHHIIHH", 16, 1, 1, buf.sample_rate_hz,
                          buf.sample_rate_hz * 2, 2, 16))
    out.write(b"data")
    out.write(struct.pack("<I", len(payload)))
    out.write(payload)
    return out.getvalue()


def resample(buf: AudioBuffer, target_rate_hz: int) -> AudioBuffer:
    """Linear-interpolation resampling; identity when rates match.

    Output length is round(n * target/source), so duration is preserved
    within one sample period. Linear interpolation is a deliberate
    quality/simplicity trade-off (placement search tolerates the mild
    aliasing); swap in a windowed-sinc kernel here if fidelity matters.
    """
    if not (_MIN_RATE <= target_rate_hz <= _MAX_RATE):
        raise ValueError(f"target rate {target_rate_hz} outside {_MIN_RATE}-{_MAX_RATE} Hz")
    if target_rate_hz == buf.sample_rate_hz:
        return buf
    n_in = len(buf.samples)
    n_out = int(round(n_in * target_rate_hz / buf.sample_rate_hz))
    if n_in == 0 or n_out == 0:
        return AudioBuffer(np.zeros(0), target_rate_hz)
    t_out = np.arange(n_out) * (buf.sample_rate_hz / target_rate_hz)
    samples = np.interp(t_out, np.arange(n_in), buf.samples)
    return AudioBuffer(samples=samples, sample_rate_hz=target_rate_hz)


def to_canonical(buf: AudioBuffer) -> AudioBuffer:
    return resample(buf, SAMPLE_RATE)


def rms(buf: AudioBuffer, start_s: float, end_s: float) -> float:
    """Root mean square amplitude over [start_s, end_s)."""
    if not (0.0 <= start_s < end_s <= buf.duration_s + 1e-9):
        raise ValueError(f"bad interval [{start_s}, {end_s}] for {buf.duration_s:.3f}s buffer")
    i0 = int(round(start_s * buf.sample_rate_hz))
    i1 = int(round(end_s * buf.sample_rate_hz))
    i1 = min(i1, len(buf.samples))
    if i1 - i0 < 1:
        raise EmptyInterval(f"[{start_s}, {end_s}] rounds to fewer than one sample")
    chunk = buf.samples[i0:i1]
    return float(np.sqrt(np.mean(chunk * chunk)))
