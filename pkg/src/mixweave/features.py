"""Frame-level audio descriptors: MFCC, onset strength, tempo, beats, pitch.

Analysis frame: 2048 samples, hop 512, Hann window, left-aligned (frame f
covers samples [512f, 512f+2048)). Mel bank: 26 triangular filters on
0-11025 Hz, each area-normalized to sum 1. Cepstra: orthonormal DCT-II of
the log mel energies, first 13 coefficients kept. Coefficient 0 carries
overall level; 1-12 carry timbre, which is why placement drops 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fftpack import dct

from .audio import SAMPLE_RATE, AudioBuffer
from .errors import TooShort

FRAME_LEN = 2048
HOP = 512
N_MELS = 26
N_MFCC = 13
LOG_FLOOR = 1e-10

_BLOCK_FRAMES = 4096  # bounds scratch memory on long tracks

FRAME_LEN_S = FRAME_LEN / SAMPLE_RATE
HOP_S = HOP / SAMPLE_RATE

# A single-sample event first raises the spectral flux in the frame whose
# trailing hop admits it; dating that frame at frame_len - hop/2 puts the
# estimated onset within half a hop of the true sample.
_ONSET_OFFSET = FRAME_LEN - HOP // 2

TEMPO_MIN_BPM = 40.0
TEMPO_MAX_BPM = 200.0
TEMPO_FALLBACK_BPM = 120.0


@dataclass(frozen=True)
class MfccMatrix:
    """Per-frame MFCC rows: shape (n_frames, 13), all entries finite."""

    frames: np.ndarray
    frame_hop_s: float = HOP_S
    frame_len_s: float = FRAME_LEN_S

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class BeatGrid:
    tempo_bpm: float
    beat_times_s: np.ndarray
    onset_envelope: np.ndarray
    low_confidence: bool = False  # True when tempo fell back to 120 BPM


@dataclass(frozen=True)
class PitchEstimate:
    """f0_hz is None when unvoiced (confidence below 0.3)."""

    f0_hz: float | None
    confidence: float

    @property
    def voiced(self) -> bool:
        return self.f0_hz is not None


def frame_count(n_samples: int) -> int:
    if n_samples < FRAME_LEN:
        return 0
    return (n_samples - FRAME_LEN) // HOP + 1


def onset_time_s(hop_index: int | np.ndarray) -> float | np.ndarray:
    """Time an onset at envelope index `hop_index` is dated to."""
    return (np.asarray(hop_index) * HOP + _ONSET_OFFSET) / SAMPLE_RATE


def _require_canonical(buf: AudioBuffer) -> None:
    if buf.sample_rate_hz != SAMPLE_RATE:
        raise ValueError(f"expected canonical {SAMPLE_RATE} Hz buffer, got {buf.sample_rate_hz}")


def _frames(samples: np.ndarray, f0: int, f1: int) -> np.ndarray:
    idx = np.arange(FRAME_LEN)[None, :] + HOP * np.arange(f0, f1)[:, None]
    return samples[idx]


def stft_power(buf: AudioBuffer) -> np.ndarray:
    """Power spectrum rows, shape (n_frames, 1025): |DFT(hann * frame)|^2."""
    _require_canonical(buf)
    n = frame_count(len(buf.samples))
    if n == 0:
        raise TooShort(f"need at least {FRAME_LEN} samples, got {len(buf.samples)}")
    window = np.hanning(FRAME_LEN)
    out = np.empty((n, FRAME_LEN // 2 + 1))
    for f0 in range(0, n, _BLOCK_FRAMES):
        f1 = min(f0 + _BLOCK_FRAMES, n)
        spec = np.fft.rfft(_frames(buf.samples, f0, f1) * window, axis=1)
        out[f0:f1] = np.abs(spec) ** 2
    return out


def mel_scale(f_hz: float | np.ndarray) -> float | np.ndarray:
    return 2595.0 * np.log10(1.0 + np.asarray(f_hz, dtype=np.float64) / 700.0)


def mel_to_hz(m: float | np.ndarray) -> float | np.ndarray:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int = N_MELS, f_min: float = 0.0,
                   f_max: float = SAMPLE_RATE / 2) -> np.ndarray:
    """Triangular filters, (n_mels, 1025), each row summing to 1."""
    edges_hz = mel_to_hz(np.linspace(mel_scale(f_min), mel_scale(f_max), n_mels + 2))
    bin_hz = np.arange(FRAME_LEN // 2 + 1) * SAMPLE_RATE / FRAME_LEN
    bank = np.zeros((n_mels, FRAME_LEN // 2 + 1))
    for m in range(n_mels):
        lo, center, hi = edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]
        rising = (bin_hz - lo) / (center - lo)
        falling = (hi - bin_hz) / (hi - center)
        tri = np.maximum(0.0, np.minimum(rising, falling))
        bank[m] = tri / tri.sum()
    return bank


def _log_mel(buf: AudioBuffer) -> np.ndarray:
    """Log mel energies, shape (n_frames, 26), floored so silence stays finite."""
    _require_canonical(buf)
    n = frame_count(len(buf.samples))
    if n == 0:
        raise TooShort(f"need at least {FRAME_LEN} samples, got {len(buf.samples)}")
    window = np.hanning(FRAME_LEN)
    bank_t = mel_filterbank().T
    out = np.empty((n, N_MELS))
    for f0 in range(0, n, _BLOCK_FRAMES):
        f1 = min(f0 + _BLOCK_FRAMES, n)
        spec = np.fft.rfft(_frames(buf.samples, f0, f1) * window, axis=1)
        power = np.abs(spec) ** 2
        out[f0:f1] = np.log(np.maximum(power @ bank_t, LOG_FLOOR))
    return out


def mfcc(buf: AudioBuffer) -> MfccMatrix:
    """MFCC rows: log mel energies -> orthonormal DCT-II -> first 13 terms."""
    coeffs = dct(_log_mel(buf), type=2, norm="ortho", axis=1)[:, :N_MFCC]
    return MfccMatrix(frames=coeffs)


def onset_envelope(buf: AudioBuffer) -> np.ndarray:
    """Spectral flux per hop: positive log-mel increases summed over bands."""
    logm = _log_mel(buf)
    if logm.shape[0] < 2:
        raise TooShort("onset envelope needs at least two frames")
    env = np.zeros(logm.shape[0])
    env[1:] = np.maximum(0.0, np.diff(logm, axis=0)).sum(axis=1)
    return env


@dataclass(frozen=True)
class TempoEstimate:
    bpm: float
    low_confidence: bool = False


def _autocorr(x: np.ndarray) -> np.ndarray:
    n = len(x)
    size = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(x, size)
    ac = np.fft.irfft(spec * np.conj(spec), size)[:n]
    return ac


def estimate_tempo(env: np.ndarray) -> TempoEstimate:
    """Tempo from envelope autocorrelation over the 40-200 BPM lag band.

    The winning integer lag is refined with a comb search (summing the
    autocorrelation at up to 12 multiples of candidate periods) so the
    period is resolved below one hop; raw hop quantization alone is
    coarser than 1 BPM above ~100 BPM. Ties at the integer stage break
    toward 120 BPM. A flat envelope (no periodicity) falls back to
    120 BPM flagged low-confidence.
    """
    env = np.asarray(env, dtype=np.float64)
    min_hops = int(np.ceil(4.0 / HOP_S))
    if len(env) < min_hops:
        raise TooShort(f"need {min_hops} hops (4 s) of envelope, got {len(env)}")

    ac = _autocorr(env)
    if ac[1:].size == 0 or np.max(ac[1:]) < 1e-9:
        return TempoEstimate(TEMPO_FALLBACK_BPM, low_confidence=True)

    lag_min = max(2, int(round(60.0 / (TEMPO_MAX_BPM * HOP_S))))
    lag_max = min(len(env) - 2, int(round(60.0 / (TEMPO_MIN_BPM * HOP_S))))

    def mass(l: int) -> float:
        # 3-lag neighborhood: a period that falls between integer lags
        # splits its peak over two neighbors.
        return float(ac[max(0, l - 1):l + 2].sum())

    band = np.array([mass(l) for l in range(lag_min, lag_max + 1)])
    best = np.max(band)
    tied = np.flatnonzero(band == best) + lag_min
    lag = int(min(tied, key=lambda l: (abs(60.0 / (l * HOP_S) - 120.0), l)))
    # Subharmonic guard: a true period leaves no correlation mass at half
    # of itself, so fold down while the half/third lag carries comparable
    # mass. (The subharmonic's peak is often the more concentrated one on
    # quantized onset trains, so raw argmax alone picks it.)
    folded = True
    while folded:
        folded = False
        for div in (2, 3):
            cand = int(round(lag / div))
            if cand >= lag_min and mass(cand) >= 0.55 * mass(lag):
                lag = cand
                folded = True
                break

    # Comb refinement around the integer winner.
    teeth = min(12, (len(ac) - 1) // lag)
    if teeth >= 2:
        periods = np.arange(lag - 1.0, lag + 1.0 + 1e-9, 0.02)
        periods = periods[periods >= 2.0]
        scores = np.zeros(len(periods))
        for j in range(1, teeth + 1):
            pos = np.round(j * periods).astype(int)
            ok = pos < len(ac)
            scores[ok] += ac[pos[ok]]
        top = np.flatnonzero(scores == np.max(scores))
        period = float((periods[top[0]] + periods[top[-1]]) / 2.0)  # plateau center
    else:
        period = float(lag)

    bpm = float(np.clip(60.0 / (period * HOP_S), TEMPO_MIN_BPM, TEMPO_MAX_BPM))
    return TempoEstimate(bpm)


def track_beats(env: np.ndarray, tempo_bpm: float, duration_s: float | None = None,
                low_confidence: bool = False) -> BeatGrid:
    """Greedy beat grid: seed at the envelope's global peak, then step one
    period at a time both ways, snapping each step to the local envelope
    argmax within +/-15% of the period (flat windows keep the prediction,
    which is what yields a uniform grid on silence)."""
    env = np.asarray(env, dtype=np.float64)
    if len(env) < 2:
        raise TooShort("beat tracking needs an envelope of at least two hops")
    if duration_s is None:
        duration_s = float(onset_time_s(len(env) - 1)) + HOP_S

    period_s = 60.0 / tempo_bpm
    tolerance_s = 0.15 * period_s

    def snap(t_pred: float) -> float:
        f_lo = max(0, int(np.ceil(((t_pred - tolerance_s) * SAMPLE_RATE - _ONSET_OFFSET) / HOP)))
        f_hi = min(len(env) - 1, int(np.floor(((t_pred + tolerance_s) * SAMPLE_RATE - _ONSET_OFFSET) / HOP)))
        if f_hi < f_lo:
            return t_pred
        window = env[f_lo:f_hi + 1]
        if window.max() > window.min():
            return float(onset_time_s(f_lo + int(np.argmax(window))))
        return t_pred

    seed = float(onset_time_s(int(np.argmax(env))))
    beats = [seed]
    t = seed
    while True:
        t = snap(t + period_s)
        if t > duration_s:
            break
        beats.append(t)
    t = seed
    while True:
        t = snap(t - period_s)
        if t < 0.0:
            break
        beats.insert(0, t)

    return BeatGrid(tempo_bpm=tempo_bpm, beat_times_s=np.array(beats),
                    onset_envelope=env, low_confidence=low_confidence)


def analyze_rhythm(buf: AudioBuffer) -> BeatGrid:
    """Convenience: envelope -> tempo -> beat grid for one buffer."""
    env = onset_envelope(buf)
    tempo = estimate_tempo(env)
    return track_beats(env, tempo.bpm, duration_s=buf.duration_s,
                       low_confidence=tempo.low_confidence)


PITCH_MIN_HZ = 50.0
PITCH_MAX_HZ = 2000.0
_VOICED_THRESHOLD = 0.3


def estimate_pitch(buf: AudioBuffer) -> PitchEstimate:
    """Fundamental from normalized autocorrelation of the center 100 ms."""
    rate = buf.sample_rate_hz
    n = len(buf.samples)
    if n < int(round(0.05 * rate)):
        raise TooShort("pitch estimation needs at least 50 ms of audio")
    win = int(round(0.1 * rate))
    if n > win:
        start = (n - win) // 2
        x = buf.samples[start:start + win]
    else:
        x = buf.samples
    ac = _autocorr(x)
    if ac[0] < 1e-12:
        return PitchEstimate(None, 0.0)
    r = ac / ac[0]
    lag_lo = max(1, int(np.ceil(rate / PITCH_MAX_HZ)))
    lag_hi = min(len(x) - 1, int(np.floor(rate / PITCH_MIN_HZ)))
    if lag_hi < lag_lo:
        return PitchEstimate(None, 0.0)
    lag = lag_lo + int(np.argmax(r[lag_lo:lag_hi + 1]))
    confidence = float(np.clip(r[lag], 0.0, 1.0))
    if confidence < _VOICED_THRESHOLD:
        return PitchEstimate(None, confidence)
    return PitchEstimate(rate / lag, confidence)
