"""Turn text and image inputs into audio clips plus color metadata.

Text-to-audio and image captioning sit behind small backend contracts so
the pipeline runs offline: the stub generator renders a deterministic
pentatonic motif from a hash of (text, seed), and the stub captioner reads
an optional sidecar file. Remote backends speak HTTP to hosted models.
"""

from __future__ import annotations

import hashlib
import io
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import httpx
import numpy as np
from PIL import Image, UnidentifiedImageError

from .audio import SAMPLE_RATE, AudioBuffer, decode_wav, encode_wav, to_canonical
from .errors import BackendUnavailable, BadGeneratedAudio, BadImage

RGB = tuple[int, int, int]

# Base color vocabulary scanned out of captions/text. Order here only
# matters for documentation; match order follows the text.
COLOR_LEXICON: dict[str, RGB] = {
    "black": (0, 0, 0),
    "white": (255, 255, 255),
    "red": (255, 0, 0),
    "green": (0, 128, 0),
    "blue": (0, 0, 255),
    "yellow": (255, 255, 0),
    "orange": (255, 165, 0),
    "purple": (128, 0, 128),
    "pink": (255, 192, 203),
    "brown": (165, 42, 42),
    "gray": (128, 128, 128),
    "cyan": (0, 255, 255),
    "magenta": (255, 0, 255),
    "gold": (255, 215, 0),
    "silver": (192, 192, 192),
    "beige": (245, 245, 220),
}

# Categorical fallback hues for inputs that name no color at all.
PALETTE: tuple[RGB, ...] = (
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
)

CLIP_DURATION_DEFAULT_S = 5.0
CLIP_DURATION_MIN_S = 1.0
CLIP_DURATION_MAX_S = 30.0

_WORD_RE = re.compile(r"[A-Za-z]+")


def extract_colors(text: str, lexicon: dict[str, RGB] | None = None) -> list[RGB]:
    """Lexicon colors named in `text`, first-occurrence order, de-duplicated.

    Whole words only: "REDraw" does not match "red".
    """
    lexicon = COLOR_LEXICON if lexicon is None else lexicon
    found: list[RGB] = []
    seen: set[str] = set()
    for token in _WORD_RE.findall(text):
        word = token.lower()
        if word in lexicon and word not in seen:
            seen.add(word)
            found.append(lexicon[word])
    return found


def _open_image(data: bytes) -> Image.Image:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise BadImage(f"payload does not decode as an image: {exc}") from exc
    if img.format not in ("PNG", "JPEG"):
        raise BadImage(f"unsupported image format {img.format!r} (want PNG or JPEG)")
    return img


def dominant_color(image: bytes) -> RGB:
    """Centroid of the modal 4-bit RGB bin of the (downsampled) image.

    Ties go to the lowest joint bin index, so a 50/50 black/white image
    reports black.
    """
    img = _open_image(image).convert("RGB")
    img.thumbnail((64, 64), Image.Resampling.NEAREST)
    px = np.asarray(img, dtype=np.uint8).reshape(-1, 3)
    bins = px >> 4
    joint = (bins[:, 0].astype(np.int32) << 8) | (bins[:, 1].astype(np.int32) << 4) | bins[:, 2]
    counts = np.bincount(joint, minlength=4096)
    modal = int(np.argmax(counts))  # argmax takes the lowest index on ties
    r, g, b = (modal >> 8) & 0xF, (modal >> 4) & 0xF, modal & 0xF
    return (r * 16 + 8, g * 16 + 8, b * 16 + 8)


class StubCaptioner:
    """Offline captioner: sidecar `<stem>.caption.txt` next to the source
    file when one exists, otherwise a fixed placeholder."""

    fallback = "an image"

    def caption(self, image: bytes, source_path: str | None = None) -> str:
        if source_path:
            sidecar = Path(source_path).with_suffix(".caption.txt")
            if sidecar.is_file():
                text = sidecar.read_text(encoding="utf-8").strip()
                if text:
                    return text
        return self.fallback


class RemoteCaptioner:
    """POSTs the image (multipart) to a captioning service, expects
    JSON {"caption": ...}. Two retries, then BackendUnavailable."""

    def __init__(self, url: str, timeout_s: float = 30.0, client: httpx.Client | None = None):
        self.url = url
        self.timeout_s = timeout_s
        self._client = client

    def caption(self, image: bytes, source_path: str | None = None) -> str:
        client = self._client or httpx.Client(timeout=self.timeout_s)
        last = None
        for _ in range(3):  # initial try + 2 retries
            try:
                resp = client.post(self.url, files={"image": ("image", image)})
                if resp.status_code == 200:
                    text = str(resp.json().get("caption", "")).strip()
                    if text:
                        return text
                    last = "empty caption in response"
                else:
                    last = f"HTTP {resp.status_code}"
            except httpx.HTTPError as exc:
                last = str(exc)
        raise BackendUnavailable(f"captioner at {self.url} failed: {last}")


def caption_image(image: bytes, captioner, source_path: str | None = None) -> str:
    """Validate the image locally, then ask the backend to describe it."""
    _open_image(image)
    text = captioner.caption(image, source_path=source_path)
    if not text:
        raise BackendUnavailable("captioner returned an empty caption")
    return text


# Major pentatonic degrees as frequency ratios over the base pitch.
_PENTATONIC = (1.0, 9 / 8, 5 / 4, 3 / 2, 5 / 3)
_ATTACK_S = 0.010
_RELEASE_S = 0.050


class StubGenerator:
    """Deterministic text-to-audio stand-in: a hash of (text, seed) picks a
    5-note pentatonic motif, base pitch in 220-440 Hz and tempo in
    80-140 BPM; "fast"/"slow" in the text force tempo 140/80. Rendered as
    sine notes, one per beat, 10 ms attack / 50 ms release."""

    def generate(self, prompt: str, duration_s: float, seed: int) -> bytes:
        digest = hashlib.sha256(f"{seed}:{prompt}".encode("utf-8")).digest()
        base_hz = 220.0 + (digest[0] / 255.0) * 220.0
        tempo = 80.0 + (digest[1] / 255.0) * 60.0
        words = {w.lower() for w in _WORD_RE.findall(prompt)}
        if "fast" in words:
            tempo = 140.0
        elif "slow" in words:
            tempo = 80.0
        motif = [_PENTATONIC[digest[2 + i] % 5] for i in range(5)]

        n = int(round(duration_s * SAMPLE_RATE))
        out = np.zeros(n)
        beat_s = 60.0 / tempo
        attack = int(round(_ATTACK_S * SAMPLE_RATE))
        release = int(round(_RELEASE_S * SAMPLE_RATE))
        i = 0
        while True:
            s0 = int(round(i * beat_s * SAMPLE_RATE))
            if s0 >= n:
                break
            s1 = min(int(round((i + 1) * beat_s * SAMPLE_RATE)), n)
            span = s1 - s0
            tt = np.arange(span) / SAMPLE_RATE
            note = 0.6 * np.sin(2 * np.pi * base_hz * motif[i % 5] * tt)
            env = np.ones(span)
            a = min(attack, span)
            env[:a] = np.arange(1, a + 1) / a
            r = min(release, span)
            if r:
                env[span - r:] *= np.arange(r, 0, -1) / r
            out[s0:s1] = note * env
            i += 1
        return encode_wav(AudioBuffer(out, SAMPLE_RATE))


class RemoteGenerator:
    """POSTs JSON {"prompt","duration_s","seed"}, expects an audio/wav body."""

    def __init__(self, url: str, timeout_s: float = 30.0, client: httpx.Client | None = None):
        self.url = url
        self.timeout_s = timeout_s
        self._client = client

    def generate(self, prompt: str, duration_s: float, seed: int) -> bytes:
        client = self._client or httpx.Client(timeout=self.timeout_s)
        last = None
        for _ in range(3):
            try:
                resp = client.post(self.url, json={
                    "prompt": prompt, "duration_s": duration_s, "seed": seed,
                })
                if resp.status_code == 200:
                    return resp.content
                last = f"HTTP {resp.status_code}"
            except httpx.HTTPError as exc:
                last = str(exc)
        raise BackendUnavailable(f"generator at {self.url} failed: {last}")


def _generate_clip(text: str, duration_s: float, generator,
                   seed: int) -> tuple[AudioBuffer, bytes]:
    """Fetch, validate, and canonicalize generated audio; returns the clip
    together with the wire bytes it was decoded from."""
    if not text.strip():
        raise ValueError("cannot sonify empty text")
    if not (CLIP_DURATION_MIN_S <= duration_s <= CLIP_DURATION_MAX_S):
        raise ValueError(f"duration {duration_s} outside "
                         f"[{CLIP_DURATION_MIN_S}, {CLIP_DURATION_MAX_S}] s")
    wav_bytes = generator.generate(text, duration_s, seed)
    try:
        clip = decode_wav(wav_bytes)
    except Exception as exc:
        raise BadGeneratedAudio(f"generator response does not decode: {exc}") from exc
    if abs(clip.duration_s - duration_s) > 0.1 * duration_s:
        raise BadGeneratedAudio(f"generated {clip.duration_s:.2f}s for a "
                                f"{duration_s:.2f}s request (over 10% off)")
    return to_canonical(clip), wav_bytes


def sonify(text: str, duration_s: float, generator, seed: int = 0) -> AudioBuffer:
    """Render `text` to a canonical-rate clip through the generator backend.

    The returned-audio duration must be within 10% of the request; anything
    else (or undecodable bytes) is BadGeneratedAudio.
    """
    clip, _ = _generate_clip(text, duration_s, generator, seed)
    return clip


@dataclass
class InputElement:
    """One user-provided item plus everything derived from it."""

    id: str
    kind: str  # "text" | "image" | "audio"
    raw: bytes | str
    caption: str
    color: RGB
    clip: AudioBuffer
    clip_bytes: bytes  # wire/storage form of the clip; decoding it reproduces `clip`
    source_name: str = ""
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())


@dataclass
class Backends:
    generator: object = field(default_factory=StubGenerator)
    captioner: object = field(default_factory=StubCaptioner)


def process_element(element_id: str, kind: str, payload: bytes | str,
                    backends: Backends, palette_index: int,
                    duration_s: float = CLIP_DURATION_DEFAULT_S, seed: int = 0,
                    source_name: str = "", source_path: str | None = None) -> InputElement:
    """Derive caption, color, and clip for one input.

    Color preference: first color word in the caption, then the image's
    dominant color, then the categorical palette. Audio clips keep their
    original bytes so reloading a project reproduces the float samples
    bit for bit.
    """
    if kind == "text":
        if not isinstance(payload, str) or not payload.strip():
            raise ValueError("text element needs non-empty text")
        caption = payload
        clip, clip_bytes = _generate_clip(caption, duration_s, backends.generator, seed)
    elif kind == "image":
        caption = caption_image(payload, backends.captioner, source_path=source_path)
        clip, clip_bytes = _generate_clip(caption, duration_s, backends.generator, seed)
    elif kind == "audio":
        caption = ""
        clip_bytes = bytes(payload)
        clip = to_canonical(decode_wav(clip_bytes))
    else:
        raise ValueError(f"unknown element kind {kind!r}")

    colors = extract_colors(caption)
    if colors:
        color = colors[0]
    elif kind == "image":
        color = dominant_color(payload)
    else:
        color = PALETTE[palette_index % len(PALETTE)]

    return InputElement(id=element_id, kind=kind, raw=payload, caption=caption,
                        color=color, clip=clip, clip_bytes=clip_bytes,
                        source_name=source_name)
