import io

import httpx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from mixweave.audio import SAMPLE_RATE, encode_wav
from mixweave.errors import BackendUnavailable, BadGeneratedAudio, BadImage
from mixweave.features import estimate_tempo, onset_envelope
from mixweave.sonify import (
    COLOR_LEXICON,
    PALETTE,
    Backends,
    RemoteCaptioner,
    RemoteGenerator,
    StubCaptioner,
    StubGenerator,
    caption_image,
    dominant_color,
    extract_colors,
    process_element,
    sonify,
)

from conftest import sine


def png_bytes(color, size=(10, 10)) -> bytes:
    img = Image.new("RGB", size, color)
    out = io.BytesIO()
    img.save(out, format="PNG")
    return out.getvalue()


class TestExtractColors:
    def test_cat_caption(self):
        assert extract_colors("a yellow and white striped cat") == [
            (255, 255, 0), (255, 255, 255)]

    def test_no_color_words(self):
        assert extract_colors("a quiet melody") == []

    def test_whole_word_rule(self):
        assert extract_colors("REDraw the red line") == [(255, 0, 0)]

    def test_dedup_keeps_first_occurrence(self):
        assert extract_colors("blue red blue RED Blue") == [(0, 0, 255), (255, 0, 0)]

    @given(st.lists(st.sampled_from(sorted(COLOR_LEXICON) + ["cat", "sky", "melody", "redish"]),
                    max_size=12))
    @settings(max_examples=80, deadline=None)
    def test_property_lexicon_only_first_occurrence_no_dups(self, words):
        got = extract_colors(" ".join(words))
        assert all(c in COLOR_LEXICON.values() for c in got)
        assert len(got) == len(set(got))
        expected = []
        for w in words:
            rgb = COLOR_LEXICON.get(w)
            if rgb is not None and rgb not in expected:
                expected.append(rgb)
        assert got == expected


class TestDominantColor:
    def test_solid_red(self):
        assert dominant_color(png_bytes((255, 0, 0))) == (248, 8, 8)

    def test_solid_black(self):
        assert dominant_color(png_bytes((0, 0, 0))) == (8, 8, 8)

    def test_black_white_tie_breaks_low(self):
        img = Image.new("RGB", (10, 10), (255, 255, 255))
        for x in range(10):
            for y in range(5):
                img.putpixel((x, y), (0, 0, 0))
        out = io.BytesIO()
        img.save(out, format="PNG")
        assert dominant_color(out.getvalue()) == (8, 8, 8)

    def test_bad_image(self):
        with pytest.raises(BadImage):
            dominant_color(b"\x89PNG but not really")


class TestCaptioning:
    def test_stub_fallback(self):
        assert caption_image(png_bytes((1, 2, 3)), StubCaptioner()) == "an image"

    def test_stub_sidecar(self, tmp_path):
        img = tmp_path / "shot.png"
        img.write_bytes(png_bytes((9, 9, 9)))
        (tmp_path / "shot.caption.txt").write_text("a red sunset")
        got = caption_image(img.read_bytes(), StubCaptioner(), source_path=str(img))
        assert got == "a red sunset"

    def test_truncated_jpeg_rejected(self):
        img = Image.new("RGB", (20, 20), (5, 5, 5))
        out = io.BytesIO()
        img.save(out, format="JPEG")
        with pytest.raises(BadImage):
            caption_image(out.getvalue()[:40], StubCaptioner())

    def test_non_png_jpeg_rejected(self):
        img = Image.new("RGB", (4, 4))
        out = io.BytesIO()
        img.save(out, format="BMP")
        with pytest.raises(BadImage):
            caption_image(out.getvalue(), StubCaptioner())

    def test_remote_captioner(self):
        def handler(request):
            return httpx.Response(200, json={"caption": "a yellow and white striped cat"})

        client = httpx.Client(transport=httpx.MockTransport(handler))
        cap = RemoteCaptioner("http://caption.test/v1", client=client)
        assert caption_image(png_bytes((200, 180, 40)), cap) == "a yellow and white striped cat"

    def test_remote_captioner_retries_then_fails(self):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(503)

        client = httpx.Client(transport=httpx.MockTransport(handler))
        cap = RemoteCaptioner("http://caption.test/v1", client=client)
        with pytest.raises(BackendUnavailable):
            cap.caption(png_bytes((0, 0, 0)))
        assert len(calls) == 3  # initial try + 2 retries


class TestStubGenerator:
    def test_deterministic(self):
        g = StubGenerator()
        a = g.generate("a calm melody", 4.0, seed=7)
        b = g.generate("a calm melody", 4.0, seed=7)
        assert a == b
        assert g.generate("a calm melody", 4.0, seed=8) != a

    def test_duration_contract(self):
        clip = sonify("anything at all", 4.0, StubGenerator(), seed=0)
        assert clip.duration_s == pytest.approx(4.0, abs=0.4)

    def test_fast_forces_tempo(self):
        clip = sonify("a fast bright run", 8.0, StubGenerator(), seed=1)
        est = estimate_tempo(onset_envelope(clip))
        assert abs(est.bpm - 140.0) <= 5.0

    def test_slow_forces_tempo(self):
        clip = sonify("really slow and heavy", 8.0, StubGenerator(), seed=1)
        est = estimate_tempo(onset_envelope(clip))
        assert abs(est.bpm - 80.0) <= 5.0

    def test_duration_bounds(self):
        with pytest.raises(ValueError):
            sonify("x", 0.5, StubGenerator())
        with pytest.raises(ValueError):
            sonify("x", 31.0, StubGenerator())


class TestRemoteGenerator:
    def test_decodes_and_resamples(self):
        wav = encode_wav(sine(440, 2.0, rate=44100))

        def handler(request):
            assert request.headers["content-type"] == "application/json"
            return httpx.Response(200, content=wav)

        client = httpx.Client(transport=httpx.MockTransport(handler))
        clip = sonify("prompt", 2.0, RemoteGenerator("http://gen.test/v1", client=client))
        assert clip.sample_rate_hz == SAMPLE_RATE
        assert clip.duration_s == pytest.approx(2.0, abs=0.2)

    def test_undecodable_response(self):
        client = httpx.Client(transport=httpx.MockTransport(
            lambda request: httpx.Response(200, content=b"oops")))
        with pytest.raises(BadGeneratedAudio):
            sonify("prompt", 2.0, RemoteGenerator("http://gen.test/v1", client=client))

    def test_duration_violation(self):
        wav = encode_wav(sine(440, 3.0))
        client = httpx.Client(transport=httpx.MockTransport(
            lambda request: httpx.Response(200, content=wav)))
        with pytest.raises(BadGeneratedAudio):
            sonify("prompt", 2.0, RemoteGenerator("http://gen.test/v1", client=client))

    def test_unavailable(self):
        client = httpx.Client(transport=httpx.MockTransport(
            lambda request: httpx.Response(500)))
        with pytest.raises(BackendUnavailable):
            sonify("prompt", 2.0, RemoteGenerator("http://gen.test/v1", client=client))


class TestProcessElement:
    def test_text_element(self):
        el = process_element("e1", "text", "a blue calm evening", Backends(), 0)
        assert el.caption == "a blue calm evening"
        assert el.color == (0, 0, 255)
        assert el.clip.sample_rate_hz == SAMPLE_RATE
        assert el.clip.duration_s == pytest.approx(5.0, abs=0.5)

    def test_audio_element_uses_palette(self):
        wav = encode_wav(sine(300, 2.0))
        el = process_element("e2", "audio", wav, Backends(), 3, source_name="meow.wav")
        assert el.caption == ""
        assert el.color == PALETTE[3]
        assert el.source_name == "meow.wav"
        from mixweave.audio import decode_wav
        assert np.array_equal(el.clip.samples, decode_wav(wav).samples)

    def test_image_element_color_from_caption(self, tmp_path):
        img = tmp_path / "cat.png"
        img.write_bytes(png_bytes((120, 10, 10)))
        (tmp_path / "cat.caption.txt").write_text("a yellow and white striped cat")
        el = process_element("e3", "image", img.read_bytes(), Backends(), 0,
                             source_path=str(img))
        assert "yellow" in el.caption
        assert el.color == (255, 255, 0)

    def test_image_element_falls_back_to_dominant_color(self):
        el = process_element("e4", "image", png_bytes((250, 5, 5)), Backends(), 0)
        assert el.caption == "an image"
        assert el.color == (248, 8, 8)

    def test_palette_wraps(self):
        wav = encode_wav(sine(300, 2.0))
        el = process_element("e5", "audio", wav, Backends(), 11)
        assert el.color == PALETTE[3]

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            process_element("e6", "video", b"", Backends(), 0)
