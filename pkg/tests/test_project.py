import json

import numpy as np
import pytest

from mixweave.audio import SAMPLE_RATE, AudioBuffer, encode_wav
from mixweave.errors import (
    DurationOutOfRange,
    InvalidPlacement,
    MalformedWav,
    NoCandidate,
    UnknownElement,
    UnknownProject,
)
from mixweave.project import ProjectStore
from mixweave.viz import to_json_bytes

from conftest import sine, textured_track


@pytest.fixture
def store(tmp_path):
    return ProjectStore(tmp_path / "data")


@pytest.fixture
def base_wav():
    return encode_wav(textured_track(duration_s=25.0, seed=31))


class TestCreate:
    def test_create_and_get(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        assert project.version == 1
        got = store.get(project.id)
        assert got.base.duration_s == pytest.approx(25.0, abs=0.01)
        assert (store.project_dir(project.id) / "base.wav").read_bytes() == base_wav

    def test_too_short(self, store):
        with pytest.raises(DurationOutOfRange):
            store.create_project("x", encode_wav(sine(440, 2.0)))

    def test_corrupt_bytes(self, store):
        with pytest.raises(MalformedWav):
            store.create_project("x", b"definitely not audio")

    def test_unknown_project(self, store):
        with pytest.raises(UnknownProject):
            store.get("missing")


class TestAddElement:
    def test_text_element_lands_in_track(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        element, plan = store.add_element(project.id, "text", "calm blue evening")
        assert element.color == (0, 0, 255)
        assert 0.0 <= plan.start_s < plan.end_s <= project.base.duration_s
        assert store.get(project.id).version == 2

    def test_audio_self_match(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        beat = float(project.beat_grid.beat_times_s[10])
        s0 = int(round(beat * SAMPLE_RATE))
        clip = AudioBuffer(project.base.samples[s0:s0 + 2 * SAMPLE_RATE].copy(), SAMPLE_RATE)
        element, plan = store.add_element(project.id, "audio", encode_wav(clip),
                                          source_name="cut.wav")
        assert abs(plan.start_s - beat) < 0.5

    def test_hint_respected(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        _, plan = store.add_element(project.id, "text", "anything",
                                    hint_window=(5.0, 12.0))
        assert 5.0 <= plan.start_s and plan.end_s <= 12.0

    def test_no_candidate_leaves_project_untouched(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        store.add_element(project.id, "text", "first", hint_window=(5.0, 11.0))
        pdir = store.project_dir(project.id)
        before = {str(p): p.read_bytes() for p in pdir.rglob("*") if p.is_file()}
        version_before = store.get(project.id).version
        with pytest.raises(NoCandidate):
            # same window is now fully occupied by the first element
            store.add_element(project.id, "text", "second", hint_window=(5.0, 11.0))
        assert store.get(project.id).version == version_before
        after = {str(p): p.read_bytes() for p in pdir.rglob("*") if p.is_file()}
        assert after == before

    def test_pitch_metadata_recorded(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        element, _ = store.add_element(project.id, "audio", encode_wav(sine(440, 2.0)))
        pe = store.get(project.id).pitches[element.id]
        assert pe.voiced and abs(pe.f0_hz - 440) < 3


class TestUpdate:
    def test_gain_edit_bumps_version(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        element, _ = store.add_element(project.id, "text", "hello")
        v = store.update_element(project.id, element.id, gain=0.5)
        assert v == 3

    def test_remove_restores_base_render(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        base_mix, _ = store.render(project.id)
        element, _ = store.add_element(project.id, "text", "hello")
        store.update_element(project.id, element.id, remove=True)
        mix, viz = store.render(project.id)
        assert mix == base_mix
        assert viz.layers == ()

    def test_failed_update_changes_nothing(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        element, _ = store.add_element(project.id, "text", "hello")
        pdir = store.project_dir(project.id)
        before = {p.name: p.read_bytes() for p in pdir.rglob("*") if p.is_file()}
        version_before = store.get(project.id).version
        with pytest.raises(InvalidPlacement):
            store.update_element(project.id, element.id, start_s=1e6)
        assert store.get(project.id).version == version_before
        after = {p.name: p.read_bytes() for p in pdir.rglob("*") if p.is_file()}
        assert after == before

    def test_unknown_element(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        with pytest.raises(UnknownElement):
            store.update_element(project.id, "ghost", gain=1.0)


class TestRender:
    def test_no_elements_mix_is_base_reencoded(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        mix, viz = store.render(project.id)
        assert mix == encode_wav(project.base)
        assert viz.layers == ()

    def test_render_cached_and_stable(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        store.add_element(project.id, "text", "gold dust")
        a = store.render(project.id)
        b = store.render(project.id)
        assert a[0] == b[0] and a[0] is b[0]  # cached object, same bytes

    def test_zero_gain_matches_bare_render(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        bare, _ = store.render(project.id)
        element, _ = store.add_element(project.id, "text", "hello")
        store.update_element(project.id, element.id, gain=0.0)
        mix, _ = store.render(project.id)
        assert mix == bare

    def test_viz_thickness_scales_with_gain(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        element, _ = store.add_element(project.id, "text", "hello")
        entry = store.get(project.id).manifest.entries[0]
        _, viz1 = store.render(project.id)
        store.update_element(project.id, element.id, gain=entry.gain * 2)
        _, viz2 = store.render(project.id)
        t1, t2 = viz1.layers[0].thickness, viz2.layers[0].thickness
        nz = t1 > 0
        assert np.all(np.abs(t2[nz] / t1[nz] - 2.0) < 1e-9)


class TestPersistence:
    def test_save_load_render_bit_identical(self, store, base_wav, tmp_path):
        project = store.create_project("demo", base_wav)
        store.add_element(project.id, "text", "a calm blue evening", seed=5)
        store.add_element(project.id, "audio", encode_wav(sine(300, 2.0)),
                          source_name="tone.wav")
        mix1, viz1 = store.render(project.id)

        fresh = ProjectStore(store.data_dir)
        mix2, viz2 = fresh.render(project.id)
        assert mix1 == mix2
        assert to_json_bytes(viz1) == to_json_bytes(viz2)

    def test_loaded_project_keeps_metadata(self, store, base_wav):
        project = store.create_project("demo", base_wav, seed=9)
        element, plan = store.add_element(project.id, "text", "gold dust at dusk")
        fresh = ProjectStore(store.data_dir)
        loaded = fresh.get(project.id)
        assert loaded.name == "demo" and loaded.seed == 9
        assert loaded.version == 2
        el = loaded.element(element.id)
        assert el.caption == "gold dust at dusk" and el.color == (255, 215, 0)
        entry = loaded.manifest.entries[0]
        assert entry.placement.start_s == plan.start_s
        assert entry.placement.score == plan.score

    def test_list_projects(self, store, base_wav):
        a = store.create_project("a", base_wav)
        b = store.create_project("b", base_wav)
        assert store.list_projects() == sorted([a.id, b.id])
        fresh = ProjectStore(store.data_dir)
        assert fresh.list_projects() == sorted([a.id, b.id])

    def test_project_json_is_valid_json(self, store, base_wav):
        project = store.create_project("demo", base_wav)
        store.add_element(project.id, "text", "hello red world")
        doc = json.loads((store.project_dir(project.id) / "project.json").read_text())
        assert doc["version"] == 2
        assert doc["elements"][0]["color"] == [255, 0, 0]
