from mixweave.audio import decode_wav, encode_wav
from mixweave.cli import main

from conftest import sine, textured_track


def run(args, data_dir):
    return main(["--data-dir", str(data_dir)] + args)


def test_session_round_trip(tmp_path, capsys):
    base = tmp_path / "base.wav"
    base.write_bytes(encode_wav(textured_track(duration_s=20.0, seed=61)))
    data = tmp_path / "data"

    assert run(["create", "demo", str(base)], data) == 0
    project_id = capsys.readouterr().out.strip()

    assert run(["add-text", project_id, "a calm blue evening", "--hint", "4", "10"],
               data) == 0
    out = capsys.readouterr().out
    assert "placed at" in out
    element_id = out.split()[1]

    assert run(["set", project_id, element_id, "--gain", "0.5"], data) == 0
    assert "version 3" in capsys.readouterr().out

    mix = tmp_path / "mix.wav"
    svg = tmp_path / "viz.svg"
    assert run(["render", project_id, "--out", str(mix), "--svg", str(svg)], data) == 0
    capsys.readouterr()
    assert decode_wav(mix.read_bytes()).duration_s > 19.0
    assert svg.read_bytes().startswith(b"<svg")


def test_add_audio_from_library(tmp_path, capsys, monkeypatch):
    lib = tmp_path / "library"
    lib.mkdir()
    (lib / "tone.wav").write_bytes(encode_wav(sine(300, 2.0, amplitude=0.5)))
    base = tmp_path / "base.wav"
    base.write_bytes(encode_wav(textured_track(duration_s=15.0, seed=62)))
    monkeypatch.setenv("MIXWEAVE_LIBRARY_DIR", str(lib))
    data = tmp_path / "data"

    run(["create", "demo", str(base)], data)
    project_id = capsys.readouterr().out.strip()
    assert run(["add-audio", project_id, "tone.wav"], data) == 0
    assert "placed at" in capsys.readouterr().out


def test_add_image_with_sidecar(tmp_path, capsys):
    import io

    from PIL import Image

    img_path = tmp_path / "cat.png"
    buf = io.BytesIO()
    Image.new("RGB", (8, 8), (200, 10, 10)).save(buf, format="PNG")
    img_path.write_bytes(buf.getvalue())
    (tmp_path / "cat.caption.txt").write_text("a yellow and white striped cat")

    base = tmp_path / "base.wav"
    base.write_bytes(encode_wav(textured_track(duration_s=15.0, seed=63)))
    data = tmp_path / "data"

    run(["create", "demo", str(base)], data)
    project_id = capsys.readouterr().out.strip()
    assert run(["add-image", project_id, str(img_path)], data) == 0
    out = capsys.readouterr().out
    assert "caption: a yellow and white striped cat" in out


def test_errors_exit_nonzero(tmp_path, capsys):
    data = tmp_path / "data"
    assert run(["create", "demo", str(tmp_path / "missing.wav")], data) == 1
    assert "error:" in capsys.readouterr().err
    assert run(["render", "ghost-project"], data) == 1
