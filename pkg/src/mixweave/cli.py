"""Command-line mirror of the service API.

    mixweave create "My mix" base.wav
    mixweave add-text <project> "a calm blue evening" --hint 5 9
    mixweave add-image <project> cat.png
    mixweave add-audio <project> meow.wav
    mixweave set <project> <element> --gain 0.5
    mixweave render <project> --out mix.wav --svg out.svg
    mixweave serve --port 8000
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config, make_backends
from .errors import MixweaveError
from .project import ProjectStore
from .viz import export_svg


def _store(args) -> ProjectStore:
    cfg = load_config(args.config)
    if args.data_dir:
        cfg.data_dir = Path(args.data_dir)
    return ProjectStore(cfg.data_dir, make_backends(cfg))


def _resolve_audio(path_arg: str, args) -> Path:
    """Accept a filesystem path or a bare filename from the library dir."""
    path = Path(path_arg)
    if path.is_file():
        return path
    cfg = load_config(args.config)
    candidate = Path(cfg.library_dir) / path_arg
    if candidate.is_file():
        return candidate
    raise FileNotFoundError(f"no such file: {path_arg}")


def _print_plan(element_id: str, plan) -> None:
    beat = plan.snapped_beat_index if plan.snapped_beat_index is not None else "-"
    print(f"element {element_id} placed at {plan.start_s:.2f}s-{plan.end_s:.2f}s "
          f"(score {plan.score:.4f}, beat {beat})")


def cmd_create(args) -> int:
    store = _store(args)
    wav = _resolve_audio(args.base, args).read_bytes()
    project = store.create_project(args.name, wav, base_filename=Path(args.base).name,
                                   seed=args.seed)
    print(project.id)
    return 0


def _hint(args):
    return tuple(args.hint) if args.hint else None


def cmd_add_text(args) -> int:
    store = _store(args)
    element, plan = store.add_element(args.project, "text", args.text,
                                      duration_s=args.duration, hint_window=_hint(args),
                                      seed=args.seed)
    _print_plan(element.id, plan)
    return 0


def cmd_add_image(args) -> int:
    store = _store(args)
    path = Path(args.image)
    element, plan = store.add_element(args.project, "image", path.read_bytes(),
                                      duration_s=args.duration, hint_window=_hint(args),
                                      seed=args.seed, source_name=path.name,
                                      source_path=str(path))
    print(f"caption: {element.caption}")
    _print_plan(element.id, plan)
    return 0


def cmd_add_audio(args) -> int:
    store = _store(args)
    path = _resolve_audio(args.audio, args)
    element, plan = store.add_element(args.project, "audio", path.read_bytes(),
                                      hint_window=_hint(args), source_name=path.name)
    _print_plan(element.id, plan)
    return 0


def cmd_set(args) -> int:
    store = _store(args)
    version = store.update_element(args.project, args.element, gain=args.gain,
                                   start_s=args.start, remove=args.remove)
    print(f"version {version}")
    return 0


def cmd_render(args) -> int:
    store = _store(args)
    mix_bytes, viz = store.render(args.project)
    Path(args.out).write_bytes(mix_bytes)
    print(f"wrote {args.out} ({len(mix_bytes)} bytes)")
    if args.svg:
        Path(args.svg).write_bytes(export_svg(viz, args.width, args.height))
        print(f"wrote {args.svg}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = load_config(args.config)
    if args.data_dir:
        cfg.data_dir = Path(args.data_dir)
    uvicorn.run(create_app(cfg), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixweave", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", default=None, help="path to a JSON config file")
    parser.add_argument("--data-dir", default=None, help="override the project data directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("create", help="create a project from a base WAV")
    p.add_argument("name")
    p.add_argument("base", help="WAV path, or a filename from the library dir")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_create)

    def add_common(p, with_duration=True):
        p.add_argument("--hint", nargs=2, type=float, metavar=("LO_S", "HI_S"),
                       help="place the element inside this time window")
        if with_duration:
            p.add_argument("--duration", type=float, default=None,
                           help="generated clip length in seconds (1-30)")
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("add-text", help="sonify a text prompt into the mix")
    p.add_argument("project")
    p.add_argument("text")
    add_common(p)
    p.set_defaults(func=cmd_add_text)

    p = sub.add_parser("add-image", help="caption an image and sonify the caption")
    p.add_argument("project")
    p.add_argument("image")
    add_common(p)
    p.set_defaults(func=cmd_add_image)

    p = sub.add_parser("add-audio", help="drop an audio clip into the mix")
    p.add_argument("project")
    p.add_argument("audio", help="WAV path, or a filename from the library dir")
    add_common(p, with_duration=False)
    p.set_defaults(func=cmd_add_audio)

    p = sub.add_parser("set", help="edit or remove an element")
    p.add_argument("project")
    p.add_argument("element")
    p.add_argument("--gain", type=float, default=None)
    p.add_argument("--start", type=float, default=None)
    p.add_argument("--remove", action="store_true")
    p.set_defaults(func=cmd_set)

    p = sub.add_parser("render", help="render the mix (and optionally an SVG)")
    p.add_argument("project")
    p.add_argument("--out", default="mix.wav")
    p.add_argument("--svg", default=None)
    p.add_argument("--width", type=int, default=1000)
    p.add_argument("--height", type=int, default=300)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MixweaveError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
