"""Runtime configuration: data/library directories and backend endpoints.

Sources, lowest to highest precedence: built-in defaults, a JSON config
file (MIXWEAVE_CONFIG or an explicit path), then MIXWEAVE_* environment
variables. Unset backend URLs select the offline stub backends.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .sonify import Backends, RemoteCaptioner, RemoteGenerator, StubCaptioner, StubGenerator


@dataclass
class Config:
    data_dir: Path = Path("data")
    library_dir: Path = Path("library")
    generator_url: str | None = None
    captioner_url: str | None = None
    ui_dir: Path | None = None  # static frontend bundle, served at /ui when present


def load_config(path: str | os.PathLike | None = None) -> Config:
    cfg = Config()
    path = path or os.environ.get("MIXWEAVE_CONFIG")
    if path and Path(path).is_file():
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if "data_dir" in raw:
            cfg.data_dir = Path(raw["data_dir"])
        if "library_dir" in raw:
            cfg.library_dir = Path(raw["library_dir"])
        cfg.generator_url = raw.get("generator_url", cfg.generator_url)
        cfg.captioner_url = raw.get("captioner_url", cfg.captioner_url)
        if "ui_dir" in raw:
            cfg.ui_dir = Path(raw["ui_dir"])
    if "MIXWEAVE_DATA_DIR" in os.environ:
        cfg.data_dir = Path(os.environ["MIXWEAVE_DATA_DIR"])
    if "MIXWEAVE_LIBRARY_DIR" in os.environ:
        cfg.library_dir = Path(os.environ["MIXWEAVE_LIBRARY_DIR"])
    cfg.generator_url = os.environ.get("MIXWEAVE_GENERATOR_URL", cfg.generator_url)
    cfg.captioner_url = os.environ.get("MIXWEAVE_CAPTIONER_URL", cfg.captioner_url)
    if "MIXWEAVE_UI_DIR" in os.environ:
        cfg.ui_dir = Path(os.environ["MIXWEAVE_UI_DIR"])
    return cfg


def make_backends(cfg: Config) -> Backends:
    generator = RemoteGenerator(cfg.generator_url) if cfg.generator_url else StubGenerator()
    captioner = RemoteCaptioner(cfg.captioner_url) if cfg.captioner_url else StubCaptioner()
    return Backends(generator=generator, captioner=captioner)
