"""Project state, persistence, and the session pipeline.

A project is one directory: project.json (metadata, placements, gains)
plus the base track and each element's payload/clip stored as the exact
bytes they arrived as. Storing wire bytes verbatim is what makes a
save/load/render cycle bit-identical to the original render. Derived
artifacts (MFCC, beat grid, mixes) are cached in memory against the
project version and recomputed lazily after a reload.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .audio import AudioBuffer, decode_wav, encode_wav, to_canonical
from .errors import (
    DurationOutOfRange,
    InvalidManifest,
    UnknownElement,
    UnknownProject,
)
from .features import BeatGrid, MfccMatrix, PitchEstimate, analyze_rhythm, estimate_pitch, mfcc
from .mixer import MixEntry, MixManifest, auto_gain, default_fade_s, render_mix, update_entry
from .placement import PlacementPlan, find_placement
from .sonify import Backends, InputElement, process_element
from .viz import VizModel, build_viz, to_json_bytes

BASE_MIN_S = 5.0
BASE_MAX_S = 600.0


@dataclass
class Project:
    id: str
    name: str
    base: AudioBuffer  # canonical-rate working copy
    base_raw: bytes  # uploaded bytes, stored verbatim
    base_filename: str
    seed: int
    elements: list[InputElement] = field(default_factory=list)
    manifest: MixManifest | None = None  # defaulted in __post_init__
    pitches: dict[str, PitchEstimate] = field(default_factory=dict)
    version: int = 1
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    # lazy per-instance caches, never persisted
    _base_mfcc: MfccMatrix | None = None
    _beat_grid: BeatGrid | None = None
    _render_version: int = -1
    _mix_bytes: bytes | None = None
    _viz: VizModel | None = None

    def __post_init__(self):
        if self.manifest is None:
            self.manifest = MixManifest(base=self.base)

    @property
    def base_mfcc(self) -> MfccMatrix:
        if self._base_mfcc is None:
            self._base_mfcc = mfcc(self.base)
        return self._base_mfcc

    @property
    def beat_grid(self) -> BeatGrid:
        if self._beat_grid is None:
            self._beat_grid = analyze_rhythm(self.base)
        return self._beat_grid

    def element(self, element_id: str) -> InputElement:
        for el in self.elements:
            if el.id == element_id:
                return el
        raise UnknownElement(f"no element {element_id!r} in project {self.id}")

    def occupied(self) -> list[tuple[float, float]]:
        return [(e.placement.start_s, e.placement.end_s) for e in self.manifest.entries]


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fp:
            fp.write(data)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _plan_to_dict(p: PlacementPlan) -> dict:
    return {
        "element_id": p.element_id,
        "start_s": p.start_s,
        "end_s": p.end_s,
        "score": p.score,
        "snapped_beat_index": p.snapped_beat_index,
        "hint_window": list(p.hint_window) if p.hint_window else None,
        "truncated": p.truncated,
    }


def _plan_from_dict(d: dict) -> PlacementPlan:
    return PlacementPlan(
        element_id=d["element_id"], start_s=d["start_s"], end_s=d["end_s"],
        score=d["score"], snapped_beat_index=d["snapped_beat_index"],
        hint_window=tuple(d["hint_window"]) if d["hint_window"] else None,
        truncated=d["truncated"],
    )


class ProjectStore:
    """One directory per project under `data_dir`; single writer per
    project (mutations serialize on a lock), reads are lock-free."""

    def __init__(self, data_dir: str | os.PathLike, backends: Backends | None = None):
        self.data_dir = Path(data_dir)
        self.backends = backends or Backends()
        self._projects: dict[str, Project] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock(self, project_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(project_id, threading.Lock())

    def project_dir(self, project_id: str) -> Path:
        return self.data_dir / project_id

    # -- lifecycle ---------------------------------------------------------

    def create_project(self, name: str, base_wav: bytes, base_filename: str = "base.wav",
                       seed: int = 0) -> Project:
        decoded = decode_wav(base_wav)
        if not (BASE_MIN_S <= decoded.duration_s <= BASE_MAX_S):
            raise DurationOutOfRange(f"base track is {decoded.duration_s:.2f}s; "
                                     f"accepted range is {BASE_MIN_S:.0f}s-{BASE_MAX_S:.0f}s")
        project = Project(id=uuid.uuid4().hex[:12], name=name,
                          base=to_canonical(decoded), base_raw=base_wav,
                          base_filename=base_filename, seed=seed)
        # Placement needs these for every element; pay the cost up front.
        project.base_mfcc, project.beat_grid  # noqa: B018
        with self._lock(project.id):
            self._projects[project.id] = project
            self._persist(project, write_base=True)
        return project

    def get(self, project_id: str) -> Project:
        project = self._projects.get(project_id)
        if project is None:
            project = self._load(project_id)
            self._projects[project_id] = project
        return project

    def list_projects(self) -> list[str]:
        ids = set(self._projects)
        if self.data_dir.is_dir():
            ids.update(p.name for p in self.data_dir.iterdir()
                       if (p / "project.json").is_file())
        return sorted(ids)

    # -- mutations ---------------------------------------------------------

    def add_element(self, project_id: str, kind: str, payload: bytes | str,
                    duration_s: float | None = None,
                    hint_window: tuple[float, float] | None = None,
                    seed: int | None = None, source_name: str = "",
                    source_path: str | None = None) -> tuple[InputElement, PlacementPlan]:
        project = self.get(project_id)
        with self._lock(project_id):
            element_id = uuid.uuid4().hex[:12]
            element = process_element(
                element_id, kind, payload, self.backends,
                palette_index=len(project.elements),
                duration_s=duration_s if duration_s is not None else 5.0,
                seed=seed if seed is not None else project.seed,
                source_name=source_name, source_path=source_path,
            )
            clip_mfcc = mfcc(element.clip)
            plan = find_placement(
                project.base_mfcc, project.beat_grid, clip_mfcc,
                clip_duration_s=element.clip.duration_s,
                base_duration_s=project.base.duration_s,
                hint=hint_window, occupied=project.occupied(),
                element_id=element_id,
            )
            gain = auto_gain(project.base, element.clip, plan)
            entry = MixEntry(element_id=element_id, placement=plan, gain=gain,
                             fade_s=default_fade_s(element.clip.duration_s))
            project.elements.append(element)
            project.manifest = MixManifest(base=project.manifest.base,
                                           entries=project.manifest.entries + (entry,),
                                           master_gain=project.manifest.master_gain)
            project.pitches[element_id] = estimate_pitch(element.clip)
            project.version += 1
            self._persist(project, new_element=element)
        return element, plan

    def update_element(self, project_id: str, element_id: str, *,
                       gain: float | None = None, start_s: float | None = None,
                       remove: bool = False) -> int:
        project = self.get(project_id)
        with self._lock(project_id):
            project.element(element_id)  # raises UnknownElement first
            if remove:
                project.elements = [e for e in project.elements if e.id != element_id]
                project.manifest = MixManifest(
                    base=project.manifest.base,
                    entries=tuple(e for e in project.manifest.entries
                                  if e.element_id != element_id),
                    master_gain=project.manifest.master_gain)
                project.pitches.pop(element_id, None)
            else:
                project.manifest = update_entry(project.manifest, element_id,
                                                gain=gain, start_s=start_s)
            project.version += 1
            self._persist(project, drop_element=element_id if remove else None)
        return project.version

    # -- rendering ---------------------------------------------------------

    def render(self, project_id: str) -> tuple[bytes, VizModel]:
        project = self.get(project_id)
        if project._render_version != project.version:
            elements = {e.id: e for e in project.elements}
            mix = render_mix(project.manifest, elements)
            viz = build_viz(project.base, project.manifest, elements)
            project._mix_bytes = encode_wav(mix)
            project._viz = viz
            project._render_version = project.version
        return project._mix_bytes, project._viz

    def mix_wav(self, project_id: str) -> bytes:
        return self.render(project_id)[0]

    def viz_json(self, project_id: str) -> bytes:
        return to_json_bytes(self.render(project_id)[1])

    # -- persistence -------------------------------------------------------

    def _persist(self, project: Project, write_base: bool = False,
                 new_element: InputElement | None = None,
                 drop_element: str | None = None) -> None:
        pdir = self.project_dir(project.id)
        if write_base:
            _atomic_write(pdir / "base.wav", project.base_raw)
        if new_element is not None:
            payload = new_element.raw
            data = payload.encode("utf-8") if isinstance(payload, str) else bytes(payload)
            _atomic_write(pdir / "elements" / f"{new_element.id}.payload", data)
            _atomic_write(pdir / "elements" / f"{new_element.id}.clip.wav",
                          new_element.clip_bytes)
        doc = {
            "id": project.id,
            "name": project.name,
            "version": project.version,
            "seed": project.seed,
            "created_at": project.created_at,
            "base_filename": project.base_filename,
            "master_gain": project.manifest.master_gain,
            "elements": [
                {
                    "id": e.id,
                    "kind": e.kind,
                    "caption": e.caption,
                    "color": list(e.color),
                    "source_name": e.source_name,
                    "created_at": e.created_at,
                    "pitch": {
                        "f0_hz": project.pitches[e.id].f0_hz,
                        "confidence": project.pitches[e.id].confidence,
                    } if e.id in project.pitches else None,
                }
                for e in project.elements
            ],
            "entries": [
                {
                    "placement": _plan_to_dict(entry.placement),
                    "gain": entry.gain,
                    "fade_s": entry.fade_s,
                }
                for entry in project.manifest.entries
            ],
        }
        _atomic_write(pdir / "project.json",
                      json.dumps(doc, indent=2).encode("utf-8"))
        if drop_element:
            for suffix in (".payload", ".clip.wav"):
                stray = pdir / "elements" / f"{drop_element}{suffix}"
                if stray.exists():
                    stray.unlink()

    def _load(self, project_id: str) -> Project:
        pdir = self.project_dir(project_id)
        meta_path = pdir / "project.json"
        if not meta_path.is_file():
            raise UnknownProject(f"no project {project_id!r} under {self.data_dir}")
        doc = json.loads(meta_path.read_text(encoding="utf-8"))
        base_raw = (pdir / "base.wav").read_bytes()
        base = to_canonical(decode_wav(base_raw))

        elements: list[InputElement] = []
        pitches: dict[str, PitchEstimate] = {}
        for rec in doc["elements"]:
            payload_bytes = (pdir / "elements" / f"{rec['id']}.payload").read_bytes()
            raw = payload_bytes.decode("utf-8") if rec["kind"] == "text" else payload_bytes
            clip_bytes = (pdir / "elements" / f"{rec['id']}.clip.wav").read_bytes()
            elements.append(InputElement(
                id=rec["id"], kind=rec["kind"], raw=raw, caption=rec["caption"],
                color=tuple(rec["color"]), clip=to_canonical(decode_wav(clip_bytes)),
                clip_bytes=clip_bytes, source_name=rec["source_name"],
                created_at=rec["created_at"],
            ))
            if rec.get("pitch"):
                pitches[rec["id"]] = PitchEstimate(rec["pitch"]["f0_hz"],
                                                   rec["pitch"]["confidence"])

        project = Project(id=doc["id"], name=doc["name"], base=base, base_raw=base_raw,
                          base_filename=doc["base_filename"], seed=doc["seed"],
                          elements=elements, pitches=pitches, version=doc["version"],
                          created_at=doc["created_at"])
        entries = tuple(
            MixEntry(element_id=rec["placement"]["element_id"],
                     placement=_plan_from_dict(rec["placement"]),
                     gain=rec["gain"], fade_s=rec["fade_s"])
            for rec in doc["entries"]
        )
        known = {e.id for e in elements}
        if {e.element_id for e in entries} != known:
            raise InvalidManifest(f"project {project_id}: entries and elements disagree")
        project.manifest = MixManifest(base=base, entries=entries,
                                       master_gain=doc["master_gain"])
        return project
