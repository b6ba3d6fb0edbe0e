"""HTTP/JSON API over the project store.

Routes mirror the session loop: create a project from a base track, add
text/image/audio elements (optionally hint-constrained), tweak or delete
them, render, and fetch the mix/visualization. All errors come back as
JSON {code, message, details}.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import errors as E
from .config import Config, make_backends
from .project import Project, ProjectStore

_STATUS = {
    E.MalformedWav: 400,
    E.UnsupportedEncoding: 400,
    E.DurationOutOfRange: 400,
    E.BadImage: 400,
    E.TooShort: 400,
    E.InvalidManifest: 400,
    E.EmptyModel: 400,
    E.EmptyInterval: 400,
    E.OutOfRange: 400,
    E.LengthMismatch: 400,
    E.UnknownProject: 404,
    E.UnknownElement: 404,
    E.NoCandidate: 409,
    E.InvalidPlacement: 409,
    E.BackendUnavailable: 502,
    E.BadGeneratedAudio: 502,
}


def _error_response(exc: Exception) -> JSONResponse:
    status = _STATUS.get(type(exc), 500)
    details = {}
    if isinstance(exc, E.NoCandidate) and exc.hint_window is not None:
        details["hint_window"] = list(exc.hint_window)
    return JSONResponse(status_code=status, content={
        "code": type(exc).__name__,
        "message": str(exc),
        "details": details,
    })


def _project_summary(project: Project, store: ProjectStore) -> dict:
    entries = {e.element_id: e for e in project.manifest.entries}
    return {
        "id": project.id,
        "name": project.name,
        "version": project.version,
        "duration_s": project.base.duration_s,
        "master_gain": project.manifest.master_gain,
        "tempo_bpm": project.beat_grid.tempo_bpm,
        "elements": [
            {
                "id": el.id,
                "kind": el.kind,
                "caption": el.caption,
                "color": list(el.color),
                "source_name": el.source_name,
                "pitch": {
                    "f0_hz": project.pitches[el.id].f0_hz,
                    "confidence": project.pitches[el.id].confidence,
                } if el.id in project.pitches else None,
                "placement": _plan_json(entries[el.id].placement),
                "gain": entries[el.id].gain,
                "fade_s": entries[el.id].fade_s,
            }
            for el in project.elements
        ],
    }


def _plan_json(plan) -> dict:
    return {
        "start_s": plan.start_s,
        "end_s": plan.end_s,
        "score": plan.score,
        "snapped_beat_index": plan.snapped_beat_index,
        "hint_window": list(plan.hint_window) if plan.hint_window else None,
        "truncated": plan.truncated,
    }


class ElementPatch(BaseModel):
    gain: float | None = None
    start_s: float | None = None


def create_app(config: Config | None = None, store: ProjectStore | None = None) -> FastAPI:
    config = config or Config()
    store = store or ProjectStore(config.data_dir, make_backends(config))
    app = FastAPI(title="mixweave", version="0.1.0")
    app.state.store = store
    app.state.config = config

    @app.exception_handler(E.MixweaveError)
    async def _handle_engine_error(request: Request, exc: E.MixweaveError):
        return _error_response(exc)

    @app.exception_handler(ValueError)
    async def _handle_value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={
            "code": "BadRequest", "message": str(exc), "details": {},
        })

    @app.post("/projects")
    async def create_project(name: str = Form(...), file: UploadFile = File(...),
                             seed: int = Form(0)):
        data = await file.read()
        project = store.create_project(name, data, base_filename=file.filename or "base.wav",
                                       seed=seed)
        return _project_summary(project, store)

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        return _project_summary(store.get(project_id), store)

    @app.get("/library")
    def library():
        lib = Path(config.library_dir)
        names = sorted(p.name for p in lib.glob("*.wav")) if lib.is_dir() else []
        return {"tracks": [{"filename": n} for n in names]}

    @app.post("/projects/{project_id}/elements")
    async def add_element(project_id: str, kind: str = Form(...),
                          text: str | None = Form(None),
                          file: UploadFile | None = File(None),
                          duration_s: float | None = Form(None),
                          hint_lo_s: float | None = Form(None),
                          hint_hi_s: float | None = Form(None),
                          seed: int | None = Form(None)):
        if kind == "text":
            if not text:
                raise ValueError("text element needs a 'text' form field")
            payload: bytes | str = text
            source_name = ""
        else:
            if file is None:
                raise ValueError(f"{kind} element needs a 'file' upload")
            payload = await file.read()
            source_name = file.filename or ""
        hint = None
        if hint_lo_s is not None or hint_hi_s is not None:
            if hint_lo_s is None or hint_hi_s is None:
                raise ValueError("hint window needs both hint_lo_s and hint_hi_s")
            hint = (float(hint_lo_s), float(hint_hi_s))
        element, plan = store.add_element(
            project_id, kind, payload, duration_s=duration_s,
            hint_window=hint, seed=seed, source_name=source_name)
        project = store.get(project_id)
        return {
            "element_id": element.id,
            "caption": element.caption,
            "color": list(element.color),
            "pitch": {
                "f0_hz": project.pitches[element.id].f0_hz,
                "confidence": project.pitches[element.id].confidence,
            },
            "placement": _plan_json(plan),
            "version": project.version,
        }

    @app.patch("/projects/{project_id}/elements/{element_id}")
    def patch_element(project_id: str, element_id: str, patch: ElementPatch):
        version = store.update_element(project_id, element_id,
                                       gain=patch.gain, start_s=patch.start_s)
        return {"version": version}

    @app.delete("/projects/{project_id}/elements/{element_id}")
    def delete_element(project_id: str, element_id: str):
        version = store.update_element(project_id, element_id, remove=True)
        return {"version": version}

    @app.post("/projects/{project_id}/render")
    def render(project_id: str):
        store.render(project_id)  # compute + cache mix and viz for this version
        project = store.get(project_id)
        return Response(content=store.viz_json(project_id),
                        media_type="application/json",
                        headers={"X-Project-Version": str(project.version)})

    @app.get("/projects/{project_id}/mix.wav")
    def mix_wav(project_id: str):
        return Response(content=store.mix_wav(project_id), media_type="audio/wav")

    @app.get("/projects/{project_id}/viz.json")
    def viz_json(project_id: str):
        return Response(content=store.viz_json(project_id), media_type="application/json")

    ui_dir = Path(config.ui_dir) if config.ui_dir else Path("frontend/dist")
    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
