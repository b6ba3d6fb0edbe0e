/**
 * Thin typed client over the project service. Every mutation goes through
 * here; the UI never computes placements or mixes locally. The fetch
 * implementation is injectable so tests can trace the wire.
 */

import type { VizModel } from "./geometry.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface Placement {
  start_s: number;
  end_s: number;
  score: number;
  snapped_beat_index: number | null;
  hint_window: [number, number] | null;
  truncated: boolean;
}

export interface ElementSummary {
  id: string;
  kind: string;
  caption: string;
  color: [number, number, number];
  source_name: string;
  placement: Placement;
  gain: number;
  fade_s: number;
}

export interface ProjectSummary {
  id: string;
  name: string;
  version: number;
  duration_s: number;
  master_gain: number;
  tempo_bpm: number;
  elements: ElementSummary[];
}

export interface AddElementResult {
  element_id: string;
  caption: string;
  color: [number, number, number];
  placement: Placement;
  version: number;
}

export interface ApiError {
  code: string;
  message: string;
  details: Record<string, unknown>;
}

export class ServiceError extends Error {
  constructor(public status: number, public body: ApiError) {
    super(`${body.code}: ${body.message}`);
  }
}

async function ensureOk(resp: Response): Promise<Response> {
  if (!resp.ok) {
    let body: ApiError;
    try {
      body = (await resp.json()) as ApiError;
    } catch {
      body = { code: `HTTP${resp.status}`, message: resp.statusText, details: {} };
    }
    throw new ServiceError(resp.status, body);
  }
  return resp;
}

export interface AddElementOptions {
  durationS?: number;
  hint?: [number, number];
  seed?: number;
}

export class MixweaveClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createProject(name: string, wav: Blob, filename = "base.wav"): Promise<ProjectSummary> {
    const form = new FormData();
    form.set("name", name);
    form.set("file", wav, filename);
    const resp = await this.fetchImpl(this.url("/projects"), { method: "POST", body: form });
    return (await ensureOk(resp)).json();
  }

  async getProject(projectId: string): Promise<ProjectSummary> {
    const resp = await this.fetchImpl(this.url(`/projects/${projectId}`));
    return (await ensureOk(resp)).json();
  }

  async library(): Promise<{ tracks: Array<{ filename: string }> }> {
    const resp = await this.fetchImpl(this.url("/library"));
    return (await ensureOk(resp)).json();
  }

  async addElement(
    projectId: string,
    kind: "text" | "image" | "audio",
    payload: string | { blob: Blob; filename: string },
    options: AddElementOptions = {},
  ): Promise<AddElementResult> {
    const form = new FormData();
    form.set("kind", kind);
    if (typeof payload === "string") {
      form.set("text", payload);
    } else {
      form.set("file", payload.blob, payload.filename);
    }
    if (options.durationS !== undefined) form.set("duration_s", String(options.durationS));
    if (options.hint) {
      form.set("hint_lo_s", String(options.hint[0]));
      form.set("hint_hi_s", String(options.hint[1]));
    }
    if (options.seed !== undefined) form.set("seed", String(options.seed));
    const resp = await this.fetchImpl(this.url(`/projects/${projectId}/elements`), {
      method: "POST",
      body: form,
    });
    return (await ensureOk(resp)).json();
  }

  async patchElement(
    projectId: string,
    elementId: string,
    patch: { gain?: number; start_s?: number },
  ): Promise<{ version: number }> {
    const resp = await this.fetchImpl(this.url(`/projects/${projectId}/elements/${elementId}`), {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(patch),
    });
    return (await ensureOk(resp)).json();
  }

  async deleteElement(projectId: string, elementId: string): Promise<{ version: number }> {
    const resp = await this.fetchImpl(this.url(`/projects/${projectId}/elements/${elementId}`), {
      method: "DELETE",
    });
    return (await ensureOk(resp)).json();
  }

  async render(projectId: string): Promise<VizModel> {
    const resp = await this.fetchImpl(this.url(`/projects/${projectId}/render`), {
      method: "POST",
    });
    return (await ensureOk(resp)).json();
  }

  async viz(projectId: string): Promise<VizModel> {
    const resp = await this.fetchImpl(this.url(`/projects/${projectId}/viz.json`));
    return (await ensureOk(resp)).json();
  }

  mixUrl(projectId: string): string {
    return this.url(`/projects/${projectId}/mix.wav`);
  }

  async mixBytes(projectId: string): Promise<ArrayBuffer> {
    const resp = await this.fetchImpl(this.mixUrl(projectId));
    return (await ensureOk(resp)).arrayBuffer();
  }
}
