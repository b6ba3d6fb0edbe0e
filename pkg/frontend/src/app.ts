/**
 * Session UI: upload panel on the left, streamgraph + playback on the
 * right. All placement and mixing truth comes from the service; the UI
 * only posts intents and redraws from the returned model.
 */

import { MixweaveClient, ServiceError } from "./api.js";
import {
  bandPath,
  layoutStreamgraph,
  playheadState,
  quantizeStart,
  type Layout,
  type VizModel,
} from "./geometry.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const GRAPH_W = 1000;
const GRAPH_H = 300;

interface SessionState {
  projectId: string | null;
  viz: VizModel | null;
  scores: Map<string, number>;
  selected: string | null;
  brush: [number, number] | null;
  pendingOps: number;
  audioEpoch: number;
}

export class App {
  private state: SessionState = {
    projectId: null,
    viz: null,
    scores: new Map(),
    selected: null,
    brush: null,
    pendingOps: 0,
    audioEpoch: 0,
  };

  private root: HTMLElement;
  private client: MixweaveClient;
  private svg!: SVGSVGElement;
  private dot!: SVGCircleElement;
  private audio!: HTMLAudioElement;
  private status!: HTMLElement;
  private editor!: HTMLElement;

  constructor(root: HTMLElement, client?: MixweaveClient) {
    this.root = root;
    this.client = client ?? new MixweaveClient("");
    this.buildDom();
    this.tickPlayhead();
  }

  // -- DOM scaffolding ------------------------------------------------------

  private buildDom(): void {
    this.root.innerHTML = `
      <div class="panel upload-panel">
        <h2>Material</h2>
        <label>Project name <input id="project-name" value="my mix"></label>
        <label>Base track (WAV) <input id="base-file" type="file" accept=".wav"></label>
        <button id="create-project">Create project</button>
        <hr>
        <label>Text <textarea id="text-input" rows="2" placeholder="a calm blue evening"></textarea></label>
        <button id="add-text" disabled>Add text</button>
        <label>Image <input id="image-file" type="file" accept=".png,.jpg,.jpeg"></label>
        <button id="add-image" disabled>Add image</button>
        <label>Audio clip <input id="audio-file" type="file" accept=".wav"></label>
        <button id="add-audio" disabled>Add audio</button>
        <p class="hint-note" id="brush-note">Drag on the graph to pick a target window (optional).</p>
        <p id="status" class="status"></p>
      </div>
      <div class="panel graph-panel">
        <h2>Composition</h2>
        <svg id="graph" viewBox="0 0 ${GRAPH_W} ${GRAPH_H}" width="100%"></svg>
        <audio id="player" controls></audio>
        <div id="editor" class="editor"></div>
      </div>`;
    this.svg = this.root.querySelector("#graph") as SVGSVGElement;
    this.audio = this.root.querySelector("#player") as HTMLAudioElement;
    this.status = this.root.querySelector("#status") as HTMLElement;
    this.editor = this.root.querySelector("#editor") as HTMLElement;

    this.dot = document.createElementNS(SVG_NS, "circle") as SVGCircleElement;
    this.dot.setAttribute("r", "6");
    this.dot.setAttribute("class", "playhead-dot");
    this.dot.setAttribute("visibility", "hidden");

    this.wireUpload();
    this.wireBrush();
  }

  private wireUpload(): void {
    const button = (id: string) => this.root.querySelector<HTMLButtonElement>(`#${id}`)!;
    const fileOf = (id: string) =>
      this.root.querySelector<HTMLInputElement>(`#${id}`)!.files?.[0] ?? null;

    button("create-project").addEventListener("click", () =>
      this.guard(async () => {
        const file = fileOf("base-file");
        if (!file) throw new Error("choose a base WAV first");
        const name =
          this.root.querySelector<HTMLInputElement>("#project-name")!.value || "untitled";
        const summary = await this.client.createProject(name, file, file.name);
        this.state.projectId = summary.id;
        for (const id of ["add-text", "add-image", "add-audio"]) {
          button(id).disabled = false;
        }
        await this.refresh(true);
        this.say(`project ${summary.id} created (${summary.duration_s.toFixed(1)} s)`);
      }),
    );

    button("add-text").addEventListener("click", () =>
      this.guard(async () => {
        const text = this.root.querySelector<HTMLTextAreaElement>("#text-input")!.value.trim();
        if (!text) throw new Error("type some text first");
        await this.addElement("text", text);
      }),
    );
    button("add-image").addEventListener("click", () =>
      this.guard(async () => {
        const file = fileOf("image-file");
        if (!file) throw new Error("choose an image first");
        await this.addElement("image", { blob: file, filename: file.name });
      }),
    );
    button("add-audio").addEventListener("click", () =>
      this.guard(async () => {
        const file = fileOf("audio-file");
        if (!file) throw new Error("choose a WAV first");
        await this.addElement("audio", { blob: file, filename: file.name });
      }),
    );
  }

  private async addElement(
    kind: "text" | "image" | "audio",
    payload: string | { blob: Blob; filename: string },
  ): Promise<void> {
    if (!this.state.projectId) throw new Error("create a project first");
    const options = this.state.brush ? { hint: this.state.brush } : {};
    const added = await this.client.addElement(this.state.projectId, kind, payload, options);
    this.state.brush = null;
    await this.refresh(true);
    this.say(
      `placed at ${added.placement.start_s.toFixed(2)}-${added.placement.end_s.toFixed(2)} s ` +
        `(similarity ${added.placement.score.toFixed(3)})`,
    );
  }

  // -- brush: drag a time window on the graph before uploading ---------------

  private wireBrush(): void {
    let anchor: number | null = null;
    const toTime = (event: MouseEvent): number => {
      if (!this.state.viz) return 0;
      const rect = this.svg.getBoundingClientRect();
      const frac = (event.clientX - rect.left) / rect.width;
      return Math.min(Math.max(frac, 0), 1) * this.state.viz.duration_s;
    };
    this.svg.addEventListener("mousedown", (event) => {
      if ((event.target as Element).closest(".layer-band")) return; // layer drags win
      anchor = toTime(event);
    });
    this.svg.addEventListener("mouseup", (event) => {
      if (anchor === null) return;
      const t = toTime(event);
      const lo = Math.min(anchor, t);
      const hi = Math.max(anchor, t);
      anchor = null;
      if (hi - lo >= 0.5) {
        this.state.brush = [lo, hi];
        this.say(`target window ${lo.toFixed(2)}-${hi.toFixed(2)} s armed`);
      } else {
        this.state.brush = null;
      }
      this.draw();
    });
  }

  // -- rendering --------------------------------------------------------------

  private draw(): void {
    const viz = this.state.viz;
    this.svg.textContent = "";
    if (!viz || viz.base.length === 0) return;
    const layout: Layout = layoutStreamgraph(viz, GRAPH_W, GRAPH_H);

    const basePath = document.createElementNS(SVG_NS, "path");
    basePath.setAttribute("d", bandPath(layout.base));
    basePath.setAttribute("fill", "#888888");
    this.svg.appendChild(basePath);

    layout.layers.forEach((band) => {
      const path = document.createElementNS(SVG_NS, "path");
      path.setAttribute("d", bandPath(band));
      path.setAttribute("fill", `rgb(${band.color[0]},${band.color[1]},${band.color[2]})`);
      path.setAttribute("fill-opacity", "0.8");
      path.setAttribute("class", "layer-band");
      path.setAttribute("data-element-id", band.id);
      if (this.state.selected === band.id) path.setAttribute("stroke", "#222");
      path.addEventListener("click", () => this.select(band.id));
      this.installDrag(path, band.id);
      const score = this.state.scores.get(band.id);
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent =
        score === undefined ? band.label : `${band.label} (similarity ${score.toFixed(3)})`;
      path.appendChild(title);
      this.svg.appendChild(path);

      const text = document.createElementNS(SVG_NS, "text");
      text.setAttribute("x", band.labelAnchor[0].toFixed(2));
      text.setAttribute("y", band.labelAnchor[1].toFixed(2));
      text.setAttribute("text-anchor", "middle");
      text.setAttribute("font-size", "12");
      text.textContent = band.label;
      this.svg.appendChild(text);
    });

    if (this.state.brush) {
      const [lo, hi] = this.state.brush;
      const rect = document.createElementNS(SVG_NS, "rect");
      const x0 = (lo / viz.duration_s) * GRAPH_W;
      rect.setAttribute("x", x0.toFixed(2));
      rect.setAttribute("y", "0");
      rect.setAttribute("width", (((hi - lo) / viz.duration_s) * GRAPH_W).toFixed(2));
      rect.setAttribute("height", String(GRAPH_H));
      rect.setAttribute("class", "brush");
      this.svg.appendChild(rect);
    }

    this.svg.appendChild(this.dot);
    this.drawEditor();
  }

  private select(elementId: string | null): void {
    this.state.selected = elementId;
    this.draw();
  }

  private drawEditor(): void {
    this.editor.textContent = "";
    const id = this.state.selected;
    if (!id || !this.state.projectId) return;
    const label = document.createElement("span");
    label.textContent = `element ${id}: `;
    const gain = document.createElement("input");
    gain.type = "range";
    gain.min = "0";
    gain.max = "4";
    gain.step = "0.05";
    gain.addEventListener("change", () =>
      this.guard(async () => {
        await this.client.patchElement(this.state.projectId!, id, {
          gain: Number(gain.value),
        });
        await this.refresh(true);
      }),
    );
    const del = document.createElement("button");
    del.textContent = "delete";
    del.addEventListener("click", () =>
      this.guard(async () => {
        await this.client.deleteElement(this.state.projectId!, id);
        this.state.selected = null;
        await this.refresh(true);
      }),
    );
    this.editor.append(label, gain, del);
  }

  /** Horizontal drag moves an element; the drop time is quantized and sent
   * as a PATCH. On rejection the layer snaps back (we simply redraw the
   * authoritative model). */
  private installDrag(path: SVGPathElement, elementId: string): void {
    let dragFrom: number | null = null;
    path.addEventListener("mousedown", (event) => {
      dragFrom = event.clientX;
      event.stopPropagation();
    });
    path.addEventListener("mouseup", (event) => {
      if (dragFrom === null || !this.state.viz) return;
      const viz = this.state.viz;
      const deltaPx = event.clientX - dragFrom;
      dragFrom = null;
      if (Math.abs(deltaPx) < 3) return; // that was a click, not a drag
      const rect = this.svg.getBoundingClientRect();
      const deltaS = (deltaPx / rect.width) * viz.duration_s;
      const layer = viz.layers.find((l) => l.id === elementId);
      if (!layer) return;
      const target = quantizeStart(layer.start_s + deltaS, viz.bin_s);
      this.guard(async () => {
        await this.client.patchElement(this.state.projectId!, elementId, { start_s: target });
        await this.refresh(true);
      });
    });
  }

  // -- data flow ---------------------------------------------------------------

  /** Refetch viz (and optionally the mix) after a mutation; playback
   * position survives the audio reload when still in range. */
  private async refresh(reloadAudio: boolean): Promise<void> {
    if (!this.state.projectId) return;
    this.state.viz = await this.client.render(this.state.projectId);
    const summary = await this.client.getProject(this.state.projectId);
    this.state.scores = new Map(summary.elements.map((e) => [e.id, e.placement.score]));
    if (reloadAudio) {
      const keepT = this.audio.currentTime;
      this.state.audioEpoch += 1;
      this.audio.src = `${this.client.mixUrl(this.state.projectId)}?v=${this.state.audioEpoch}`;
      if (keepT > 0 && this.state.viz && keepT < this.state.viz.duration_s) {
        this.audio.currentTime = keepT;
      }
    }
    this.draw();
  }

  /** One mutation in flight at a time; service errors surface inline. */
  private guard(op: () => Promise<void>): void {
    if (this.state.pendingOps > 0) {
      this.say("busy: another edit is still in flight");
      return;
    }
    this.state.pendingOps += 1;
    op()
      .catch((err) => {
        if (err instanceof ServiceError) {
          this.say(`${err.body.code}: ${err.body.message}`);
          this.draw(); // roll back to the authoritative model
        } else {
          this.say(String(err instanceof Error ? err.message : err));
        }
      })
      .finally(() => {
        this.state.pendingOps -= 1;
      });
  }

  private say(message: string): void {
    this.status.textContent = message;
  }

  // -- playback sync -------------------------------------------------------------

  private tickPlayhead(): void {
    const step = () => {
      const viz = this.state.viz;
      if (viz && this.audio.src && !Number.isNaN(this.audio.duration)) {
        const state = playheadState(viz, this.audio.currentTime);
        this.dot.setAttribute("visibility", "visible");
        this.dot.setAttribute("cx", (state.xFraction * GRAPH_W).toFixed(2));
        this.dot.setAttribute("cy", String(GRAPH_H - 10));
        for (const el of this.svg.querySelectorAll(".layer-band")) {
          const id = el.getAttribute("data-element-id") ?? "";
          el.classList.toggle("active", state.activeElementIds.includes(id));
        }
      } else {
        this.dot.setAttribute("visibility", "hidden");
      }
      requestAnimationFrame(step); // display-rate updates (>= 30/s)
    };
    requestAnimationFrame(step);
  }
}

export function mount(rootId = "app"): App {
  const root = document.getElementById(rootId);
  if (!root) throw new Error(`no #${rootId} element`);
  return new App(root);
}
