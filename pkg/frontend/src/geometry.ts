/**
 * Streamgraph layout, mirroring the engine's SVG exporter exactly.
 *
 * The reference rule (engine side):
 *   n_bins   = base.length
 *   x(b)     = midpoint of [b*bin_s, min((b+1)*bin_s, duration)] * W/duration
 *   scale    = 0.9 * H / max(base + sum(thickness))   (0 when silent)
 *   stacking = base first, then layers in insertion order; y = H - scale*cum
 *   layers   = drawn only over their interval bins
 *              [floor(start/bin), ceil(end/bin) - 1]
 *
 * Parity with the engine output is asserted by tests against exported
 * SVG fixtures, so do not "improve" the arithmetic here unilaterally.
 */

export interface VizLayer {
  id: string;
  color: [number, number, number];
  start_s: number;
  end_s: number;
  thickness: number[];
  label: string;
}

export interface VizModel {
  duration_s: number;
  bin_s: number;
  base: number[];
  layers: VizLayer[];
}

export interface Band {
  /** top edge, left to right: one [x, y] per drawn bin */
  top: Array<[number, number]>;
  /** bottom edge, left to right */
  bottom: Array<[number, number]>;
}

export interface LayerBand extends Band {
  id: string;
  color: [number, number, number];
  label: string;
  labelAnchor: [number, number];
  binRange: [number, number];
}

export interface Layout {
  base: Band;
  layers: LayerBand[];
  scale: number;
}

export function binCentersPx(viz: VizModel, widthPx: number): number[] {
  const n = viz.base.length;
  const xs = new Array<number>(n);
  for (let b = 0; b < n; b++) {
    const start = b * viz.bin_s;
    const end = Math.min(start + viz.bin_s, viz.duration_s);
    xs[b] = ((start + end) / 2) * (widthPx / viz.duration_s);
  }
  return xs;
}

export function intervalBins(viz: VizModel, startS: number, endS: number): [number, number] {
  const n = viz.base.length;
  const lo = Math.max(0, Math.floor(startS / viz.bin_s));
  const hi = Math.min(n - 1, Math.ceil(endS / viz.bin_s) - 1);
  return [lo, hi];
}

export function layoutStreamgraph(viz: VizModel, widthPx: number, heightPx: number): Layout {
  const n = viz.base.length;
  const x = binCentersPx(viz, widthPx);

  const stacks: number[][] = [viz.base.slice()];
  for (const layer of viz.layers) {
    const prev = stacks[stacks.length - 1];
    stacks.push(prev.map((v, b) => v + layer.thickness[b]));
  }
  const topTotal = Math.max(...stacks[stacks.length - 1], 0);
  const scale = topTotal > 0 ? (0.9 * heightPx) / topTotal : 0;

  const base: Band = {
    top: x.map((xi, b) => [xi, heightPx - scale * stacks[0][b]] as [number, number]),
    bottom: x.map((xi) => [xi, heightPx] as [number, number]),
  };

  const layers: LayerBand[] = viz.layers.map((layer, k) => {
    const [lo, hi] = intervalBins(viz, layer.start_s, layer.end_s);
    const top: Array<[number, number]> = [];
    const bottom: Array<[number, number]> = [];
    for (let b = lo; b <= hi; b++) {
      top.push([x[b], heightPx - scale * stacks[k + 1][b]]);
      bottom.push([x[b], heightPx - scale * stacks[k][b]]);
    }
    const midT = (layer.start_s + layer.end_s) / 2;
    const bMid = Math.min(n - 1, Math.floor(midT / viz.bin_s));
    const anchor: [number, number] = [
      x[bMid],
      heightPx - scale * (stacks[k][bMid] + layer.thickness[bMid] / 2),
    ];
    return {
      id: layer.id,
      color: layer.color,
      label: layer.label,
      top,
      bottom,
      labelAnchor: anchor,
      binRange: [lo, hi],
    };
  });

  return { base, layers, scale };
}

/**
 * Point sequence of one band's closed outline, in the engine's path
 * order: bottom-left anchor, top edge left-to-right, bottom edge
 * right-to-left. Matches the coordinates in the exported SVG "d" string.
 */
export function bandOutline(band: Band): Array<[number, number]> {
  const pts: Array<[number, number]> = [band.bottom[0]];
  pts.push(...band.top);
  for (let i = band.bottom.length - 1; i >= 0; i--) pts.push(band.bottom[i]);
  return pts;
}

export function bandPath(band: Band): string {
  const pts = bandOutline(band);
  const [mx, my] = pts[0];
  let d = `M${mx.toFixed(2)},${my.toFixed(2)}`;
  for (let i = 1; i < pts.length; i++) {
    d += ` L${pts[i][0].toFixed(2)},${pts[i][1].toFixed(2)}`;
  }
  return d + " Z";
}

/** Playhead geometry: fraction across the graphic plus the audible layers. */
export function playheadState(viz: VizModel, tS: number): {
  xFraction: number;
  activeElementIds: string[];
} {
  const clamped = Math.min(Math.max(tS, 0), viz.duration_s);
  return {
    xFraction: viz.duration_s > 0 ? clamped / viz.duration_s : 0,
    activeElementIds: viz.layers
      .filter((l) => l.start_s <= clamped && clamped <= l.end_s)
      .map((l) => l.id),
  };
}

/** Drag drops quantize to the visualization bin size (0.05 s). */
export function quantizeStart(startS: number, binS: number): number {
  return Math.round(startS / binS) * binS;
}
