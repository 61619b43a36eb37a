// Wire types for the calibration service channel, plus defensive parsing.
// One duplex JSON channel: the server pushes frame messages (PNG + annotation
// in the same message, so pairing is structural) and answers each update with
// an ack or error carrying the full authoritative parameter snapshot.

export interface EllipseDict {
  cx: number;
  cy: number;
  a: number;
  b: number;
  theta: number;
}

export interface RoiDict {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface Detection {
  ellipse: EllipseDict;
  contour_overlap: number;
  ellipse_overlap: number;
}

export interface EffectiveParams {
  ContourOverlap: number;
  EllipseOverlap: number;
  mnAxSize: number;
  mxAxSize: number;
  maxAxisRatio: number;
  minContourSize: number;
  CannyLow: number;
  CannyHigh: number;
  CannySigma: number;
  mode: string;
  was_tracking: boolean;
}

export interface Annotation {
  frame_index: number;
  timestamp_ms: number;
  elapsed_ms: number;
  scale: number;
  roi: RoiDict | null;
  detections: Detection[];
  selected_target: EllipseDict | null;
  params: EffectiveParams;
}

export interface FrameMessage {
  type: "frame";
  index: number;
  png_b64: string;
  annotation: Annotation;
}

export type ParamValue = number | string;
export type ParamSnapshot = Record<string, ParamValue>;

export interface ReplyMessage {
  type: "ack" | "error";
  message?: string;
  params: ParamSnapshot;
}

export type ServerMessage = FrameMessage | ReplyMessage;

function isNum(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isObj(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function asEllipse(v: unknown): EllipseDict | null {
  if (!isObj(v)) return null;
  const { cx, cy, a, b, theta } = v;
  if (!isNum(cx) || !isNum(cy) || !isNum(a) || !isNum(b) || !isNum(theta)) {
    return null;
  }
  return { cx, cy, a, b, theta };
}

function asRoi(v: unknown): RoiDict | null {
  if (!isObj(v)) return null;
  const { x, y, width, height } = v;
  if (!isNum(x) || !isNum(y) || !isNum(width) || !isNum(height)) return null;
  return { x, y, width, height };
}

function asAnnotation(v: unknown): Annotation | null {
  if (!isObj(v)) return null;
  if (!isNum(v.frame_index) || !isNum(v.elapsed_ms) || !isNum(v.scale)) {
    return null;
  }
  if (!Array.isArray(v.detections) || !isObj(v.params)) return null;
  const detections: Detection[] = [];
  for (const d of v.detections) {
    if (!isObj(d)) return null;
    const ellipse = asEllipse(d.ellipse);
    if (ellipse === null || !isNum(d.contour_overlap) || !isNum(d.ellipse_overlap)) {
      return null;
    }
    detections.push({
      ellipse,
      contour_overlap: d.contour_overlap,
      ellipse_overlap: d.ellipse_overlap,
    });
  }
  const roi = v.roi === null || v.roi === undefined ? null : asRoi(v.roi);
  if (v.roi != null && roi === null) return null;
  const selected =
    v.selected_target === null || v.selected_target === undefined
      ? null
      : asEllipse(v.selected_target);
  if (v.selected_target != null && selected === null) return null;
  return {
    frame_index: v.frame_index,
    timestamp_ms: isNum(v.timestamp_ms) ? v.timestamp_ms : 0,
    elapsed_ms: v.elapsed_ms,
    scale: v.scale,
    roi,
    detections,
    selected_target: selected,
    params: v.params as unknown as EffectiveParams,
  };
}

// Returns null for anything the UI cannot safely dereference; the caller
// drops such messages rather than crashing the event loop.
export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (!isObj(raw)) return null;
  if (raw.type === "frame") {
    const annotation = asAnnotation(raw.annotation);
    if (!isNum(raw.index) || typeof raw.png_b64 !== "string" || annotation === null) {
      return null;
    }
    return { type: "frame", index: raw.index, png_b64: raw.png_b64, annotation };
  }
  if (raw.type === "ack" || raw.type === "error") {
    if (!isObj(raw.params)) return null;
    return {
      type: raw.type,
      message: typeof raw.message === "string" ? raw.message : undefined,
      params: raw.params as ParamSnapshot,
    };
  }
  return null;
}

export function updateMessage(fields: ParamSnapshot): string {
  return JSON.stringify({ type: "update", fields });
}
