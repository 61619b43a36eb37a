// Client-side ranges for every editable parameter. Values are clamped here
// before they ever reach the wire; cross-field rules (CannyLow < CannyHigh,
// mnAxSize < mxAxSize) are the server's call and surface as error replies.

export interface ParamSpec {
  min: number;
  max: number;
  step: number;
  integer?: boolean;
}

export const PARAM_SPECS = {
  ContourOverlap: { min: 0, max: 1, step: 0.01 },
  EllipseOverlap: { min: 0, max: 1, step: 0.01 },
  TrackingContourOverlap: { min: 0, max: 1, step: 0.01 },
  TrackingEllipseOverlap: { min: 0, max: 1, step: 0.01 },
  mnAxSize: { min: 1, max: 400, step: 1 },
  mxAxSize: { min: 10, max: 2000, step: 10 },
  maxAxisRatio: { min: 1, max: 20, step: 0.1 },
  minContourSize: { min: 5, max: 500, step: 1, integer: true },
  CannyLow: { min: 1, max: 500, step: 1 },
  CannyHigh: { min: 1, max: 500, step: 1 },
  CannySigma: { min: 0.1, max: 10, step: 0.1 },
} as const satisfies Record<string, ParamSpec>;

export type SliderName = keyof typeof PARAM_SPECS;

export const SLIDER_NAMES = Object.keys(PARAM_SPECS) as SliderName[];

export const MODES = ["auto", "force_detection", "force_tracking"] as const;
export type Mode = (typeof MODES)[number];

export function clampParam(name: SliderName, value: number): number {
  const spec: ParamSpec = PARAM_SPECS[name];
  let v = Math.min(spec.max, Math.max(spec.min, value));
  if (spec.integer) v = Math.round(v);
  return v;
}

// Manual text entry: unparseable input yields null (keep the old value),
// anything numeric is clamped into range.
export function parseEntry(name: SliderName, text: string): number | null {
  const v = Number(text.trim());
  if (text.trim() === "" || !Number.isFinite(v)) return null;
  return clampParam(name, v);
}

export function isMode(value: string): value is Mode {
  return (MODES as readonly string[]).includes(value);
}
