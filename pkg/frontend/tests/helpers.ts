// Shared message factories mirroring the service's wire output.

import type {
  Annotation,
  Detection,
  EffectiveParams,
  EllipseDict,
  FrameMessage,
  ParamSnapshot,
} from "../src/protocol.js";

// the service's stock parameter snapshot (GET /params on a fresh session)
export const SNAPSHOT: ParamSnapshot = {
  ContourOverlap: 0.95,
  EllipseOverlap: 0.95,
  TrackingContourOverlap: 0.7,
  TrackingEllipseOverlap: 0.3,
  mnAxSize: 5.0,
  mxAxSize: 700.0,
  maxAxisRatio: 5.0,
  minContourSize: 50,
  CannyLow: 50.0,
  CannyHigh: 150.0,
  CannySigma: 1.4,
  mode: "auto",
};

export function makeEllipse(over: Partial<EllipseDict> = {}): EllipseDict {
  return { cx: 320, cy: 180, a: 80, b: 58, theta: 0.4, ...over };
}

export function makeDetection(
  ellipse: EllipseDict,
  co = 0.9,
  eo = 0.8,
): Detection {
  return { ellipse, contour_overlap: co, ellipse_overlap: eo };
}

export function makeEffective(over: Partial<EffectiveParams> = {}): EffectiveParams {
  return {
    ContourOverlap: 0.95,
    EllipseOverlap: 0.95,
    mnAxSize: 5.0,
    mxAxSize: 700.0,
    maxAxisRatio: 5.0,
    minContourSize: 50,
    CannyLow: 50.0,
    CannyHigh: 150.0,
    CannySigma: 1.4,
    mode: "auto",
    was_tracking: false,
    ...over,
  };
}

export function makeAnnotation(
  frameIndex: number,
  over: Partial<Annotation> = {},
): Annotation {
  return {
    frame_index: frameIndex,
    timestamp_ms: 1_700_000_000_000 + frameIndex * 100,
    elapsed_ms: 5.0,
    scale: 1,
    roi: null,
    detections: [],
    selected_target: null,
    params: makeEffective(),
    ...over,
  };
}

export function frameMsg(
  index: number,
  over: Partial<Annotation> = {},
): FrameMessage {
  return {
    type: "frame",
    index,
    png_b64: `png-${index}`,
    annotation: makeAnnotation(index, over),
  };
}
