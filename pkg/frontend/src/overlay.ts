// Overlay geometry: turn one frame's annotation into a flat draw list in
// canvas coordinates. Pure data in, pure data out; the canvas itself clips
// anything that runs off the edge, so partial views need no special casing.

import type { Annotation, EllipseDict } from "./protocol.js";

export interface ViewBox {
  width: number;
  height: number;
  imageWidth: number;
  imageHeight: number;
}

export type DrawOp =
  | {
      kind: "ellipse";
      cx: number;
      cy: number;
      rx: number;
      ry: number;
      rotation: number;
      role: "candidate" | "selected";
    }
  | { kind: "roi"; x: number; y: number; width: number; height: number };

function ellipseOp(
  e: EllipseDict,
  s: number,
  role: "candidate" | "selected",
): DrawOp {
  return {
    kind: "ellipse",
    cx: e.cx * s,
    cy: e.cy * s,
    rx: e.a * s,
    ry: e.b * s,
    rotation: e.theta,
    role,
  };
}

// The canvas is sized to the image's aspect ratio, so one uniform scale
// factor covers both axes and theta carries over unchanged.
export function buildOverlay(annotation: Annotation, view: ViewBox): DrawOp[] {
  const s = view.imageWidth > 0 ? view.width / view.imageWidth : 1;
  const ops: DrawOp[] = [];
  for (const d of annotation.detections) {
    ops.push(ellipseOp(d.ellipse, s, "candidate"));
  }
  if (annotation.roi !== null) {
    const r = annotation.roi;
    ops.push({
      kind: "roi",
      x: r.x * s,
      y: r.y * s,
      width: r.width * s,
      height: r.height * s,
    });
  }
  if (annotation.selected_target !== null) {
    ops.push(ellipseOp(annotation.selected_target, s, "selected"));
  }
  return ops;
}

export interface SidebarRow {
  label: string;
  contourOverlap: string;
  ellipseOverlap: string;
  selected: boolean;
}

function sameEllipse(a: EllipseDict, b: EllipseDict): boolean {
  return (
    a.cx === b.cx && a.cy === b.cy && a.a === b.a && a.b === b.b && a.theta === b.theta
  );
}

export function sidebarRows(annotation: Annotation): SidebarRow[] {
  const sel = annotation.selected_target;
  return annotation.detections.map((d, i) => ({
    label: `#${i} a=${d.ellipse.a.toFixed(1)} b=${d.ellipse.b.toFixed(1)}`,
    contourOverlap: d.contour_overlap.toFixed(3),
    ellipseOverlap: d.ellipse_overlap.toFixed(3),
    selected: sel !== null && sameEllipse(d.ellipse, sel),
  }));
}

export function statusLine(annotation: Annotation): string {
  const mode = annotation.params.was_tracking ? "tracking" : "detection";
  return (
    `frame ${annotation.frame_index} · ${annotation.elapsed_ms.toFixed(1)} ms` +
    ` · scale ${annotation.scale} · ${mode}`
  );
}
