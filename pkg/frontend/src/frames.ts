// Frame/annotation pairing. A pushed frame keeps its PNG and annotation as
// one unit for its whole life, so an overlay can only ever be drawn from the
// annotation that arrived with the image under it. The seq ticket lets the
// async PNG decode discover it lost the race to a newer frame.

import type { Annotation, FrameMessage } from "./protocol.js";

export interface PushedFrame {
  seq: number;
  index: number;
  pngB64: string;
  annotation: Annotation;
}

export class FrameStore {
  private seq = 0;
  private newest: PushedFrame | null = null;
  rejected = 0;

  // null means the message failed the pairing check and must not be shown.
  push(msg: FrameMessage): PushedFrame | null {
    if (msg.annotation.frame_index !== msg.index) {
      this.rejected += 1;
      return null;
    }
    this.seq += 1;
    this.newest = {
      seq: this.seq,
      index: msg.index,
      pngB64: msg.png_b64,
      annotation: msg.annotation,
    };
    return this.newest;
  }

  current(): PushedFrame | null {
    return this.newest;
  }

  // A decode that finishes after a newer push must drop its result.
  isNewest(frame: PushedFrame): boolean {
    return this.newest !== null && this.newest.seq === frame.seq;
  }
}
