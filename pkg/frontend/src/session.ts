// Parameter session state machine. Single event loop, one socket: edits are
// clamped, debounced to at most one update message per SEND_INTERVAL_MS, and
// shown as pending until the service answers. Replies arrive in send order
// on this socket, so a FIFO of in-flight field sets is enough bookkeeping.
// An ack commits; an error reverts, because both carry the authoritative
// parameter snapshot and the display always falls back to it.

import { clampParam, isMode, PARAM_SPECS, type SliderName } from "./params.js";
import {
  updateMessage,
  type ParamSnapshot,
  type ParamValue,
  type ReplyMessage,
} from "./protocol.js";

export const SEND_INTERVAL_MS = 200; // 5 messages per second, tops

export type SendFn = (text: string) => void;
export type ConnectionStatus = "connecting" | "open" | "closed";

export interface Clock {
  now(): number;
}

export class CalibSession {
  private status: ConnectionStatus = "connecting";
  private acked: ParamSnapshot = {};
  private pendingValue = new Map<string, ParamValue>();
  private unsent = new Set<string>();
  private inflight: Array<Set<string>> = [];
  private lastSendAt = Number.NEGATIVE_INFINITY;
  private lastReply: ReplyMessage | null = null;

  constructor(
    private readonly send: SendFn,
    private readonly clock: Clock,
  ) {}

  connectionStatus(): ConnectionStatus {
    return this.status;
  }

  // True while edits are accepted; the shell greys the sliders otherwise.
  editable(): boolean {
    return this.status === "open";
  }

  onOpen(snapshot?: ParamSnapshot): void {
    this.status = "open";
    if (snapshot) this.acked = { ...snapshot };
  }

  // The socket is gone, and so is any reply we were owed: un-acked edits are
  // discarded rather than replayed against a server we cannot see.
  onClose(): void {
    this.status = "closed";
    this.pendingValue.clear();
    this.unsent.clear();
    this.inflight = [];
  }

  // Slider or text-entry edit. Returns the clamped value actually recorded,
  // or null when the edit was refused (disconnected / unknown name).
  edit(name: string, value: number): number | null {
    if (this.status !== "open" || !(name in PARAM_SPECS)) return null;
    const v = clampParam(name as SliderName, value);
    this.pendingValue.set(name, v);
    this.unsent.add(name);
    this.maybeFlush();
    return v;
  }

  editMode(value: string): boolean {
    if (this.status !== "open" || !isMode(value)) return false;
    this.pendingValue.set("mode", value);
    this.unsent.add("mode");
    this.maybeFlush();
    return true;
  }

  // When a trailing send is owed, the time it becomes due; the shell arms a
  // timer for it and calls tick().
  due(): number | null {
    if (this.unsent.size === 0 || this.status !== "open") return null;
    const at = this.lastSendAt + SEND_INTERVAL_MS;
    return at > this.clock.now() ? at : this.clock.now();
  }

  tick(): void {
    this.maybeFlush();
  }

  private maybeFlush(): void {
    if (this.status !== "open" || this.unsent.size === 0) return;
    const now = this.clock.now();
    if (now - this.lastSendAt < SEND_INTERVAL_MS) return;
    const fields: ParamSnapshot = {};
    for (const name of this.unsent) {
      const v = this.pendingValue.get(name);
      if (v !== undefined) fields[name] = v;
    }
    this.inflight.push(new Set(this.unsent));
    this.unsent.clear();
    this.lastSendAt = now;
    this.send(updateMessage(fields));
  }

  onReply(reply: ReplyMessage): void {
    this.lastReply = reply;
    this.acked = { ...reply.params };
    const fields = this.inflight.shift() ?? new Set<string>();
    for (const name of fields) {
      // a newer edit of the same field stays pending for its own turn
      if (!this.unsent.has(name)) this.pendingValue.delete(name);
    }
  }

  latestReply(): ReplyMessage | null {
    return this.lastReply;
  }

  // Display contract: the last service-acknowledged value, unless a local
  // edit is pending, in which case the pending value is shown marked.
  displayed(name: string): ParamValue | undefined {
    return this.pendingValue.get(name) ?? this.acked[name];
  }

  isPending(name: string): boolean {
    return this.pendingValue.has(name);
  }

  ackedParams(): ParamSnapshot {
    return { ...this.acked };
  }
}

// Reconnect schedule: 500 ms doubling to an 8 s ceiling.
export function backoffMs(attempt: number): number {
  return Math.min(500 * 2 ** Math.max(0, attempt), 8000);
}
