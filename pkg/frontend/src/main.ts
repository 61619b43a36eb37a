// Browser entry point: wires the socket, the frame store, and the parameter
// session to the DOM. All decision logic lives in the imported modules; this
// file only moves data between them and the page.

import { FrameStore, type PushedFrame } from "./frames.js";
import { buildOverlay, sidebarRows, statusLine } from "./overlay.js";
import { MODES, PARAM_SPECS, parseEntry, SLIDER_NAMES, type SliderName } from "./params.js";
import { parseServerMessage } from "./protocol.js";
import { backoffMs, CalibSession } from "./session.js";

const $ = (id: string) => document.getElementById(id) as HTMLElement;

const store = new FrameStore();
let ws: WebSocket | null = null;
const session = new CalibSession((text) => ws?.send(text), { now: () => performance.now() });

let flushTimer: number | null = null;

function armFlushTimer(): void {
  if (flushTimer !== null) {
    clearTimeout(flushTimer);
    flushTimer = null;
  }
  const at = session.due();
  if (at === null) return;
  flushTimer = window.setTimeout(() => {
    flushTimer = null;
    session.tick();
    armFlushTimer();
  }, Math.max(0, at - performance.now()));
}

function sliderRow(name: SliderName): HTMLElement {
  const spec = PARAM_SPECS[name];
  const row = document.createElement("div");
  row.className = "param-row";
  row.dataset.name = name;
  const label = document.createElement("label");
  label.textContent = name;
  const range = document.createElement("input");
  range.type = "range";
  range.min = String(spec.min);
  range.max = String(spec.max);
  range.step = String(spec.step);
  const entry = document.createElement("input");
  entry.type = "text";
  entry.className = "entry";
  range.addEventListener("input", () => {
    const v = session.edit(name, Number(range.value));
    if (v !== null) {
      entry.value = String(v);
      row.classList.add("pending");
      armFlushTimer();
    }
  });
  entry.addEventListener("change", () => {
    const v = parseEntry(name, entry.value);
    if (v !== null && session.edit(name, v) !== null) {
      row.classList.add("pending");
      armFlushTimer();
    }
    refreshControls();
  });
  row.append(label, range, entry);
  return row;
}

function buildControls(): void {
  const box = $("sliders");
  for (const name of SLIDER_NAMES) box.append(sliderRow(name));
  const row = document.createElement("div");
  row.className = "param-row";
  row.dataset.name = "mode";
  const label = document.createElement("label");
  label.textContent = "mode";
  const select = document.createElement("select");
  for (const mode of MODES) {
    const opt = document.createElement("option");
    opt.value = mode;
    opt.textContent = mode;
    select.append(opt);
  }
  select.addEventListener("change", () => {
    if (session.editMode(select.value)) {
      row.classList.add("pending");
      armFlushTimer();
    }
  });
  row.append(label, select);
  box.append(row);
}

function refreshControls(): void {
  const editable = session.editable();
  for (const row of document.querySelectorAll<HTMLElement>(".param-row")) {
    const name = row.dataset.name ?? "";
    const value = session.displayed(name);
    const pending = session.isPending(name);
    row.classList.toggle("pending", pending);
    for (const input of row.querySelectorAll("input, select")) {
      (input as HTMLInputElement).disabled = !editable;
      if (value === undefined) continue;
      const el = input as HTMLInputElement;
      if (el === document.activeElement && el.type === "text") continue;
      el.value = String(value);
    }
  }
}

function renderFrame(frame: PushedFrame, img: HTMLImageElement): void {
  const canvas = $("view") as unknown as HTMLCanvasElement;
  canvas.width = img.naturalWidth;
  canvas.height = img.naturalHeight;
  const ctx = canvas.getContext("2d");
  if (ctx === null) return;
  ctx.drawImage(img, 0, 0);
  const ops = buildOverlay(frame.annotation, {
    width: canvas.width,
    height: canvas.height,
    imageWidth: img.naturalWidth,
    imageHeight: img.naturalHeight,
  });
  for (const op of ops) {
    ctx.beginPath();
    if (op.kind === "ellipse") {
      ctx.lineWidth = op.role === "selected" ? 3.5 : 1.5;
      ctx.strokeStyle = op.role === "selected" ? "#ff7f2a" : "#27c4f5";
      ctx.setLineDash([]);
      ctx.ellipse(op.cx, op.cy, op.rx, op.ry, op.rotation, 0, 2 * Math.PI);
    } else {
      ctx.lineWidth = 1.5;
      ctx.strokeStyle = "#9ef01a";
      ctx.setLineDash([6, 4]);
      ctx.rect(op.x, op.y, op.width, op.height);
    }
    ctx.stroke();
  }
  $("status").textContent = statusLine(frame.annotation);
  const rows = sidebarRows(frame.annotation);
  const table = $("scores");
  table.textContent = "";
  for (const r of rows) {
    const tr = document.createElement("tr");
    if (r.selected) tr.className = "selected";
    for (const cell of [r.label, r.contourOverlap, r.ellipseOverlap]) {
      const td = document.createElement("td");
      td.textContent = cell;
      tr.append(td);
    }
    table.append(tr);
  }
}

function onFrame(frame: PushedFrame): void {
  const img = new Image();
  img.onload = () => {
    // a newer frame may have landed while this PNG decoded
    if (store.isNewest(frame)) renderFrame(frame, img);
  };
  img.src = "data:image/png;base64," + frame.pngB64;
}

function setConn(text: string): void {
  $("conn").textContent = text;
}

function connect(attempt: number): void {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  setConn(attempt === 0 ? "connecting" : `reconnecting (try ${attempt + 1})`);
  const sock = new WebSocket(`${proto}//${location.host}/ws`);
  ws = sock;
  sock.onopen = async () => {
    let snapshot;
    try {
      snapshot = await (await fetch("/params")).json();
    } catch {
      snapshot = undefined;
    }
    session.onOpen(snapshot);
    setConn("connected");
    refreshControls();
  };
  sock.onmessage = (ev) => {
    const msg = parseServerMessage(String(ev.data));
    if (msg === null) return;
    if (msg.type === "frame") {
      const frame = store.push(msg);
      if (frame !== null) onFrame(frame);
      return;
    }
    session.onReply(msg);
    if (msg.type === "error" && msg.message) setConn(`connected · ${msg.message}`);
    refreshControls();
    armFlushTimer();
  };
  sock.onclose = () => {
    session.onClose();
    refreshControls();
    setConn("disconnected");
    setTimeout(() => connect(attempt + 1), backoffMs(attempt));
  };
}

buildControls();
refreshControls();
connect(0);
