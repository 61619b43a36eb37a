"""Live calibration service: frame stream with overlays, tunable parameters.

The synchronous ``CalibrationSession`` owns the tracker state and parameter
set; updates queue up and apply between frames, never mid-frame, so every
frame is processed with one coherent parameter set (echoed in its
annotation).  The web shell runs one worker loop around the session and
fans identical messages out to all stream subscribers.

Wire schema (one duplex JSON channel):
  server -> client: {"type": "frame", "index": i, "png_b64": "...",
                     "annotation": {...}}
  client -> server: {"type": "update", "fields": {"ContourOverlap": 0.9, ...}}
  server -> client: {"type": "ack", "params": {...}}
                    {"type": "error", "message": "...", "params": {...}}
"""

from __future__ import annotations

import asyncio
import base64
import io
import json
import os
import time
from contextlib import asynccontextmanager
from dataclasses import replace

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from PIL import Image

from .detector import DetectionThresholds
from .edges import CannyParams
from .errors import ConfigError, EmptyInput
from .geometry import Ellipse
from .imageio import load_image
from .tracker import TrackerConfig, TrackerState, track_step_annotated

__all__ = ["CalibrationSession", "build_app", "serve", "MODES"]

MODES = ("auto", "force_detection", "force_tracking")

# wire names of the editable parameters
_SHARED_FIELDS = {
    "mnAxSize": "min_axis_size",
    "mxAxSize": "max_axis_size",
    "maxAxisRatio": "max_axis_ratio",
    "minContourSize": "min_contour_size",
}
_CANNY_FIELDS = {
    "CannyLow": "low_threshold",
    "CannyHigh": "high_threshold",
    "CannySigma": "gaussian_sigma",
}


def _ellipse_dict(e: Ellipse) -> dict:
    return {"cx": e.cx, "cy": e.cy, "a": e.a, "b": e.b, "theta": e.theta}


def _png_b64(frame: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(frame, mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class CalibrationSession:
    """Replays a frame list through the tracker with live-editable knobs."""

    def __init__(self, frames: list[np.ndarray],
                 cfg: TrackerConfig | None = None,
                 canny: CannyParams | None = None,
                 loop: bool = True):
        if not frames:
            raise EmptyInput("no frames to serve")
        self._frames = frames
        self._cfg = cfg if cfg is not None else TrackerConfig()
        self._canny = canny if canny is not None else CannyParams()
        self._loop = loop
        self._mode = "auto"
        self._state = TrackerState()
        self._index = 0

    @property
    def exhausted(self) -> bool:
        return not self._loop and self._index >= len(self._frames)

    def params(self) -> dict:
        """Snapshot of every editable parameter."""
        det = self._cfg.detect_thresholds
        trk = self._cfg.track_thresholds
        return {
            "ContourOverlap": det.contour_overlap,
            "EllipseOverlap": det.ellipse_overlap,
            "TrackingContourOverlap": trk.contour_overlap,
            "TrackingEllipseOverlap": trk.ellipse_overlap,
            "mnAxSize": det.min_axis_size,
            "mxAxSize": det.max_axis_size,
            "maxAxisRatio": det.max_axis_ratio,
            "minContourSize": det.min_contour_size,
            "CannyLow": self._canny.low_threshold,
            "CannyHigh": self._canny.high_threshold,
            "CannySigma": self._canny.gaussian_sigma,
            "mode": self._mode,
        }

    def apply_update(self, fields: dict) -> dict:
        """Validate and apply a parameter update; all-or-nothing.

        ContourOverlap/EllipseOverlap set both mode bundles (the calibration
        knobs are single-valued); the Tracking* names adjust the tracking
        bundle alone.  Returns the new parameter snapshot.

        Raises:
            ConfigError: unknown field or invalid value; nothing changes.
        """
        if not isinstance(fields, dict):
            raise ConfigError("update fields must be an object")
        det_kw: dict = {}
        trk_kw: dict = {}
        canny_kw: dict = {}
        mode = self._mode
        for key, value in fields.items():
            if key == "mode":
                if value not in MODES:
                    raise ConfigError(f"mode must be one of {MODES}, got {value!r}")
                mode = value
            elif key == "ContourOverlap":
                det_kw["contour_overlap"] = _number(key, value)
                trk_kw["contour_overlap"] = _number(key, value)
            elif key == "EllipseOverlap":
                det_kw["ellipse_overlap"] = _number(key, value)
                trk_kw["ellipse_overlap"] = _number(key, value)
            elif key == "TrackingContourOverlap":
                trk_kw["contour_overlap"] = _number(key, value)
            elif key == "TrackingEllipseOverlap":
                trk_kw["ellipse_overlap"] = _number(key, value)
            elif key in _SHARED_FIELDS:
                field = _SHARED_FIELDS[key]
                v = _number(key, value)
                det_kw[field] = int(v) if field == "min_contour_size" else v
                trk_kw[field] = det_kw[field]
            elif key in _CANNY_FIELDS:
                canny_kw[_CANNY_FIELDS[key]] = _number(key, value)
            else:
                raise ConfigError(f"unknown parameter {key!r}")
        try:
            det = replace(self._cfg.detect_thresholds, **det_kw)
            trk = replace(self._cfg.track_thresholds, **trk_kw)
            canny = replace(self._canny, **canny_kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self._cfg = replace(self._cfg, detect_thresholds=det, track_thresholds=trk)
        self._canny = canny
        self._mode = mode
        return self.params()

    def process_next(self) -> dict:
        """Process one frame and build its stream message."""
        frame = self._frames[self._index % len(self._frames)]
        frame_index = self._index
        self._index += 1

        cfg = self._cfg
        state = self._state
        if self._mode == "force_detection":
            state = TrackerState(is_tracking=False, scale=state.scale, roi=None,
                                 last_target=state.last_target)
        elif self._mode == "force_tracking":
            cfg = replace(cfg, detect_thresholds=cfg.track_thresholds)
        was_tracking = state.is_tracking

        t0 = time.perf_counter()
        target, self._state, details = track_step_annotated(state, frame, cfg,
                                                            self._canny)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0

        effective = (cfg.track_thresholds if was_tracking else cfg.detect_thresholds)
        annotation = {
            "frame_index": frame_index,
            "timestamp_ms": time.time() * 1000.0,
            "elapsed_ms": elapsed_ms,
            "scale": details.scale_used,
            "roi": ({"x": details.roi_used.x, "y": details.roi_used.y,
                     "width": details.roi_used.width,
                     "height": details.roi_used.height}
                    if details.roi_used is not None else None),
            "detections": [
                {"ellipse": _ellipse_dict(d.ellipse),
                 "contour_overlap": d.contour_overlap_score,
                 "ellipse_overlap": d.ellipse_overlap_score}
                for d in details.detections
            ],
            "selected_target": _ellipse_dict(target) if target is not None else None,
            "params": {
                "ContourOverlap": effective.contour_overlap,
                "EllipseOverlap": effective.ellipse_overlap,
                "mnAxSize": effective.min_axis_size,
                "mxAxSize": effective.max_axis_size,
                "maxAxisRatio": effective.max_axis_ratio,
                "minContourSize": effective.min_contour_size,
                "CannyLow": self._canny.low_threshold,
                "CannyHigh": self._canny.high_threshold,
                "CannySigma": self._canny.gaussian_sigma,
                "mode": self._mode,
                "was_tracking": was_tracking,
            },
        }
        return {"type": "frame", "index": frame_index,
                "png_b64": _png_b64(frame), "annotation": annotation}


def _number(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def load_frame_dir(path: str) -> list[np.ndarray]:
    """All PNG/PGM frames under a directory, lexicographic order."""
    names = sorted(n for n in os.listdir(path)
                   if os.path.splitext(n)[1].lower() in (".png", ".pgm"))
    if not names:
        raise EmptyInput(f"no frames under {path}")
    return [load_image(os.path.join(path, n)) for n in names]


def build_app(session: CalibrationSession, fps: float = 10.0,
              static_dir: str | None = None):
    """FastAPI app: websocket stream + control at /ws, snapshot at /params."""
    clients: set = set()
    updates: asyncio.Queue = asyncio.Queue()

    async def worker():
        period = 1.0 / fps if fps > 0 else 0.0
        while True:
            frame_start = time.perf_counter()
            while not updates.empty():
                fields, ws = updates.get_nowait()
                try:
                    params = session.apply_update(fields)
                    reply = {"type": "ack", "params": params}
                except ConfigError as exc:
                    reply = {"type": "error", "message": str(exc),
                             "params": session.params()}
                try:
                    await ws.send_text(json.dumps(reply))
                except Exception:
                    clients.discard(ws)
            if session.exhausted:
                await asyncio.sleep(period or 0.05)
                continue
            message = json.dumps(session.process_next())
            for ws in list(clients):
                try:
                    await ws.send_text(message)
                except Exception:
                    clients.discard(ws)
            spent = time.perf_counter() - frame_start
            await asyncio.sleep(max(0.0, period - spent) if period else 0.0)

    @asynccontextmanager
    async def lifespan(app):
        task = asyncio.create_task(worker())
        try:
            yield
        finally:
            task.cancel()

    app = FastAPI(lifespan=lifespan)

    @app.get("/params")
    async def get_params():
        return session.params()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        clients.add(ws)
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps(
                        {"type": "error", "message": "not valid JSON",
                         "params": session.params()}))
                    continue
                if isinstance(msg, dict) and msg.get("type") == "update":
                    await updates.put((msg.get("fields", {}), ws))
                else:
                    await ws.send_text(json.dumps(
                        {"type": "error", "message": "expected an update message",
                         "params": session.params()}))
        except WebSocketDisconnect:
            pass
        finally:
            clients.discard(ws)

    if static_dir is not None and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def serve(source: str, host: str = "127.0.0.1", port: int = 8700,
          fps: float = 10.0, cfg: TrackerConfig | None = None,
          canny: CannyParams | None = None) -> None:
    """Run the calibration service over a frame directory (blocking)."""
    import uvicorn

    session = CalibrationSession(load_frame_dir(source), cfg, canny)
    here = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    static = os.path.join(here, "frontend", "dist")
    app = build_app(session, fps=fps, static_dir=static if os.path.isdir(static) else None)
    uvicorn.run(app, host=host, port=port, log_level="warning")
