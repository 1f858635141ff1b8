"""Render service: HTTP endpoints for batch renders plus a WebSocket stream
for interactive walkthroughs.

The service is configured by a JSON file listing probe-grid manifests:

    {"scenes": [{"id": "room", "name": "Room", "manifest": "room/grid.json"}]}

Relative manifest paths resolve against the config file's directory.
"""

from __future__ import annotations

import asyncio
import io
import json
import math
import os

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import Response
from PIL import Image

from .grid import ProbeGrid, load_grid
from .render import Camera, render_frame

PORT_ENV = "LFPROBE_PORT"
DEFAULT_PORT = 8000
STREAM_SIZE = 256  # default stream resolution; a session parameter


class ConfigError(Exception):
    pass


def load_config(path):
    """Load and validate the service config; every manifest is loaded up
    front so a bad file fails at startup, by name."""
    with open(path) as fh:
        config = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    scenes = {}
    for entry in config.get("scenes", []):
        for key in ("id", "manifest"):
            if key not in entry:
                raise ConfigError(f"{path}: scene entry missing '{key}'")
        manifest = entry["manifest"]
        if not os.path.isabs(manifest):
            manifest = os.path.join(base, manifest)
        try:
            grid = load_grid(manifest)
        except Exception as exc:
            raise ConfigError(f"cannot load manifest {manifest}: {exc}") from exc
        scenes[entry["id"]] = {
            "id": entry["id"],
            "name": entry.get("name", entry["id"]),
            "grid": grid,
        }
    return scenes


def _descriptor(scene):
    grid: ProbeGrid = scene["grid"]
    lo, hi = grid.bounds
    return {
        "id": scene["id"],
        "name": scene["name"],
        "probeCount": len(grid.probes),
        "gridDims": list(grid.dims),
        "bounds": {"lo": [float(x) for x in lo], "hi": [float(x) for x in hi]},
    }


def parse_camera(body, default_size=512):
    """Validate a camera request; raises ValueError naming the bad field."""
    if not isinstance(body, dict):
        raise ValueError("camera: request body must be a JSON object")
    for key in ("eye", "look"):
        val = body.get(key)
        if (not isinstance(val, (list, tuple)) or len(val) != 3
                or not all(isinstance(x, (int, float)) for x in val)
                or not all(math.isfinite(x) for x in val)):
            raise ValueError(f"{key}: expected 3 finite numbers")
    eye = [float(x) for x in body["eye"]]
    look = [float(x) for x in body["look"]]
    forward = np.asarray(look) - np.asarray(eye)
    if np.linalg.norm(forward) < 1e-9:
        raise ValueError("look: must differ from eye")
    fov = body.get("fov", 60.0)
    if not isinstance(fov, (int, float)) or not 0.0 < fov < 180.0:
        raise ValueError("fov: expected a number in (0, 180)")
    width = body.get("width", default_size)
    height = body.get("height", default_size)
    for key, val in (("width", width), ("height", height)):
        if not isinstance(val, int) or not 1 <= val <= 4096:
            raise ValueError(f"{key}: expected an integer in [1, 4096]")
    return Camera(eye=tuple(eye), forward=tuple(forward / np.linalg.norm(forward)),
                  vfov_deg=float(fov), width=width, height=height)


def encode_png(frame):
    buf = io.BytesIO()
    Image.fromarray(frame.rgb8, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def frame_payload(counter, png):
    return counter.to_bytes(4, "big") + png


def create_app(config_path=None, scenes=None) -> FastAPI:
    """Build the service app; scenes may be passed directly for tests."""
    if scenes is None:
        scenes = load_config(config_path) if config_path else {}
    app = FastAPI(title="lfprobe render service")
    app.state.scenes = scenes

    def get_scene(scene_id):
        scene = app.state.scenes.get(scene_id)
        if scene is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown scene: {scene_id}")
        return scene

    @app.get("/scenes")
    def list_scenes():
        return [_descriptor(s) for s in app.state.scenes.values()]

    @app.post("/scenes/{scene_id}/render")
    async def render_once(scene_id: str, body: dict):
        scene = get_scene(scene_id)
        try:
            cam = parse_camera(body)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        frame = await asyncio.to_thread(render_frame, scene["grid"], cam)
        stats = {
            "traceMs": frame.stats["traceMs"],
            "missFraction": frame.stats["missFraction"],
            "unknownFraction": frame.stats["unknownFraction"],
        }
        return Response(content=encode_png(frame), media_type="image/png",
                        headers={"X-Render-Stats": json.dumps(stats)})

    @app.websocket("/scenes/{scene_id}/stream")
    async def stream(ws: WebSocket, scene_id: str):
        scene = app.state.scenes.get(scene_id)
        await ws.accept()
        if scene is None:
            await ws.send_text(json.dumps(
                {"error": f"unknown scene: {scene_id}"}))
            await ws.close()
            return

        grid = scene["grid"]
        latest = {"camera": None, "spec": None}
        dirty = asyncio.Event()
        closed = asyncio.Event()

        async def receiver():
            try:
                while True:
                    text = await ws.receive_text()
                    try:
                        cam = parse_camera(json.loads(text),
                                           default_size=STREAM_SIZE)
                    except (ValueError, json.JSONDecodeError) as exc:
                        await ws.send_text(json.dumps({"error": str(exc)}))
                        continue
                    # latest-wins: older unrendered cameras are dropped
                    latest["camera"] = cam
                    latest["spec"] = json.loads(text)
                    dirty.set()
            except WebSocketDisconnect:
                pass
            finally:
                closed.set()
                dirty.set()

        recv_task = asyncio.create_task(receiver())
        counter = 0
        try:
            while True:
                await dirty.wait()
                if closed.is_set():
                    break
                dirty.clear()
                cam, spec = latest["camera"], latest["spec"]
                frame = await asyncio.to_thread(render_frame, grid, cam)
                counter += 1
                await ws.send_text(json.dumps({
                    "frameCounter": counter,
                    "camera": spec,
                    "stats": {
                        "traceMs": frame.stats["traceMs"],
                        "missFraction": frame.stats["missFraction"],
                        "unknownFraction": frame.stats["unknownFraction"],
                    },
                }))
                await ws.send_bytes(frame_payload(counter, encode_png(frame)))
        except (WebSocketDisconnect, RuntimeError):
            # the peer vanished mid-send; drop the session
            pass
        finally:
            recv_task.cancel()

    return app


def service_port(default=DEFAULT_PORT):
    return int(os.environ.get(PORT_ENV, default))


def run(config_path, host="127.0.0.1", port=None):
    import uvicorn

    uvicorn.run(create_app(config_path), host=host,
                port=service_port() if port is None else port)
