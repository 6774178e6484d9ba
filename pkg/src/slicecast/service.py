"""Stateless HTTP render service.

POST /render accepts a JSON scene request and returns a PNG; build and
render times travel in X-Build-Ms / X-Render-Ms headers. Attenuation
buffers are cached by everything that shapes them (dataset, transfer
function, light, slice count, resolution, compensation), so camera-only
changes skip the build pass entirely: the structural advantage of slicing
once and ray casting many times, surfaced as an API property.
"""

from __future__ import annotations

import threading
import time
from collections import OrderedDict
from pathlib import Path
from typing import Optional, Union

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from . import __version__, datasets
from .config import METHOD_MODES
from .image import encode_png
from .lightbuffer import LightCamera, build_attenuation_buffer
from .raycaster import Camera, Light, RenderSettings, render
from .slicing import make_slice_stack
from .transfer import PRESETS, TransferFunction, preset
from .volume import VolumeDataset

VIEWPORT_CAP = 1024
BUFFER_RES_CAP = 1024
MAX_SLICES = 1024


class ControlPoint(BaseModel):
    x: float
    rgba: tuple[float, float, float, float]


class CameraSpec(BaseModel):
    position: tuple[float, float, float] = (0.5, 0.5, -1.6)
    target: tuple[float, float, float] = (0.5, 0.5, 0.5)
    up: tuple[float, float, float] = (0.0, 1.0, 0.0)
    fov_deg: float = Field(default=45.0, gt=0.0, lt=180.0)


class LightSpec(BaseModel):
    direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    color: tuple[float, float, float] = (1.0, 1.0, 1.0)


class RenderRequest(BaseModel):
    dataset: str
    transfer_function: Union[str, list[ControlPoint]] = "linear"
    camera: CameraSpec = CameraSpec()
    light: LightSpec = LightSpec()
    shading: str = "sbrc"
    n_slices: int = Field(default=128, ge=1, le=MAX_SLICES)
    buffer_resolution: tuple[int, int] = (256, 256)
    step: float = Field(default=1.0 / 256.0, gt=0.0)
    viewport: tuple[int, int] = (512, 512)
    compensation_n: float = Field(default=0.0, ge=0.0)
    lookup_mode: str = "linear"

    @field_validator("viewport")
    @classmethod
    def _cap_viewport(cls, v):
        if v[0] < 1 or v[1] < 1 or v[0] > VIEWPORT_CAP or v[1] > VIEWPORT_CAP:
            raise ValueError(f"viewport must be within 1..{VIEWPORT_CAP} per axis")
        return v

    @field_validator("buffer_resolution")
    @classmethod
    def _cap_buffer(cls, v):
        if v[0] < 1 or v[1] < 1 or v[0] > BUFFER_RES_CAP or v[1] > BUFFER_RES_CAP:
            raise ValueError(f"buffer_resolution must be within 1..{BUFFER_RES_CAP} per axis")
        return v

    @field_validator("shading")
    @classmethod
    def _check_shading(cls, v):
        if v not in METHOD_MODES:
            raise ValueError(f"unknown shading {v!r}; choose from {tuple(METHOD_MODES)}")
        return v

    @field_validator("lookup_mode")
    @classmethod
    def _check_lookup(cls, v):
        if v not in ("nearest", "linear"):
            raise ValueError("lookup_mode must be 'nearest' or 'linear'")
        return v


class BufferCache:
    """Bounded LRU with atomic get-or-build per key."""

    def __init__(self, max_entries: int = 8):
        self.max_entries = max_entries
        self._entries: OrderedDict = OrderedDict()
        self._pending: dict = {}
        self._lock = threading.Lock()

    def get_or_build(self, key, builder):
        """Returns (value, hit). Concurrent requests for one key build once."""
        while True:
            with self._lock:
                if key in self._entries:
                    self._entries.move_to_end(key)
                    return self._entries[key], True
                event = self._pending.get(key)
                if event is None:
                    self._pending[key] = threading.Event()
                    break
            event.wait()
        try:
            value = builder()
        except BaseException:
            with self._lock:
                self._pending.pop(key).set()
            raise
        with self._lock:
            self._entries[key] = value
            while len(self._entries) > self.max_entries:
                self._entries.popitem(last=False)
            self._pending.pop(key).set()
        return value, False


class _Registry:
    """Lazy-loading volume registry over a directory of raw+descriptor pairs."""

    def __init__(self, data_dir: Path):
        self.data_dir = data_dir
        self._volumes: dict[str, VolumeDataset] = {}
        self._lock = threading.Lock()

    def ids(self) -> set[str]:
        return {entry["id"] for entry in datasets.list_datasets(self.data_dir)}

    def get(self, dataset_id: str) -> VolumeDataset:
        with self._lock:
            vol = self._volumes.get(dataset_id)
        if vol is not None:
            return vol
        vol = datasets.load_dataset(self.data_dir, dataset_id)
        with self._lock:
            self._volumes.setdefault(dataset_id, vol)
            return self._volumes[dataset_id]


def _tf_from_request(req: RenderRequest) -> tuple[TransferFunction, str]:
    if isinstance(req.transfer_function, str):
        if req.transfer_function not in PRESETS:
            raise ValueError(f"unknown transfer-function preset {req.transfer_function!r}")
        return preset(req.transfer_function), f"preset:{req.transfer_function}"
    points = [(p.x, p.rgba) for p in req.transfer_function]
    tf = TransferFunction(points)
    return tf, "points:" + repr(points)


def create_app(
    data_dir: str | Path,
    max_concurrency: int = 4,
    cache_size: int = 8,
    static_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="slicecast render service", version=__version__)
    registry = _Registry(Path(data_dir))
    cache = BufferCache(max_entries=cache_size)
    slots = threading.BoundedSemaphore(max_concurrency)

    @app.exception_handler(RequestValidationError)
    async def _invalid(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(x) for x in err.get("loc", ())], "msg": str(err.get("msg", ""))}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/datasets")
    def list_all():
        return datasets.list_datasets(registry.data_dir)

    @app.post("/render")
    def render_frame(req: RenderRequest):
        if not slots.acquire(blocking=False):
            return JSONResponse(status_code=503, content={"detail": "over capacity"})
        try:
            return _render(req)
        finally:
            slots.release()

    def _render(req: RenderRequest):
        if req.dataset not in registry.ids():
            return JSONResponse(status_code=404, content={"detail": f"unknown dataset {req.dataset!r}"})
        try:
            tf, tf_key = _tf_from_request(req)
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        volume = registry.get(req.dataset)

        try:
            light = Light(direction=np.asarray(req.light.direction), color=np.asarray(req.light.color))
            settings = RenderSettings(
                camera=Camera(
                    position=np.asarray(req.camera.position),
                    target=np.asarray(req.camera.target),
                    up=np.asarray(req.camera.up),
                    fov_deg=req.camera.fov_deg,
                ),
                light=light,
                viewport=req.viewport,
                step=req.step,
                shading_mode=METHOD_MODES[req.shading],
                lookup_mode=req.lookup_mode,
            )
        except ValueError as exc:  # degenerate geometry (zero light, camera == target)
            return JSONResponse(status_code=400, content={"detail": str(exc)})

        build_ms = 0.0
        buffer = None
        if settings.shading_mode in ("sbrc_shadow", "shell", "cone"):
            key = (
                req.dataset,
                tf_key,
                tuple(np.round(light.direction, 12)),
                tuple(req.light.color),
                req.n_slices,
                tuple(req.buffer_resolution),
                req.compensation_n,
            )

            def _build():
                cam = LightCamera.fit(light.direction, light.color, req.buffer_resolution)
                stack = make_slice_stack(light.direction, req.n_slices)
                return build_attenuation_buffer(volume, tf, cam, stack, req.compensation_n)

            t0 = time.perf_counter()
            buffer, hit = cache.get_or_build(key, _build)
            build_ms = 0.0 if hit else (time.perf_counter() - t0) * 1e3

        t0 = time.perf_counter()
        img = render(volume, tf, settings, buffer)
        render_ms = (time.perf_counter() - t0) * 1e3
        return Response(
            content=encode_png(img),
            media_type="image/png",
            headers={
                "X-Build-Ms": f"{build_ms:.3f}",
                "X-Render-Ms": f"{render_ms:.3f}",
            },
        )

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="viewer")
    return app
