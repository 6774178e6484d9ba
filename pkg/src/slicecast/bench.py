"""Benchmark runner: timed render records and the CSV schema.

Documented schema (one row per measured combination):
  method,n_slices,buffer_resolution,sample_step,build_ms,render_ms,total_ms,pass_count,image_sha256
build_ms/render_ms are means over `repeats` runs after one discarded warm-up;
total_ms = build_ms + render_ms; image_sha256 fingerprints the (identical)
rendered frames so determinism is visible in the artifact.
"""

from __future__ import annotations

import csv
import hashlib
import io
import time
from dataclasses import dataclass

import numpy as np

from .config import Scene, with_overrides
from .halfangle import render_half_angle
from .lightbuffer import LightCamera, build_attenuation_buffer
from .raycaster import render
from .slicing import make_slice_stack

CSV_FIELDS = (
    "method",
    "n_slices",
    "buffer_resolution",
    "sample_step",
    "build_ms",
    "render_ms",
    "total_ms",
    "pass_count",
    "image_sha256",
)


@dataclass
class BenchRecord:
    method: str
    n_slices: int
    buffer_resolution: tuple[int, int]
    sample_step: float
    build_ms: float
    render_ms: float
    pass_count: int
    image_sha256: str = ""

    def __post_init__(self):
        if self.build_ms < 0 or self.render_ms < 0:
            raise ValueError("timings must be >= 0")

    @property
    def total_ms(self) -> float:
        return self.build_ms + self.render_ms

    def as_row(self) -> dict:
        return {
            "method": self.method,
            "n_slices": self.n_slices,
            "buffer_resolution": f"{self.buffer_resolution[0]}x{self.buffer_resolution[1]}",
            "sample_step": repr(self.sample_step),
            "build_ms": f"{self.build_ms:.3f}",
            "render_ms": f"{self.render_ms:.3f}",
            "total_ms": f"{self.total_ms:.3f}",
            "pass_count": self.pass_count,
            "image_sha256": self.image_sha256,
        }


def parse_row(row: dict) -> BenchRecord:
    """Inverse of BenchRecord.as_row (CSV round trip)."""
    w, h = row["buffer_resolution"].split("x")
    return BenchRecord(
        method=row["method"],
        n_slices=int(row["n_slices"]),
        buffer_resolution=(int(w), int(h)),
        sample_step=float(row["sample_step"]),
        build_ms=float(row["build_ms"]),
        render_ms=float(row["render_ms"]),
        pass_count=int(row["pass_count"]),
        image_sha256=row["image_sha256"],
    )


def render_scene(scene: Scene):
    """One timed render: (image, build_ms, render_ms, pass_count)."""
    bp = scene.buffer_params
    if scene.method == "has":
        t0 = time.perf_counter()
        img, passes = render_half_angle(
            scene.volume, scene.tf, scene.settings, bp.n_slices, light_resolution=bp.resolution
        )
        return img, 0.0, (time.perf_counter() - t0) * 1e3, passes

    buffer = None
    build_ms = 0.0
    if scene.needs_buffer:
        t0 = time.perf_counter()
        cam = LightCamera.fit(scene.settings.light.direction, scene.settings.light.color, bp.resolution)
        stack = make_slice_stack(scene.settings.light.direction, bp.n_slices)
        buffer = build_attenuation_buffer(
            scene.volume, scene.tf, cam, stack, compensation_n=bp.compensation_n
        )
        build_ms = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    img = render(scene.volume, scene.tf, scene.settings, buffer)
    return img, build_ms, (time.perf_counter() - t0) * 1e3, 1


def _image_hash(img: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(img).tobytes()).hexdigest()


def run_sweep(scene: Scene, methods, slices, resolutions, repeats: int = 3) -> list[BenchRecord]:
    """Every (method, n_slices, resolution) combination, mean timings over
    `repeats` runs with one extra discarded warm-up run."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    records = []
    for method in methods:
        for n in slices:
            for res in resolutions:
                variant = with_overrides(scene, method=method, n_slices=n, resolution=res)
                builds, renders = [], []
                passes = 0
                digest = ""
                for i in range(repeats + 1):
                    img, b, r, passes = render_scene(variant)
                    if i == 0:
                        digest = _image_hash(img)
                        continue  # warm-up discarded
                    builds.append(b)
                    renders.append(r)
                records.append(BenchRecord(
                    method=method,
                    n_slices=n,
                    buffer_resolution=res,
                    sample_step=scene.settings.step,
                    build_ms=float(np.mean(builds)),
                    render_ms=float(np.mean(renders)),
                    pass_count=passes,
                    image_sha256=digest,
                ))
    return records


def write_csv(records, fh_or_path) -> None:
    own = isinstance(fh_or_path, (str, bytes)) or hasattr(fh_or_path, "__fspath__")
    fh = open(fh_or_path, "w", newline="") if own else fh_or_path
    try:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for rec in records:
            writer.writerow(rec.as_row())
    finally:
        if own:
            fh.close()


def read_csv(path) -> list[BenchRecord]:
    with open(path, newline="") as fh:
        return [parse_row(row) for row in csv.DictReader(fh)]


def csv_text(records) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()
