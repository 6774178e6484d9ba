"""Scene configuration: one JSON file pins an experiment; CLI flags override."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import datasets
from .errors import ConfigError
from .raycaster import BUFFER_MODES, Camera, ConeKernel, Light, RenderSettings, ShellKernel
from .transfer import TransferFunction, preset
from .volume import VolumeDataset, VolumeDescriptor, load_raw

# CLI/bench method names -> renderer shading modes ("has" is its own path).
METHOD_MODES = {
    "none": "none",
    "phong": "phong",
    "sbrc": "sbrc_shadow",
    "shell": "shell",
    "cone": "cone",
    "extinction": "extinction",
}
METHODS = tuple(METHOD_MODES) + ("has",)


@dataclass(frozen=True)
class BufferParams:
    n_slices: int = 128
    resolution: tuple[int, int] = (256, 256)
    compensation_n: float = 0.0

    def __post_init__(self):
        if self.n_slices < 1:
            raise ConfigError("buffer n_slices must be >= 1")
        if self.resolution[0] < 1 or self.resolution[1] < 1:
            raise ConfigError("buffer resolution must be positive")


@dataclass
class Scene:
    volume: VolumeDataset
    tf: TransferFunction
    settings: RenderSettings
    buffer_params: BufferParams
    method: str
    output: str | None = None

    @property
    def needs_buffer(self) -> bool:
        return METHOD_MODES.get(self.method) in BUFFER_MODES


def _load_volume(spec: dict, base: Path, seed_override: int | None) -> VolumeDataset:
    if "synthetic" in spec:
        dims = tuple(spec.get("dims", (64, 64, 64)))
        seed = int(spec.get("seed", 0)) if seed_override is None else seed_override
        return datasets.synthetic(spec["synthetic"], dims=dims, seed=seed)
    if "raw" in spec:
        raw = base / spec["raw"]
        desc_path = base / spec.get("descriptor", str(Path(spec["raw"]).with_suffix(".json")))
        return load_raw(raw, VolumeDescriptor.from_json(desc_path))
    raise ConfigError("dataset spec needs either 'synthetic' or 'raw'")


def _load_tf(spec, base: Path) -> TransferFunction:
    if isinstance(spec, str):
        return preset(spec)
    if isinstance(spec, dict):
        if "file" in spec:
            return TransferFunction.from_json(base / spec["file"])
        if "points" in spec:
            return TransferFunction([(p["x"], tuple(p["rgba"])) for p in spec["points"]])
    raise ConfigError("transfer_function must be a preset name, {'file': ...} or {'points': ...}")


def load_scene(path: str | Path, *, out: str | None = None, threads: int | None = None,
               seed: int | None = None) -> Scene:
    """Parse a scene JSON; keyword overrides mirror the CLI flags."""
    path = Path(path)
    base = path.parent
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return scene_from_dict(raw, base=base, out=out, threads=threads, seed=seed)


def scene_from_dict(raw: dict, base: Path = Path("."), *, out: str | None = None,
                    threads: int | None = None, seed: int | None = None) -> Scene:
    method = raw.get("render", {}).get("shading", "none")
    if method not in METHODS:
        raise ConfigError(f"unknown shading method {method!r}; choose from {METHODS}")

    volume = _load_volume(raw.get("dataset", {"synthetic": "sphere-blob"}), base, seed)
    tf = _load_tf(raw.get("transfer_function", "linear"), base)

    cam_raw = raw.get("camera", {})
    camera = Camera(
        position=np.asarray(cam_raw.get("position", (0.5, 0.5, -1.6)), dtype=np.float64),
        target=np.asarray(cam_raw.get("target", (0.5, 0.5, 0.5)), dtype=np.float64),
        up=np.asarray(cam_raw.get("up", (0.0, 1.0, 0.0)), dtype=np.float64),
        fov_deg=float(cam_raw.get("fov_deg", 45.0)),
    )
    light_raw = raw.get("light", {})
    light = Light(
        direction=np.asarray(light_raw.get("direction", (0.0, 0.0, 1.0)), dtype=np.float64),
        color=np.asarray(light_raw.get("color", (1.0, 1.0, 1.0)), dtype=np.float64),
    )

    render_raw = raw.get("render", {})
    shading_mode = METHOD_MODES.get(method, "none")  # "has" renders separately
    kernels = {}
    if "shell_kernel" in render_raw:
        sk = render_raw["shell_kernel"]
        kernels["shell_kernel"] = ShellKernel(radii=tuple(sk["radii"]), weights=tuple(sk["weights"]))
    if "cone_kernel" in render_raw:
        ck = render_raw["cone_kernel"]
        kernels["cone_kernel"] = ConeKernel(
            axis_samples=int(ck.get("axis_samples", 2)),
            angles=tuple(ck.get("angles", (0.0, np.pi / 2, np.pi, 3 * np.pi / 2))),
            ring_radius_per_step=float(ck.get("ring_radius_per_step", 0.5)),
        )
    try:
        settings = RenderSettings(
            camera=camera,
            light=light,
            viewport=tuple(render_raw.get("viewport", (512, 512))),
            step=float(render_raw.get("step", 1.0 / 256.0)),
            shading_mode=shading_mode,
            early_termination_alpha=float(render_raw.get("early_termination_alpha", 0.99)),
            ambient_floor=float(render_raw.get("ambient_floor", 0.0)),
            lookup_mode=render_raw.get("lookup_mode", "linear"),
            threads=threads if threads is not None else int(render_raw.get("threads", 1)),
            **kernels,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    buf_raw = raw.get("buffer", {})
    buffer_params = BufferParams(
        n_slices=int(buf_raw.get("n_slices", 128)),
        resolution=tuple(buf_raw.get("resolution", (256, 256))),
        compensation_n=float(buf_raw.get("compensation_n", 0.0)),
    )
    return Scene(
        volume=volume,
        tf=tf,
        settings=settings,
        buffer_params=buffer_params,
        method=method,
        output=out if out is not None else raw.get("output"),
    )


def with_overrides(scene: Scene, *, method: str | None = None, n_slices: int | None = None,
                   resolution: tuple[int, int] | None = None) -> Scene:
    """Sweep helper: vary method/buffer knobs without reloading the dataset."""
    new_method = method if method is not None else scene.method
    if new_method not in METHODS:
        raise ConfigError(f"unknown shading method {new_method!r}")
    bp = scene.buffer_params
    bp = BufferParams(
        n_slices=n_slices if n_slices is not None else bp.n_slices,
        resolution=resolution if resolution is not None else bp.resolution,
        compensation_n=bp.compensation_n,
    )
    settings = replace(scene.settings, shading_mode=METHOD_MODES.get(new_method, "none"))
    return Scene(
        volume=scene.volume,
        tf=scene.tf,
        settings=settings,
        buffer_params=bp,
        method=new_method,
        output=scene.output,
    )
