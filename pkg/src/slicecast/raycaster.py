"""Front-to-back ray casting with pluggable per-sample illumination.

Shading modes:
  none         transfer-function emission only
  phong        local gradient lighting
  sbrc_shadow  attenuation-buffer lookup (volume shadow)
  shell        buffer lookups averaged over cuboid shells (soft scattering)
  cone         buffer lookups averaged over a cone opening toward the light
  extinction   per-sample light-ray march reduced with extinction sums

The buffer-based modes need a prebuilt AttenuationBuffer; extinction marches
a light ray per sample and is meant for small scenes and cross-checks.
shadow_oracle is the brute-force reference the buffer modes approximate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import normalize, plane_basis, ray_box_intersect
from .lightbuffer import AttenuationBuffer, lookup_light_scalar_many
from .transfer import ClassifiedSample, TransferFunction, lut_interp_many
from .volume import VolumeDataset, gradient_many, sample_trilinear_many

BUFFER_MODES = ("sbrc_shadow", "shell", "cone")
SHADING_MODES = ("none", "phong") + BUFFER_MODES + ("extinction",)

# Opacity 1 would mean infinite extinction; clamp before taking logs.
ALPHA_MAX = 1.0 - 1e-6


@dataclass(frozen=True)
class Camera:
    """Pinhole camera; generates one ray per pixel."""

    position: np.ndarray
    target: np.ndarray
    up: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    fov_deg: float = 45.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64))
        object.__setattr__(self, "target", np.asarray(self.target, dtype=np.float64))
        object.__setattr__(self, "up", np.asarray(self.up, dtype=np.float64))
        if float(np.linalg.norm(self.target - self.position)) < 1e-12:
            raise ValueError("camera position and target coincide")

    def rays(self, viewport: tuple[int, int]) -> np.ndarray:
        """Unit ray directions, shaped (H, W, 3); row 0 is the top of the image."""
        w, h = viewport
        forward = normalize(self.target - self.position)
        right = normalize(np.cross(forward, self.up))
        up2 = np.cross(right, forward)
        tan_half = math.tan(math.radians(self.fov_deg) / 2.0)
        aspect = w / h
        ndc_x = ((np.arange(w) + 0.5) / w * 2.0 - 1.0) * tan_half * aspect
        ndc_y = (1.0 - (np.arange(h) + 0.5) / h * 2.0) * tan_half
        dirs = (
            forward
            + ndc_x[None, :, None] * right
            + ndc_y[:, None, None] * up2
        )
        return dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)


@dataclass(frozen=True)
class Light:
    """Directional light; direction is the way the light travels."""

    direction: np.ndarray
    color: np.ndarray = field(default_factory=lambda: np.ones(3))

    def __post_init__(self):
        object.__setattr__(self, "direction", normalize(self.direction))
        object.__setattr__(self, "color", np.asarray(self.color, dtype=np.float64))


@dataclass(frozen=True)
class PhongParams:
    ambient: float = 0.1
    diffuse: float = 0.7
    specular: float = 0.2
    shininess: float = 32.0


@dataclass(frozen=True)
class ShellKernel:
    """Concentric cuboid shells sampled at the six axis neighbors each."""

    radii: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("shell radii must be strictly increasing")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("shell weights must be non-negative and sum to 1")

    @classmethod
    def default(cls, voxel_size: float) -> "ShellKernel":
        return cls(
            radii=(voxel_size, 2 * voxel_size, 3 * voxel_size),
            weights=(0.5, 0.3, 0.2),
        )


@dataclass(frozen=True)
class ConeKernel:
    """Ring samples marching toward the light; 2 steps x 4 angles by default."""

    axis_samples: int = 2
    angles: tuple[float, ...] = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)
    ring_radius_per_step: float = 0.5

    def __post_init__(self):
        if self.axis_samples < 1:
            raise ValueError("axis_samples must be >= 1")
        if self.ring_radius_per_step < 0:
            raise ValueError("ring radius growth must be >= 0")


@dataclass(frozen=True)
class RenderSettings:
    camera: Camera
    light: Light
    viewport: tuple[int, int] = (512, 512)
    step: float = 1.0 / 256.0
    shading_mode: str = "none"
    early_termination_alpha: float = 0.99
    ambient_floor: float = 0.0
    shell_kernel: ShellKernel | None = None
    cone_kernel: ConeKernel | None = None
    phong: PhongParams = PhongParams()
    lookup_mode: str = "linear"
    threads: int = 1

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.viewport[0] < 1 or self.viewport[1] < 1:
            raise ValueError("viewport dimensions must be >= 1")
        if not 0.0 < self.early_termination_alpha <= 1.0:
            raise ValueError("early_termination_alpha must be in (0, 1]")
        if self.shading_mode not in SHADING_MODES:
            raise ValueError(f"unknown shading mode {self.shading_mode!r}")


@dataclass(frozen=True)
class CompositingState:
    color: np.ndarray = field(default_factory=lambda: np.zeros(3))
    alpha: float = 0.0


def composite_front_to_back(state: CompositingState, s: ClassifiedSample) -> CompositingState:
    """C += (1-a_dst) * C_src;  a_dst += (1-a_dst) * a_src  (C_src premultiplied)."""
    one_m = 1.0 - state.alpha
    return CompositingState(
        color=state.color + one_m * s.emission,
        alpha=state.alpha + one_m * s.opacity,
    )


def composite_back_to_front(color_behind: np.ndarray, s: ClassifiedSample) -> np.ndarray:
    """C = (1-a_src) * C_dst + C_src  (C_src premultiplied)."""
    return (1.0 - s.opacity) * np.asarray(color_behind, dtype=np.float64) + s.emission


def rodrigues_rotate(b_proj, l_dir, theta: float) -> np.ndarray:
    """Rotate b_proj around the unit axis l_dir by theta."""
    b = np.asarray(b_proj, dtype=np.float64)
    l = np.asarray(l_dir, dtype=np.float64)
    c, s = math.cos(theta), math.sin(theta)
    return b * c + np.cross(l, b) * s + l * float(np.dot(l, b)) * (1.0 - c)


def cone_project(c_n, a_proj) -> np.ndarray:
    """Orthogonal projection of c_n onto the axis a_proj."""
    c = np.asarray(c_n, dtype=np.float64)
    a = np.asarray(a_proj, dtype=np.float64)
    denom = float(np.dot(a, a))
    if denom == 0.0:
        raise ValueError("projection axis must be nonzero")
    return (float(np.dot(c, a)) / denom) * a


def sum_extinction(samples) -> float:
    """Transmittance e^(-sum dt*tau). Exactly-rounded summation makes the
    result bit-identical under any permutation of the samples."""
    return math.exp(-math.fsum(tau * dt for tau, dt in samples))


def _factor_from_intensity(scalar: np.ndarray, color: np.ndarray, floor: float) -> np.ndarray:
    """max(intensity, floor) / light_color componentwise, safe where color is 0."""
    rgb = scalar[..., None] * color
    rgb = np.maximum(rgb, floor)
    return np.where(color > 0.0, rgb / np.where(color > 0.0, color, 1.0), 1.0)


def _phong_scalar(
    v: VolumeDataset, pts: np.ndarray, light: Light, eye: np.ndarray, params: PhongParams
) -> np.ndarray:
    g = gradient_many(v, pts)
    norms = np.linalg.norm(g, axis=-1)
    lit = norms > 1e-12
    out = np.full(pts.shape[0], params.ambient, dtype=np.float64)
    if lit.any():
        n = -g[lit] / norms[lit][:, None]
        to_light = -light.direction
        ndl = np.maximum(0.0, n @ to_light)
        view = eye - pts[lit]
        view /= np.linalg.norm(view, axis=-1, keepdims=True)
        refl = 2.0 * ndl[:, None] * n - to_light
        rdv = np.maximum(0.0, np.sum(refl * view, axis=-1))
        out[lit] += params.diffuse * ndl + params.specular * np.power(rdv, params.shininess)
    return out


def shade_phong(v: VolumeDataset, sample_p, light: Light, eye, params: PhongParams = PhongParams()) -> float:
    """Local lighting factor: ambient + diffuse*max(0,N.L) + specular*max(0,R.V)^n."""
    return float(
        _phong_scalar(v, np.asarray(sample_p, dtype=np.float64)[None, :], light,
                      np.asarray(eye, dtype=np.float64), params)[0]
    )


def shade_sbrc_shadow(sample_p, buffer: AttenuationBuffer, ambient_floor: float = 0.0,
                      mode: str = "linear") -> np.ndarray:
    """Volume-shadow attenuation weight from the light buffer, in [floor, 1]."""
    pts = np.asarray(sample_p, dtype=np.float64)[None, :]
    scalar = lookup_light_scalar_many(buffer, pts, mode)
    return _factor_from_intensity(scalar, buffer.light_color, ambient_floor)[0]


def _shell_scalar(buffer: AttenuationBuffer, pts: np.ndarray, kernel: ShellKernel,
                  mode: str) -> np.ndarray:
    acc = np.zeros(pts.shape[0], dtype=np.float64)
    for radius, weight in zip(kernel.radii, kernel.weights):
        shell = np.zeros(pts.shape[0], dtype=np.float64)
        for axis in range(3):
            for sign in (1.0, -1.0):
                q = pts.copy()
                q[:, axis] += sign * radius
                shell += lookup_light_scalar_many(buffer, q, mode)
        acc += weight * shell / 6.0
    return acc


def shade_shell(sample_p, buffer: AttenuationBuffer, kernel: ShellKernel,
                ambient_floor: float = 0.0, mode: str = "linear") -> np.ndarray:
    """Scattering factor: shell-averaged light lookups around the sample."""
    pts = np.asarray(sample_p, dtype=np.float64)[None, :]
    scalar = _shell_scalar(buffer, pts, kernel, mode)
    return _factor_from_intensity(scalar, buffer.light_color, ambient_floor)[0]


def _rodrigues_many(b: np.ndarray, l: np.ndarray, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return b * c + np.cross(l, b) * s + l * (b @ l)[:, None] * (1.0 - c)


def _cone_scalar(buffer: AttenuationBuffer, pts: np.ndarray, kernel: ConeKernel,
                 eye: np.ndarray | None, mode: str) -> np.ndarray:
    l = buffer.spec.light_dir
    to_light = -l
    spacing = buffer.spec.spacing
    m = pts.shape[0]

    fallback = plane_basis(l)[0]
    if eye is None:
        base = np.tile(fallback, (m, 1))
    else:
        e = eye - pts
        base = e - (e @ l)[:, None] * l
        norms = np.linalg.norm(base, axis=-1)
        ok = norms > 1e-12
        base[ok] /= norms[ok][:, None]
        base[~ok] = fallback

    acc = np.zeros(m, dtype=np.float64)
    count = 0
    for step_i in range(1, kernel.axis_samples + 1):
        dist = step_i * spacing
        axis_pt = pts + dist * to_light
        radius = kernel.ring_radius_per_step * dist
        for theta in kernel.angles:
            rotated = _rodrigues_many(base, l, theta)
            # Perpendicular complement of the axis projection keeps the ring
            # in the plane orthogonal to the light direction.
            perp = rotated - (rotated @ l)[:, None] * l
            norms = np.linalg.norm(perp, axis=-1)
            norms = np.where(norms > 1e-12, norms, 1.0)
            q = axis_pt + radius * perp / norms[:, None]
            acc += lookup_light_scalar_many(buffer, q, mode)
            count += 1
    return acc / count


def shade_cone(sample_p, buffer: AttenuationBuffer, kernel: ConeKernel, eye=None,
               ambient_floor: float = 0.0, mode: str = "linear") -> np.ndarray:
    """Scattering factor from ring samples inside a cone opening to the light."""
    pts = np.asarray(sample_p, dtype=np.float64)[None, :]
    eye_v = None if eye is None else np.asarray(eye, dtype=np.float64)
    scalar = _cone_scalar(buffer, pts, kernel, eye_v, mode)
    return _factor_from_intensity(scalar, buffer.light_color, ambient_floor)[0]


def _extinction_scalar(v: VolumeDataset, alpha_lut: np.ndarray, pts: np.ndarray,
                       to_light: np.ndarray, step: float) -> np.ndarray:
    """Transmittance toward the light via extinction sums e^(-sum dt*tau)."""
    m = pts.shape[0]
    dirs = np.broadcast_to(to_light, (m, 3))
    t_enter, t_exit, hit = ray_box_intersect(pts, dirs)
    tau_sum = np.zeros(m, dtype=np.float64)
    idx = np.flatnonzero(hit)
    t_cur = t_enter[idx] + 0.5 * step
    t_end = t_exit[idx]
    while idx.size:
        live = t_cur < t_end
        idx, t_cur, t_end = idx[live], t_cur[live], t_end[live]
        if not idx.size:
            break
        p = pts[idx] + t_cur[:, None] * to_light
        a = lut_interp_many(alpha_lut[:, None], sample_trilinear_many(v, p))[:, 0]
        a = np.minimum(a, ALPHA_MAX)
        tau_sum[idx] += -np.log1p(-a)  # dt * tau for one step
        t_cur = t_cur + step
    return np.exp(-tau_sum)


def _shadow_oracle_scalar(v: VolumeDataset, alpha_lut: np.ndarray, pts: np.ndarray,
                          to_light: np.ndarray, step: float) -> np.ndarray:
    m = pts.shape[0]
    dirs = np.broadcast_to(to_light, (m, 3))
    t_enter, t_exit, hit = ray_box_intersect(pts, dirs)
    trans = np.ones(m, dtype=np.float64)
    idx = np.flatnonzero(hit)
    t_cur = t_enter[idx] + 0.5 * step
    t_end = t_exit[idx]
    while idx.size:
        live = t_cur < t_end
        idx, t_cur, t_end = idx[live], t_cur[live], t_end[live]
        if not idx.size:
            break
        p = pts[idx] + t_cur[:, None] * to_light
        a = lut_interp_many(alpha_lut[:, None], sample_trilinear_many(v, p))[:, 0]
        trans[idx] *= 1.0 - np.minimum(a, ALPHA_MAX)
        t_cur = t_cur + step
    return trans


def shadow_oracle_many(v: VolumeDataset, tf: TransferFunction, pts: np.ndarray,
                       light: Light, oracle_step: float) -> np.ndarray:
    """Brute-force transmittance from each point to the light: a straight ray
    march accumulating (1 - alpha) with step-corrected opacity. The reference
    all buffer-based shadow modes are measured against."""
    if oracle_step <= 0:
        raise ValueError("oracle_step must be positive")
    alpha_lut = tf.resolve(oracle_step)[:, 3]
    return _shadow_oracle_scalar(
        v, alpha_lut, np.asarray(pts, dtype=np.float64), -light.direction, oracle_step
    )


def shadow_oracle(v: VolumeDataset, tf: TransferFunction, sample_p, light: Light,
                  oracle_step: float) -> float:
    return float(
        shadow_oracle_many(v, tf, np.asarray(sample_p, dtype=np.float64)[None, :], light, oracle_step)[0]
    )


def _make_shader(v: VolumeDataset, settings: RenderSettings, buffer: AttenuationBuffer | None,
                 alpha_lut_step: np.ndarray):
    """Returns pts (M,3) -> rgb factor (M,3) for the configured shading mode."""
    mode = settings.shading_mode
    floor = settings.ambient_floor
    light = settings.light
    eye = settings.camera.position
    if mode == "none":
        return lambda pts: np.ones((pts.shape[0], 3), dtype=np.float64)
    if mode == "phong":
        return lambda pts: np.repeat(
            _phong_scalar(v, pts, light, eye, settings.phong)[:, None], 3, axis=1
        )
    if mode == "extinction":
        to_light = -light.direction
        return lambda pts: np.repeat(
            np.maximum(_extinction_scalar(v, alpha_lut_step, pts, to_light, settings.step), floor)[:, None],
            3, axis=1,
        )
    assert buffer is not None
    color = buffer.light_color
    lookup_mode = settings.lookup_mode
    if mode == "sbrc_shadow":
        return lambda pts: _factor_from_intensity(
            lookup_light_scalar_many(buffer, pts, lookup_mode), color, floor
        )
    if mode == "shell":
        kernel = settings.shell_kernel or ShellKernel.default(float(v.voxel_size.max()))
        return lambda pts: _factor_from_intensity(
            _shell_scalar(buffer, pts, kernel, lookup_mode), color, floor
        )
    if mode == "cone":
        kernel = settings.cone_kernel or ConeKernel()
        return lambda pts: _factor_from_intensity(
            _cone_scalar(buffer, pts, kernel, eye, lookup_mode), color, floor
        )
    raise ValueError(f"unknown shading mode {mode!r}")


def _march_rays(v: VolumeDataset, lut: np.ndarray, settings: RenderSettings,
                shader, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Front-to-back march of a flat batch of rays; returns (N, 4) rgba."""
    n = dirs.shape[0]
    step = settings.step
    thresh = settings.early_termination_alpha
    color = np.zeros((n, 3), dtype=np.float64)
    alpha = np.zeros(n, dtype=np.float64)

    t_enter, t_exit, hit = ray_box_intersect(np.broadcast_to(origin, (n, 3)), dirs)
    idx = np.flatnonzero(hit)
    t_cur = t_enter[idx] + 0.5 * step
    t_end = t_exit[idx]
    while idx.size:
        live = (t_cur < t_end) & (alpha[idx] < thresh)
        idx, t_cur, t_end = idx[live], t_cur[live], t_end[live]
        if not idx.size:
            break
        pts = origin + t_cur[:, None] * dirs[idx]
        rgba = lut_interp_many(lut, sample_trilinear_many(v, pts))
        factor = shader(pts)
        one_m = (1.0 - alpha[idx])[:, None]
        color[idx] += one_m * rgba[:, :3] * factor
        alpha[idx] += one_m[:, 0] * rgba[:, 3]
        t_cur = t_cur + step
    return np.concatenate([color, alpha[:, None]], axis=1)


def render(v: VolumeDataset, tf: TransferFunction, settings: RenderSettings,
           buffer: AttenuationBuffer | None = None) -> np.ndarray:
    """Ray-cast the volume; returns a premultiplied rgba float32 image (H, W, 4).

    Background is transparent black. Output is bit-identical for any thread
    count: rows are partitioned into independent contiguous chunks.
    """
    if settings.shading_mode in BUFFER_MODES and buffer is None:
        raise ConfigError(f"shading mode {settings.shading_mode!r} needs an attenuation buffer")
    w, h = settings.viewport
    lut = tf.resolve(settings.step)
    shader = _make_shader(v, settings, buffer, np.ascontiguousarray(lut[:, 3]))
    dirs = settings.camera.rays(settings.viewport).reshape(-1, 3)
    origin = settings.camera.position

    threads = max(1, settings.threads)
    if threads == 1:
        flat = _march_rays(v, lut, settings, shader, origin, dirs)
    else:
        bounds = [(i * h // threads) * w for i in range(threads + 1)]
        chunks = [dirs[a:b] for a, b in zip(bounds, bounds[1:]) if b > a]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda c: _march_rays(v, lut, settings, shader, origin, c), chunks
            ))
        flat = np.concatenate(parts, axis=0)
    return flat.reshape(h, w, 4).astype(np.float32)
