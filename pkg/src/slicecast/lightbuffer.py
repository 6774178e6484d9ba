"""Light-space attenuation buffer: built slice by slice, queried per sample.

The buffer is a stack of light-view images. Layer k holds the light intensity
arriving AT slice k, i.e. the incident light attenuated by slices 0..k-1, so
layer 0 is always the unattenuated light color. Internally one scalar
intensity per texel is stored; rgb layers are scalar * light_color.

Rasterization is texel-centric software: every texel center inside the slice
polygon's footprint is inverse-projected onto the slice plane and the volume
is sampled there. No GPU, no frame-buffer readback; the layered stack lives
in memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import CUBE_VERTICES, normalize, plane_basis
from .slicing import SliceStackSpec, slice_index_many, slice_polygon
from .transfer import TransferFunction
from .volume import VolumeDataset, sample_trilinear_many


def _orthographic(l, r, b, t, n, f) -> np.ndarray:
    m = np.eye(4)
    m[0, 0] = 2.0 / (r - l)
    m[0, 3] = -(r + l) / (r - l)
    m[1, 1] = 2.0 / (t - b)
    m[1, 3] = -(t + b) / (t - b)
    m[2, 2] = 2.0 / (f - n)
    m[2, 3] = -(f + n) / (f - n)
    return m


@dataclass(frozen=True)
class LightCamera:
    """Orthographic camera looking along the light direction.

    The view basis is (axis_u, axis_v, -L) with origin at the world origin;
    the projection bounds are fitted to the unit cube's footprint so every
    cube vertex lands inside clip space.
    """

    light_dir: np.ndarray
    light_color: np.ndarray
    resolution: tuple[int, int]
    axis_u: np.ndarray
    axis_v: np.ndarray
    u_range: tuple[float, float]
    v_range: tuple[float, float]
    view_matrix: np.ndarray
    proj_matrix: np.ndarray

    @classmethod
    def fit(cls, light_dir, light_color=(1.0, 1.0, 1.0), resolution=(256, 256)) -> "LightCamera":
        w, h = int(resolution[0]), int(resolution[1])
        if w < 1 or h < 1:
            raise ValueError(f"resolution must be positive, got {resolution}")
        ld = normalize(light_dir)
        axis_u, axis_v = plane_basis(ld)
        u = CUBE_VERTICES @ axis_u
        v = CUBE_VERTICES @ axis_v
        d = CUBE_VERTICES @ ld
        view = np.eye(4)
        view[0, :3] = axis_u
        view[1, :3] = axis_v
        view[2, :3] = -ld  # light travel direction maps to view -z
        proj = _orthographic(u.min(), u.max(), v.min(), v.max(), -d.max(), -d.min())
        return cls(
            light_dir=ld,
            light_color=np.asarray(light_color, dtype=np.float64),
            resolution=(w, h),
            axis_u=axis_u,
            axis_v=axis_v,
            u_range=(float(u.min()), float(u.max())),
            v_range=(float(v.min()), float(v.max())),
            view_matrix=view,
            proj_matrix=proj,
        )

    @property
    def shadow_matrix(self) -> np.ndarray:
        """Projection * view; world position -> light clip space."""
        return self.proj_matrix @ self.view_matrix


@dataclass(frozen=True)
class ShadowMatrixInputs:
    """Full object-space lookup chain: L_p * L_v * E_vi * E_mv.

    The engine traces rays in world space, where E_vi * E_mv reduces to the
    model transform (identity for the unit cube), collapsing this to the
    light camera's shadow matrix.
    """

    l_p: np.ndarray
    l_v: np.ndarray
    e_mv: np.ndarray
    e_vi: np.ndarray

    def matrix(self) -> np.ndarray:
        return self.l_p @ self.l_v @ self.e_vi @ self.e_mv


@dataclass
class AttenuationBuffer:
    """Layered light-space intensity stack plus the lookup transform."""

    camera: LightCamera
    spec: SliceStackSpec
    compensation_n: float = 0.0
    # (n_slices, H, W) scalar intensity per texel; layer k rgb = this * light_color.
    intensity: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    @property
    def shadow_matrix(self) -> np.ndarray:
        return self.camera.shadow_matrix

    @property
    def light_color(self) -> np.ndarray:
        return self.camera.light_color

    @property
    def layers(self) -> np.ndarray:
        """(n_slices, H, W, 3) rgb light intensity arriving at each slice."""
        return (self.intensity[..., None] * self.light_color).astype(np.float32)

    def layer(self, k: int) -> np.ndarray:
        return (self.intensity[k][..., None] * self.light_color).astype(np.float32)


def _texel_world_grid(cam: LightCamera) -> tuple[np.ndarray, np.ndarray]:
    """World-space (u, v) plane coordinates of every texel center."""
    w, h = cam.resolution
    u0, u1 = cam.u_range
    v0, v1 = cam.v_range
    uc = u0 + (np.arange(w, dtype=np.float64) + 0.5) / w * (u1 - u0)
    vc = v0 + (np.arange(h, dtype=np.float64) + 0.5) / h * (v1 - v0)
    return np.meshgrid(uc, vc)  # each (H, W)


def build_attenuation_buffer(
    v: VolumeDataset,
    tf: TransferFunction,
    cam: LightCamera,
    spec: SliceStackSpec,
    compensation_n: float = 0.0,
) -> AttenuationBuffer:
    """Accumulate per-texel transmittance slice by slice, near-to-far from
    the light, storing the incoming intensity for each slice before that
    slice attenuates it. Per-slice opacity is corrected for the slice
    spacing so total attenuation is stable across slice counts."""
    if float(np.linalg.norm(cam.light_dir - spec.light_dir)) > 1e-9:
        raise ValueError("light camera and slice stack disagree on light direction")
    w, h = cam.resolution
    n = spec.n_slices
    lut = tf.resolve(spec.spacing)  # alpha corrected for bin width
    alpha_lut = np.ascontiguousarray(lut[:, 3])

    ug, vg = _texel_world_grid(cam)
    ld = spec.light_dir
    base = ug[..., None] * cam.axis_u + vg[..., None] * cam.axis_v  # (H, W, 3)

    trans = np.ones((h, w), dtype=np.float64)
    intensity = np.empty((n, h, w), dtype=np.float32)
    for k in range(n):
        intensity[k] = trans
        poly = slice_polygon(spec, k)
        if poly.degenerate:
            continue
        # Texel-centric rasterization, restricted to the polygon's footprint.
        pu = poly.vertices @ cam.axis_u
        pv = poly.vertices @ cam.axis_v
        ix0 = max(0, int(np.floor((pu.min() - cam.u_range[0]) / (cam.u_range[1] - cam.u_range[0]) * w)) - 1)
        ix1 = min(w, int(np.ceil((pu.max() - cam.u_range[0]) / (cam.u_range[1] - cam.u_range[0]) * w)) + 1)
        iy0 = max(0, int(np.floor((pv.min() - cam.v_range[0]) / (cam.v_range[1] - cam.v_range[0]) * h)) - 1)
        iy1 = min(h, int(np.ceil((pv.max() - cam.v_range[0]) / (cam.v_range[1] - cam.v_range[0]) * h)) + 1)
        if ix0 >= ix1 or iy0 >= iy1:
            continue
        pts = base[iy0:iy1, ix0:ix1] + float(spec.plane_offsets[k]) * ld
        covered = np.all((pts >= 0.0) & (pts <= 1.0), axis=-1)
        if not covered.any():
            continue
        sample_pts = pts[covered]
        s = sample_trilinear_many(v, sample_pts)
        t = np.clip(s, 0.0, 1.0) * 255.0
        i0 = t.astype(np.intp)
        i1 = np.minimum(i0 + 1, 255)
        f = t - i0
        alpha = alpha_lut[i0] * (1.0 - f) + alpha_lut[i1] * f
        if compensation_n > 0.0:
            window = intensity[k, iy0:iy1, ix0:ix1]
            comp = window[covered] * np.power(1.0 + alpha, compensation_n)
            window[covered] = comp
        tw = trans[iy0:iy1, ix0:ix1]
        tw[covered] *= 1.0 - alpha
    return AttenuationBuffer(camera=cam, spec=spec, compensation_n=compensation_n, intensity=intensity)


def world_to_light_uv_many(cam_or_buffer, pts: np.ndarray) -> np.ndarray:
    """Apply the shadow matrix, perspective-divide, remap [-1,1] -> [0,1]."""
    cam = cam_or_buffer.camera if isinstance(cam_or_buffer, AttenuationBuffer) else cam_or_buffer
    pts = np.asarray(pts, dtype=np.float64)
    flat = pts.reshape(-1, 3)
    m = cam.shadow_matrix
    clip = flat @ m[:3, :3].T + m[:3, 3]
    ww = flat @ m[3, :3] + m[3, 3]
    ndc = clip[:, :2] / ww[:, None]
    uv = (ndc + 1.0) / 2.0
    return uv.reshape(pts.shape[:-1] + (2,))


def world_to_light_uv(cam_or_buffer, p_world) -> tuple[float, float]:
    uv = world_to_light_uv_many(cam_or_buffer, np.asarray(p_world, dtype=np.float64)[None, :])[0]
    return float(uv[0]), float(uv[1])


def _bilinear_scalar(img: np.ndarray, uv: np.ndarray) -> np.ndarray:
    """Clamp-to-edge bilinear lookup of an (H, W) image at (M, 2) uv."""
    h, w = img.shape
    tx = uv[:, 0] * w - 0.5
    ty = uv[:, 1] * h - 0.5
    x0 = np.floor(tx).astype(np.intp)
    y0 = np.floor(ty).astype(np.intp)
    fx = tx - x0
    fy = ty - y0
    x0c = np.clip(x0, 0, w - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    c0 = img[y0c, x0c] * (1 - fx) + img[y0c, x1c] * fx
    c1 = img[y1c, x0c] * (1 - fx) + img[y1c, x1c] * fx
    return c0 * (1 - fy) + c1 * fy


def _bilinear_layers(stack: np.ndarray, k: np.ndarray, uv: np.ndarray) -> np.ndarray:
    """Per-point bilinear lookup inside per-point layers of an (n, H, W) stack."""
    h, w = stack.shape[1:]
    tx = uv[:, 0] * w - 0.5
    ty = uv[:, 1] * h - 0.5
    x0 = np.floor(tx).astype(np.intp)
    y0 = np.floor(ty).astype(np.intp)
    fx = tx - x0
    fy = ty - y0
    x0c = np.clip(x0, 0, w - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    c0 = stack[k, y0c, x0c] * (1 - fx) + stack[k, y0c, x1c] * fx
    c1 = stack[k, y1c, x0c] * (1 - fx) + stack[k, y1c, x1c] * fx
    return c0 * (1 - fy) + c1 * fy


def lookup_light_scalar_many(b: AttenuationBuffer, pts: np.ndarray, mode: str = "linear") -> np.ndarray:
    """Scalar light intensity factor (relative to light_color) at world points.

    Outside the light footprint, or ahead of slice 0, the light is
    unattenuated (factor 1).
    """
    if mode not in ("nearest", "linear"):
        raise ValueError(f"unknown lookup mode {mode!r}")
    pts = np.asarray(pts, dtype=np.float64)
    flat = pts.reshape(-1, 3)
    m = flat.shape[0]
    uv = world_to_light_uv_many(b, flat)
    inside = np.all((uv >= 0.0) & (uv <= 1.0), axis=1)
    out = np.ones(m, dtype=np.float64)
    if inside.any():
        uv_in = uv[inside]
        idx = slice_index_many(b.spec, flat[inside])
        n = b.spec.n_slices
        if mode == "nearest":
            k = np.clip(np.floor(np.clip(idx, 0.0, n - 1.0)), 0, n - 1).astype(np.intp)
            vals = _bilinear_layers(b.intensity, k, uv_in)
        else:
            # Plane-centered coordinate: plane k sits at continuous index k+0.5.
            li = np.clip(idx - 0.5, 0.0, n - 1.0)
            k0 = np.minimum(np.floor(li).astype(np.intp), n - 1)
            k1 = np.minimum(k0 + 1, n - 1)
            f = li - k0
            v0 = _bilinear_layers(b.intensity, k0, uv_in)
            v1 = _bilinear_layers(b.intensity, k1, uv_in)
            vals = v0 * (1.0 - f) + v1 * f
        out[inside] = vals
    return out.reshape(pts.shape[:-1])


def lookup_light_many(b: AttenuationBuffer, pts: np.ndarray, mode: str = "linear") -> np.ndarray:
    """rgb light intensity arriving at world points."""
    scalar = lookup_light_scalar_many(b, pts, mode)
    return scalar[..., None] * b.light_color


def lookup_light(b: AttenuationBuffer, p_world, mode: str = "linear") -> np.ndarray:
    return lookup_light_many(b, np.asarray(p_world, dtype=np.float64)[None, :], mode)[0]
