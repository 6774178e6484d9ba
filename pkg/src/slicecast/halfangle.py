"""Half-angle slicing baseline: per-slice eye and light passes.

Slices the cube perpendicular to the half vector between the view and light
directions so one slice order serves both viewpoints. Each slice costs two
passes (eye composite, light-attenuation update), so the pass count, and
with it the cost, grows linearly with the slice count. This is the
comparison point for the buffer-based ray caster, which pays for slicing
once up front.

Shares the texel-centric sampling machinery of the slicer and light buffer
so quality differences come from algorithm structure, not resampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import normalize
from .lightbuffer import LightCamera, _bilinear_scalar, world_to_light_uv_many
from .slicing import make_slice_stack
from .transfer import OPACITY_REF_STEP, TransferFunction, lut_interp_many
from .volume import VolumeDataset, sample_trilinear_many


@dataclass
class HalfAngleState:
    half_vector: np.ndarray
    eye_accum: np.ndarray  # (H, W, 4) premultiplied rgba
    light_accum: np.ndarray  # (Hl, Wl) transmittance
    slice_order: str  # "front_to_back" | "back_to_front" relative to the eye


def _half_vector(view_dir: np.ndarray, light_dir: np.ndarray) -> tuple[np.ndarray, str]:
    if float(np.dot(view_dir, light_dir)) >= 0.0:
        s = view_dir + light_dir
        order = "front_to_back"
    else:
        s = -view_dir + light_dir
        order = "back_to_front"
    if float(np.linalg.norm(s)) < 1e-9:
        # View exactly opposes the light; slice along the light itself.
        return light_dir.copy(), "back_to_front"
    return normalize(s), order


def render_half_angle(
    v: VolumeDataset,
    tf: TransferFunction,
    settings,
    n_slices: int,
    light_resolution: tuple[int, int] | None = None,
    light_trace: list | None = None,
) -> tuple[np.ndarray, int]:
    """Render with alternating eye/light passes; returns (image, pass_count).

    pass_count is exactly 2 * n_slices: the quantity that makes this
    baseline expensive at high slice counts.
    """
    if n_slices < 1:
        raise ValueError("n_slices must be >= 1")
    light = settings.light
    cam = settings.camera
    w, h = settings.viewport
    lw, lh = light_resolution or settings.viewport

    view_dir = normalize(cam.target - cam.position)
    half, order = _half_vector(view_dir, light.direction)
    stack = make_slice_stack(half, n_slices)
    delta = stack.spacing

    light_cam = LightCamera.fit(light.direction, light.color, (lw, lh))
    # Light-texel (u, v) plane coordinates, reused every slice.
    u0, u1 = light_cam.u_range
    v0, v1 = light_cam.v_range
    uc = u0 + (np.arange(lw, dtype=np.float64) + 0.5) / lw * (u1 - u0)
    vc = v0 + (np.arange(lh, dtype=np.float64) + 0.5) / lh * (v1 - v0)
    ug, vg = np.meshgrid(uc, vc)
    light_base = ug[..., None] * light_cam.axis_u + vg[..., None] * light_cam.axis_v
    hl = float(np.dot(half, light.direction))  # > 0 by construction
    h_dot_u = float(np.dot(half, light_cam.axis_u))
    h_dot_v = float(np.dot(half, light_cam.axis_v))

    dirs = cam.rays(settings.viewport).reshape(-1, 3)
    eye = cam.position
    h_dot_d = dirs @ half
    h_dot_e = float(np.dot(half, eye))

    state = HalfAngleState(
        half_vector=half,
        eye_accum=np.zeros((h, w, 4), dtype=np.float64),
        light_accum=np.ones((lh, lw), dtype=np.float64),
        slice_order=order,
    )
    color = state.eye_accum.reshape(-1, 4)[:, :3]
    alpha = state.eye_accum.reshape(-1, 4)[:, 3]

    lut = tf.lut
    pass_count = 0
    for k in range(n_slices):
        offset = float(stack.plane_offsets[k])

        # Pass 1: composite the slice into the eye view, modulated by the
        # light transmittance accumulated over the slices nearer the light.
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (offset - h_dot_e) / h_dot_d
        pts = eye + t[:, None] * dirs
        valid = (h_dot_d != 0) & (t > 0) & np.all((pts >= 0.0) & (pts <= 1.0), axis=1)
        if valid.any():
            p = pts[valid]
            s = sample_trilinear_many(v, p)
            rgba = lut_interp_many(lut, s)
            # Oblique path length through the slab: delta / |cos(ray, half)|.
            exponent = delta / (OPACITY_REF_STEP * np.abs(h_dot_d[valid]))
            a = 1.0 - np.power(1.0 - rgba[:, 3], exponent)
            uv = world_to_light_uv_many(light_cam, p)
            shade = _bilinear_scalar(state.light_accum, uv)
            src_c = rgba[:, :3] * (a * shade)[:, None]
            if order == "front_to_back":
                one_m = (1.0 - alpha[valid])[:, None]
                color[valid] += one_m * src_c
                alpha[valid] += one_m[:, 0] * a
            else:
                color[valid] = (1.0 - a)[:, None] * color[valid] + src_c
                alpha[valid] = a + (1.0 - a) * alpha[valid]
        pass_count += 1

        # Pass 2: attenuate the running light buffer with this slice.
        tl = (offset - ug * h_dot_u - vg * h_dot_v) / hl
        lpts = light_base + tl[..., None] * light.direction
        covered = np.all((lpts >= 0.0) & (lpts <= 1.0), axis=-1)
        if covered.any():
            s = sample_trilinear_many(v, lpts[covered])
            rgba = lut_interp_many(lut, s)
            a = 1.0 - np.power(1.0 - rgba[:, 3], delta / (OPACITY_REF_STEP * hl))
            state.light_accum[covered] *= 1.0 - a
        pass_count += 1
        if light_trace is not None:
            light_trace.append(state.light_accum.copy())

    return state.eye_accum.astype(np.float32), pass_count

