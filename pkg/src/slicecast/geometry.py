"""Unit-cube geometry shared by the slicer, light buffer, and ray caster.

The render domain is the unit cube [0,1]^3; datasets are normalized into it
at load time. Everything here is pure numpy over immutable inputs.
"""

from __future__ import annotations

import numpy as np

# Corner i has coordinates (i & 1, (i >> 1) & 1, (i >> 2) & 1).
CUBE_VERTICES = np.array(
    [[(i >> a) & 1 for a in range(3)] for i in range(8)], dtype=np.float64
)

# The 12 edges connect corners whose indices differ by exactly one bit.
CUBE_EDGES = np.array(
    [(i, i | (1 << a)) for i in range(8) for a in range(3) if not i & (1 << a)],
    dtype=np.intp,
)


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def plane_basis(direction) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (u, v) spanning the plane perpendicular to ``direction``.

    Deterministic: the up hint is +y, falling back to +z when the direction
    is (anti)parallel to it. For direction +z this yields u=+x, v=+y.
    """
    d = normalize(direction)
    up = np.array([0.0, 1.0, 0.0])
    if abs(float(np.dot(up, d))) > 1.0 - 1e-9:
        up = np.array([0.0, 0.0, 1.0])
    u = normalize(np.cross(up, d))
    v = normalize(np.cross(d, u))
    return u, v


def ray_box_intersect(origins: np.ndarray, dirs: np.ndarray):
    """Slab test of rays against the unit cube.

    origins, dirs: (..., 3). Returns (t_enter, t_exit, hit) where hit means
    the ray segment [max(t_enter, 0), t_exit] is nonempty.
    """
    origins = np.asarray(origins, dtype=np.float64)
    dirs = np.asarray(dirs, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
        t_lo = (0.0 - origins) * inv
        t_hi = (1.0 - origins) * inv
    # Parallel rays: component never crosses the slab planes.
    parallel = dirs == 0.0
    inside = (origins >= 0.0) & (origins <= 1.0)
    t_lo = np.where(parallel, np.where(inside, -np.inf, np.inf), t_lo)
    t_hi = np.where(parallel, np.where(inside, np.inf, -np.inf), t_hi)
    t_near = np.minimum(t_lo, t_hi).max(axis=-1)
    t_far = np.maximum(t_lo, t_hi).min(axis=-1)
    t_enter = np.maximum(t_near, 0.0)
    hit = t_far > t_enter
    return t_enter, t_far, hit
