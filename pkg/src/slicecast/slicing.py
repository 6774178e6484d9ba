"""Light-aligned proxy geometry: cube-plane slice polygons and slice indexing.

A slice stack is defined by the light direction L and a slice count n: the
distance range [d_min, d_max] of the unit-cube vertices along L is split
into n equal bins and one plane is centered in each bin. A world position
maps to the stack through the continuous index n*(L.p - d_min)/(d_max - d_min),
which lands in the bin of its nearest plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CUBE_EDGES, CUBE_VERTICES, normalize, plane_basis

# Two coincident edge hits closer than this are one vertex.
DEDUP_EPS = 1e-9


@dataclass(frozen=True)
class SliceStackSpec:
    light_dir: np.ndarray
    n_slices: int
    d_min: float
    d_max: float
    plane_offsets: np.ndarray

    @property
    def spacing(self) -> float:
        """World-space bin width along the light direction."""
        return (self.d_max - self.d_min) / self.n_slices


@dataclass(frozen=True)
class SlicePolygon:
    """Convex cube-plane intersection, vertices fan-ordered around the centroid."""

    slice_index: int
    vertices: np.ndarray  # (m, 3), m in {0} U [3, 6]

    @property
    def triangle_count(self) -> int:
        return max(0, len(self.vertices) - 2)

    @property
    def degenerate(self) -> bool:
        return len(self.vertices) < 3


def make_slice_stack(light_dir, n_slices: int) -> SliceStackSpec:
    """Equally spaced, bin-centered slice planes perpendicular to the light."""
    if n_slices < 1:
        raise ValueError(f"n_slices must be >= 1, got {n_slices}")
    ld = normalize(light_dir)
    dots = CUBE_VERTICES @ ld
    d_min = float(dots.min())
    d_max = float(dots.max())
    delta = (d_max - d_min) / n_slices
    offsets = d_min + (np.arange(n_slices, dtype=np.float64) + 0.5) * delta
    return SliceStackSpec(
        light_dir=ld, n_slices=n_slices, d_min=d_min, d_max=d_max, plane_offsets=offsets
    )


def slice_polygon(spec: SliceStackSpec, k: int) -> SlicePolygon:
    """Intersect plane k with the 12 cube edges; 3-6 vertices, or empty when
    the plane only grazes a vertex or edge."""
    if not 0 <= k < spec.n_slices:
        raise ValueError(f"slice index {k} out of range [0, {spec.n_slices})")
    offset = float(spec.plane_offsets[k])
    ld = spec.light_dir
    d = CUBE_VERTICES @ ld - offset

    points = []
    for a, b in CUBE_EDGES:
        da, db = d[a], d[b]
        if da == 0.0:
            points.append(CUBE_VERTICES[a])
        if db == 0.0:
            points.append(CUBE_VERTICES[b])
        if (da < 0.0 < db) or (db < 0.0 < da):
            t = da / (da - db)
            points.append(CUBE_VERTICES[a] + t * (CUBE_VERTICES[b] - CUBE_VERTICES[a]))
    unique: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > DEDUP_EPS for q in unique):
            unique.append(p)
    if len(unique) < 3:
        return SlicePolygon(slice_index=k, vertices=np.empty((0, 3)))

    verts = np.array(unique)
    u, v = plane_basis(ld)
    centroid = verts.mean(axis=0)
    rel = verts - centroid
    angles = np.arctan2(rel @ v, rel @ u)
    return SlicePolygon(slice_index=k, vertices=verts[np.argsort(angles)])


def slice_index_many(spec: SliceStackSpec, pts: np.ndarray) -> np.ndarray:
    """Continuous buffer index of world positions; callers clamp/floor."""
    pts = np.asarray(pts, dtype=np.float64)
    dots = pts @ spec.light_dir
    return spec.n_slices * (dots - spec.d_min) / (spec.d_max - spec.d_min)


def slice_index(spec: SliceStackSpec, s_w) -> float:
    return float(slice_index_many(spec, np.asarray(s_w, dtype=np.float64)[None, :])[0])
