"""Volumetric dataset loading, normalization, and reconstruction.

A dataset is a 3D scalar grid stored x-fastest. On load the raw scalars are
normalized to [0,1] and the physical extent (dims * spacing) is fitted into
the unit cube: the longest axis spans [0,1], the others keep proportion and
are centered. Sampling is trilinear with clamp-to-edge addressing inside the
cube; positions outside the cube read as 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DescriptorError(ValueError):
    """Dataset descriptor inconsistent with the raw file."""


class FormatError(ValueError):
    """Unsupported raw scalar encoding."""


_SCALAR_DTYPES = {
    "u8": np.dtype("<u1"),
    "u16": np.dtype("<u2"),
    "f32": np.dtype("<f4"),
}


@dataclass(frozen=True)
class VolumeDescriptor:
    """Sidecar metadata for a .raw file: voxel counts, encoding, spacing."""

    dims: tuple[int, int, int]
    scalar_type: str
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)

    @classmethod
    def from_json(cls, path: str | Path) -> "VolumeDescriptor":
        raw = json.loads(Path(path).read_text())
        try:
            dims = tuple(int(d) for d in raw["dims"])
            scalar_type = str(raw["scalar_type"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DescriptorError(f"malformed descriptor {path}: {exc}") from exc
        spacing = tuple(float(s) for s in raw.get("spacing", (1.0, 1.0, 1.0)))
        if len(dims) != 3 or len(spacing) != 3:
            raise DescriptorError(f"descriptor {path}: dims and spacing must be 3-vectors")
        return cls(dims=dims, scalar_type=scalar_type, spacing=spacing)

    def to_json(self) -> str:
        return json.dumps(
            {"dims": list(self.dims), "scalar_type": self.scalar_type, "spacing": list(self.spacing)}
        )


@dataclass
class VolumeDataset:
    """Normalized scalar grid over the unit cube.

    data is shaped (nz, ny, nx) so voxel (x, y, z) sits at flat index
    x + nx*(y + ny*z); values are float32 in [0,1]. box_lo/box_hi bound the
    physical extent inside the cube (equal to the cube for isotropic data).
    """

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    scalar_type: str
    data: np.ndarray
    value_range: tuple[float, float]
    box_lo: np.ndarray = field(default=None)  # type: ignore[assignment]
    box_hi: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        nx, ny, nz = self.dims
        if min(self.dims) < 2:
            raise DescriptorError(f"dims must all be >= 2, got {self.dims}")
        if self.data.shape != (nz, ny, nx):
            raise DescriptorError(
                f"data shape {self.data.shape} does not match dims {self.dims}"
            )
        if self.box_lo is None:
            extent = np.array(self.dims, dtype=np.float64) * np.asarray(self.spacing, dtype=np.float64)
            size = extent / extent.max()
            self.box_lo = (1.0 - size) / 2.0
            self.box_hi = self.box_lo + size

    @classmethod
    def from_array(
        cls,
        values: np.ndarray,
        spacing: tuple[float, float, float] = (1.0, 1.0, 1.0),
        scalar_type: str = "f32",
    ) -> "VolumeDataset":
        """Wrap an already-normalized (nz, ny, nx) float array in [0,1]."""
        values = np.asarray(values, dtype=np.float32)
        nz, ny, nx = values.shape
        return cls(
            dims=(nx, ny, nz),
            spacing=spacing,
            scalar_type=scalar_type,
            data=values,
            value_range=(float(values.min()), float(values.max())),
        )

    def voxel(self, x: int, y: int, z: int) -> float:
        return float(self.data[z, y, x])

    def voxel_center(self, x: int, y: int, z: int) -> np.ndarray:
        """World position of a voxel center (cell-centered grid)."""
        idx = np.array([x, y, z], dtype=np.float64)
        dims = np.array(self.dims, dtype=np.float64)
        return self.box_lo + (idx + 0.5) / dims * (self.box_hi - self.box_lo)

    @property
    def voxel_size(self) -> np.ndarray:
        """World-space size of one voxel per axis."""
        return (self.box_hi - self.box_lo) / np.array(self.dims, dtype=np.float64)


def load_raw(path: str | Path, meta: VolumeDescriptor) -> VolumeDataset:
    """Load a tightly packed little-endian .raw file described by ``meta``.

    Raises DescriptorError on a size mismatch, FormatError for an unknown
    scalar_type, OSError if the file cannot be read.
    """
    dtype = _SCALAR_DTYPES.get(meta.scalar_type)
    if dtype is None:
        raise FormatError(f"unsupported scalar_type {meta.scalar_type!r}")
    nx, ny, nz = meta.dims
    expected = nx * ny * nz * dtype.itemsize
    raw = Path(path).read_bytes()
    if len(raw) != expected:
        raise DescriptorError(
            f"{path}: file is {len(raw)} bytes, descriptor implies {expected}"
        )
    flat = np.frombuffer(raw, dtype=dtype)
    lo, hi = float(flat.min()), float(flat.max())
    if meta.scalar_type == "u8":
        data = flat.astype(np.float32) / 255.0
    elif meta.scalar_type == "u16":
        data = flat.astype(np.float32) / 65535.0
    else:  # f32: min-max normalize
        if hi > lo:
            data = ((flat - lo) / (hi - lo)).astype(np.float32)
        else:
            data = np.zeros(flat.shape, dtype=np.float32)
    return VolumeDataset(
        dims=meta.dims,
        spacing=meta.spacing,
        scalar_type=meta.scalar_type,
        data=data.reshape(nz, ny, nx),
        value_range=(lo, hi),
    )


def sample_trilinear_many(v: VolumeDataset, pts: np.ndarray) -> np.ndarray:
    """Trilinear reconstruction at (..., 3) world positions.

    Clamp-to-edge inside the unit cube; exactly 0 outside it.
    """
    pts = np.asarray(pts, dtype=np.float64)
    flat = pts.reshape(-1, 3)
    inside = np.all((flat >= 0.0) & (flat <= 1.0), axis=1)
    out = np.zeros(flat.shape[0], dtype=np.float64)
    if inside.any():
        p = flat[inside]
        dims = np.array(v.dims, dtype=np.float64)
        local = (p - v.box_lo) / (v.box_hi - v.box_lo)
        np.clip(local, 0.0, 1.0, out=local)
        g = local * dims - 0.5
        i0 = np.floor(g).astype(np.intp)
        f = g - i0
        i1 = i0 + 1
        nx, ny, nz = v.dims
        hi = np.array([nx - 1, ny - 1, nz - 1], dtype=np.intp)
        i0 = np.clip(i0, 0, hi)
        i1 = np.clip(i1, 0, hi)
        d = v.data
        x0, y0, z0 = i0[:, 0], i0[:, 1], i0[:, 2]
        x1, y1, z1 = i1[:, 0], i1[:, 1], i1[:, 2]
        fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
        c00 = d[z0, y0, x0] * (1 - fx) + d[z0, y0, x1] * fx
        c10 = d[z0, y1, x0] * (1 - fx) + d[z0, y1, x1] * fx
        c01 = d[z1, y0, x0] * (1 - fx) + d[z1, y0, x1] * fx
        c11 = d[z1, y1, x0] * (1 - fx) + d[z1, y1, x1] * fx
        c0 = c00 * (1 - fy) + c10 * fy
        c1 = c01 * (1 - fy) + c11 * fy
        out[inside] = c0 * (1 - fz) + c1 * fz
    return out.reshape(pts.shape[:-1])


def sample_trilinear(v: VolumeDataset, p) -> float:
    return float(sample_trilinear_many(v, np.asarray(p, dtype=np.float64)[None, :])[0])


def gradient_many(v: VolumeDataset, pts: np.ndarray) -> np.ndarray:
    """Central-difference gradient with a one-voxel step per axis.

    Probe positions are clamped to the cube and the difference is divided by
    the actual probe separation, so boundary points degrade to one-sided
    differences instead of reading zeros outside the cube.
    """
    pts = np.asarray(pts, dtype=np.float64)
    flat = pts.reshape(-1, 3)
    h = v.voxel_size
    grad = np.empty_like(flat)
    for a in range(3):
        step = np.zeros(3)
        step[a] = h[a]
        p_hi = np.clip(flat + step, 0.0, 1.0)
        p_lo = np.clip(flat - step, 0.0, 1.0)
        sep = p_hi[:, a] - p_lo[:, a]
        sep = np.where(sep == 0.0, 1.0, sep)
        grad[:, a] = (sample_trilinear_many(v, p_hi) - sample_trilinear_many(v, p_lo)) / sep
    return grad.reshape(pts.shape)


def gradient(v: VolumeDataset, p) -> np.ndarray:
    return gradient_many(v, np.asarray(p, dtype=np.float64)[None, :])[0]
