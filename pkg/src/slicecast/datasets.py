"""Synthetic volume generators and dataset-directory enumeration.

The generators cover the shapes the tests and benchmarks need without any
external downloads: smooth random blobs, an axis-aligned slab, and a
perforated block in the spirit of machine-part scans.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .volume import DescriptorError, VolumeDataset, VolumeDescriptor, load_raw

log = logging.getLogger(__name__)

SYNTHETIC_NAMES = ("sphere-blob", "slab", "perforated-block")


def _grid(dims: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    nx, ny, nz = dims
    x = (np.arange(nx) + 0.5) / nx
    y = (np.arange(ny) + 0.5) / ny
    z = (np.arange(nz) + 0.5) / nz
    zz, yy, xx = np.meshgrid(z, y, x, indexing="ij")
    return xx, yy, zz


def make_sphere_blobs(dims=(64, 64, 64), seed: int = 0, n_blobs: int = 5) -> VolumeDataset:
    """Sum of random gaussian blobs, clipped to [0,1]. Smooth everywhere."""
    rng = np.random.default_rng(seed)
    xx, yy, zz = _grid(dims)
    field = np.zeros_like(xx)
    for _ in range(n_blobs):
        center = rng.uniform(0.2, 0.8, size=3)
        sigma = rng.uniform(0.08, 0.2)
        amp = rng.uniform(0.5, 1.0)
        r2 = (xx - center[0]) ** 2 + (yy - center[1]) ** 2 + (zz - center[2]) ** 2
        field += amp * np.exp(-r2 / (2.0 * sigma * sigma))
    return VolumeDataset.from_array(np.clip(field, 0.0, 1.0))


def make_slab(dims=(32, 32, 32), axis: int = 2, lo: float = 0.4, hi: float = 0.6,
              value: float = 1.0) -> VolumeDataset:
    """Constant-density slab spanning [lo, hi] along one axis."""
    coords = _grid(dims)[axis]
    field = np.where((coords >= lo) & (coords <= hi), value, 0.0)
    return VolumeDataset.from_array(field)


def make_perforated_block(dims=(64, 64, 64), seed: int = 0, n_holes: int = 6) -> VolumeDataset:
    """Solid block with cylindrical bores along random axes."""
    rng = np.random.default_rng(seed)
    xx, yy, zz = _grid(dims)
    field = np.where(
        (xx > 0.15) & (xx < 0.85) & (yy > 0.15) & (yy < 0.85) & (zz > 0.15) & (zz < 0.85),
        0.8,
        0.0,
    )
    coords = (xx, yy, zz)
    for _ in range(n_holes):
        axis = int(rng.integers(0, 3))
        a, b = [i for i in range(3) if i != axis]
        ca, cb = rng.uniform(0.25, 0.75, size=2)
        radius = rng.uniform(0.04, 0.1)
        hole = (coords[a] - ca) ** 2 + (coords[b] - cb) ** 2 < radius * radius
        field[hole] = 0.0
    return VolumeDataset.from_array(field)


def synthetic(name: str, dims=(64, 64, 64), seed: int = 0) -> VolumeDataset:
    if name == "sphere-blob":
        return make_sphere_blobs(dims, seed)
    if name == "slab":
        return make_slab(dims)
    if name == "perforated-block":
        return make_perforated_block(dims, seed)
    raise ValueError(f"unknown synthetic dataset {name!r}; choose from {SYNTHETIC_NAMES}")


def save_raw(v: VolumeDataset, raw_path: str | Path, scalar_type: str = "u8") -> Path:
    """Write the normalized data as .raw plus a sidecar JSON descriptor."""
    raw_path = Path(raw_path)
    if scalar_type == "u8":
        payload = (np.clip(v.data, 0.0, 1.0) * 255.0 + 0.5).astype("<u1")
    elif scalar_type == "u16":
        payload = (np.clip(v.data, 0.0, 1.0) * 65535.0 + 0.5).astype("<u2")
    elif scalar_type == "f32":
        payload = v.data.astype("<f4")
    else:
        raise ValueError(f"unsupported scalar_type {scalar_type!r}")
    raw_path.write_bytes(payload.tobytes())
    desc = VolumeDescriptor(dims=v.dims, scalar_type=scalar_type, spacing=v.spacing)
    raw_path.with_suffix(".json").write_text(desc.to_json())
    return raw_path


def list_datasets(data_dir: str | Path) -> list[dict]:
    """Enumerate raw+descriptor pairs; malformed descriptors are skipped."""
    out = []
    root = Path(data_dir)
    if not root.is_dir():
        return out
    for desc_path in sorted(root.glob("*.json")):
        raw_path = desc_path.with_suffix(".raw")
        if not raw_path.exists():
            continue
        try:
            desc = VolumeDescriptor.from_json(desc_path)
        except (DescriptorError, ValueError) as exc:
            log.warning("skipping %s: %s", desc_path.name, exc)
            continue
        out.append({
            "id": desc_path.stem,
            "dims": list(desc.dims),
            "scalar_type": desc.scalar_type,
        })
    return out


def load_dataset(data_dir: str | Path, dataset_id: str) -> VolumeDataset:
    root = Path(data_dir)
    desc_path = root / f"{dataset_id}.json"
    raw_path = root / f"{dataset_id}.raw"
    if not desc_path.exists() or not raw_path.exists():
        raise FileNotFoundError(f"dataset {dataset_id!r} not found in {data_dir}")
    return load_raw(raw_path, VolumeDescriptor.from_json(desc_path))
