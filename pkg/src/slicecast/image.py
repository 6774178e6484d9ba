"""Float-image helpers: PPM/PNG output, reading, and diff metrics.

Images are float arrays in [0,1], shaped (H, W, 3) or (H, W, 4) with
premultiplied alpha. PPM (binary P6) drops alpha; PNG keeps it.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def to_uint8(img: np.ndarray) -> np.ndarray:
    return (np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def write_ppm(path: str | Path, img: np.ndarray) -> None:
    rgb = to_uint8(img[..., :3])
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def write_png(path: str | Path, img: np.ndarray) -> None:
    arr = to_uint8(img)
    mode = "RGBA" if arr.ndim == 3 and arr.shape[2] == 4 else "RGB"
    Image.fromarray(arr, mode=mode).save(path, format="PNG")


def encode_png(img: np.ndarray) -> bytes:
    import io

    arr = to_uint8(img)
    mode = "RGBA" if arr.ndim == 3 and arr.shape[2] == 4 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def write_image(path: str | Path, img: np.ndarray) -> None:
    """Dispatch on suffix; .ppm stays dependency-free, everything else is PNG."""
    if str(path).lower().endswith(".ppm"):
        write_ppm(path, img)
    else:
        write_png(path, img)


def read_image(path: str | Path) -> np.ndarray:
    """Read any Pillow-supported image as float rgb(a) in [0,1]."""
    with Image.open(path) as im:
        arr = np.asarray(im)
    if arr.ndim == 2:
        arr = arr[..., None].repeat(3, axis=-1)
    return arr.astype(np.float64) / 255.0


def diff_metrics(a: np.ndarray, b: np.ndarray) -> dict:
    """Max/mean absolute difference, overall and per channel."""
    if a.shape[:2] != b.shape[:2]:
        raise ValueError(f"image dimensions differ: {a.shape[:2]} vs {b.shape[:2]}")
    ch = min(a.shape[2] if a.ndim == 3 else 1, b.shape[2] if b.ndim == 3 else 1)
    d = np.abs(a[..., :ch].astype(np.float64) - b[..., :ch].astype(np.float64))
    return {
        "max_abs": float(d.max()),
        "mean_abs": float(d.mean()),
        "per_channel_max": [float(x) for x in d.reshape(-1, ch).max(axis=0)],
        "per_channel_mean": [float(x) for x in d.reshape(-1, ch).mean(axis=0)],
    }
