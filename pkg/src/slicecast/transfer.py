"""Transfer functions: scalar value -> (color, opacity) classification.

Control points resolve into a 256-entry LUT at construction. Classification
interpolates the LUT linearly and returns opacity-weighted (premultiplied)
color, the convention assumed by every compositing path in this package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

LUT_SIZE = 256

# Reference sample spacing for opacity correction: a transfer-function
# opacity means "per step of 1/256 world units". Resampling at spacing d
# uses alpha' = 1 - (1 - alpha)^(d / OPACITY_REF_STEP).
OPACITY_REF_STEP = 1.0 / 256.0


@dataclass(frozen=True)
class ClassifiedSample:
    """Classification result; emission is premultiplied by opacity."""

    emission: np.ndarray
    opacity: float
    premultiplied: bool = True


class TransferFunction:
    """Piecewise-linear rgba ramp over normalized scalar values."""

    def __init__(self, control_points: list[tuple[float, tuple[float, float, float, float]]]):
        if len(control_points) < 2:
            raise ValueError("need at least two control points")
        xs = [float(x) for x, _ in control_points]
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise ValueError("control points must start at 0.0 and end at 1.0")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("control point scalars must be strictly increasing")
        rgba = np.array([c for _, c in control_points], dtype=np.float64)
        if rgba.shape[1] != 4 or rgba.min() < 0.0 or rgba.max() > 1.0:
            raise ValueError("rgba components must lie in [0,1]")
        self.control_points = [(x, tuple(map(float, c))) for x, c in control_points]
        grid = np.linspace(0.0, 1.0, LUT_SIZE)
        self.lut = np.stack(
            [np.interp(grid, xs, rgba[:, ch]) for ch in range(4)], axis=1
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "TransferFunction":
        points = json.loads(Path(path).read_text())
        return cls([(p["x"], tuple(p["rgba"])) for p in points])

    def to_json(self) -> str:
        return json.dumps([{"x": x, "rgba": list(c)} for x, c in self.control_points])

    def lookup_many(self, s: np.ndarray) -> np.ndarray:
        """Straight (non-premultiplied) rgba at scalars s, LUT-interpolated."""
        s = np.clip(np.asarray(s, dtype=np.float64), 0.0, 1.0)
        t = s * (LUT_SIZE - 1)
        i0 = np.floor(t).astype(np.intp)
        i1 = np.minimum(i0 + 1, LUT_SIZE - 1)
        f = (t - i0)[..., None]
        return self.lut[i0] * (1.0 - f) + self.lut[i1] * f

    def classify_many(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Premultiplied emission (..., 3) and opacity (...,) at scalars s."""
        rgba = self.lookup_many(s)
        a = rgba[..., 3]
        return rgba[..., :3] * a[..., None], a

    def resolve(self, step: float) -> np.ndarray:
        """LUT with opacity corrected for sample spacing ``step`` and colors
        premultiplied by the corrected opacity. Internal fast path for the
        renderer and buffer builder."""
        a = 1.0 - np.power(1.0 - self.lut[:, 3], step / OPACITY_REF_STEP)
        out = np.empty_like(self.lut)
        out[:, :3] = self.lut[:, :3] * a[:, None]
        out[:, 3] = a
        return out


def classify(tf: TransferFunction, s: float) -> ClassifiedSample:
    """LUT lookup with linear interpolation; emission premultiplied."""
    emission, a = tf.classify_many(np.asarray([s], dtype=np.float64))
    return ClassifiedSample(emission=emission[0], opacity=float(a[0]))


def lut_interp_many(lut: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Interpolate an arbitrary (LUT_SIZE, k) table at clamped scalars s."""
    s = np.clip(s, 0.0, 1.0)
    t = s * (LUT_SIZE - 1)
    i0 = np.floor(t).astype(np.intp)
    i1 = np.minimum(i0 + 1, LUT_SIZE - 1)
    f = (t - i0)[..., None]
    return lut[i0] * (1.0 - f) + lut[i1] * f


PRESETS: dict[str, list[tuple[float, tuple[float, float, float, float]]]] = {
    # Transparent-black to opaque-white ramp.
    "linear": [(0.0, (0.0, 0.0, 0.0, 0.0)), (1.0, (1.0, 1.0, 1.0, 1.0))],
    # Mild gray ramp, good for dense scans.
    "soft-gray": [
        (0.0, (0.0, 0.0, 0.0, 0.0)),
        (0.3, (0.4, 0.4, 0.4, 0.05)),
        (1.0, (0.95, 0.95, 0.95, 0.6)),
    ],
    # Black-body style ramp.
    "hot": [
        (0.0, (0.0, 0.0, 0.0, 0.0)),
        (0.33, (0.8, 0.1, 0.0, 0.15)),
        (0.66, (1.0, 0.6, 0.0, 0.45)),
        (1.0, (1.0, 1.0, 0.9, 0.9)),
    ],
    # Low-value haze with a hard bright core.
    "bone": [
        (0.0, (0.0, 0.0, 0.0, 0.0)),
        (0.35, (0.25, 0.25, 0.3, 0.02)),
        (0.6, (0.85, 0.8, 0.75, 0.35)),
        (1.0, (1.0, 1.0, 0.98, 0.95)),
    ],
}


def preset(name: str) -> TransferFunction:
    try:
        return TransferFunction(PRESETS[name])
    except KeyError:
        raise ValueError(f"unknown transfer-function preset {name!r}") from None
