from __future__ import annotations

import numpy as np
import pytest

from slicecast import Camera, Light, LightCamera, RenderSettings, TransferFunction
from slicecast.datasets import make_slab, make_sphere_blobs
from slicecast.transfer import preset
from slicecast.volume import VolumeDataset


@pytest.fixture
def linear_tf() -> TransferFunction:
    return preset("linear")


@pytest.fixture
def transparent_tf() -> TransferFunction:
    return TransferFunction([(0.0, (0.0, 0.0, 0.0, 0.0)), (1.0, (0.5, 0.5, 0.5, 0.0))])


@pytest.fixture
def blob_volume() -> VolumeDataset:
    return make_sphere_blobs((32, 32, 32), seed=7)


@pytest.fixture
def slab_volume() -> VolumeDataset:
    return make_slab((32, 32, 32), axis=2, lo=0.3, hi=0.5, value=1.0)


@pytest.fixture
def empty_volume() -> VolumeDataset:
    return VolumeDataset.from_array(np.zeros((8, 8, 8), dtype=np.float32))


@pytest.fixture
def default_camera() -> Camera:
    return Camera(position=(0.5, 0.5, -1.6), target=(0.5, 0.5, 0.5))


def constant_alpha_tf(alpha: float, rgb=(1.0, 1.0, 1.0)) -> TransferFunction:
    return TransferFunction([(0.0, (*rgb, alpha)), (1.0, (*rgb, alpha))])


def small_settings(camera, light, **kw) -> RenderSettings:
    defaults = dict(viewport=(32, 32), step=1.0 / 64.0)
    defaults.update(kw)
    return RenderSettings(camera=camera, light=light, **defaults)
