"""slicecast: software volume rendering with slice-based light attenuation.

Builds light-space attenuation buffers slice by slice and consumes them per
sample during ray casting for volume shadows and shell/cone scattering.
Ships baselines (local Phong, half-angle slicing), a brute-force shadow
oracle, a benchmark CLI, and a stateless render service.
"""

__version__ = "0.1.0"

from .lightbuffer import (
    AttenuationBuffer,
    LightCamera,
    ShadowMatrixInputs,
    build_attenuation_buffer,
    lookup_light,
    world_to_light_uv,
)
from .raycaster import (
    Camera,
    CompositingState,
    ConeKernel,
    Light,
    PhongParams,
    RenderSettings,
    ShellKernel,
    composite_back_to_front,
    composite_front_to_back,
    cone_project,
    render,
    rodrigues_rotate,
    shade_cone,
    shade_phong,
    shade_sbrc_shadow,
    shade_shell,
    shadow_oracle,
    sum_extinction,
)
from .slicing import SlicePolygon, SliceStackSpec, make_slice_stack, slice_index, slice_polygon
from .transfer import ClassifiedSample, TransferFunction, classify, preset
from .volume import (
    DescriptorError,
    FormatError,
    VolumeDataset,
    VolumeDescriptor,
    gradient,
    load_raw,
    sample_trilinear,
)

__all__ = [
    "__version__",
    "AttenuationBuffer",
    "Camera",
    "ClassifiedSample",
    "CompositingState",
    "ConeKernel",
    "DescriptorError",
    "FormatError",
    "Light",
    "LightCamera",
    "PhongParams",
    "RenderSettings",
    "ShadowMatrixInputs",
    "ShellKernel",
    "SlicePolygon",
    "SliceStackSpec",
    "TransferFunction",
    "VolumeDataset",
    "VolumeDescriptor",
    "build_attenuation_buffer",
    "classify",
    "composite_back_to_front",
    "composite_front_to_back",
    "cone_project",
    "gradient",
    "load_raw",
    "lookup_light",
    "make_slice_stack",
    "preset",
    "render",
    "rodrigues_rotate",
    "sample_trilinear",
    "shade_cone",
    "shade_phong",
    "shade_sbrc_shadow",
    "shade_shell",
    "shadow_oracle",
    "slice_index",
    "slice_polygon",
    "sum_extinction",
    "world_to_light_uv",
]
