from __future__ import annotations

import numpy as np
import pytest

from slicecast.volume import (
    DescriptorError,
    FormatError,
    VolumeDataset,
    VolumeDescriptor,
    gradient,
    gradient_many,
    load_raw,
    sample_trilinear,
    sample_trilinear_many,
)


def write_raw(tmp_path, payload: bytes, name="vol.raw"):
    path = tmp_path / name
    path.write_bytes(payload)
    return path


class TestLoadRaw:
    def test_zero_u8(self, tmp_path):
        path = write_raw(tmp_path, bytes(8))
        v = load_raw(path, VolumeDescriptor(dims=(2, 2, 2), scalar_type="u8"))
        assert np.all(v.data == 0.0)
        assert v.value_range == (0.0, 0.0)

    def test_index_order_x_fastest(self, tmp_path):
        # voxel (x,y,z) lives at flat index x + nx*(y + ny*z)
        path = write_raw(tmp_path, bytes(range(8)))
        v = load_raw(path, VolumeDescriptor(dims=(2, 2, 2), scalar_type="u8"))
        assert v.voxel(1, 1, 1) == pytest.approx(7 / 255)
        assert v.voxel(1, 0, 0) == pytest.approx(1 / 255)
        assert v.voxel(0, 1, 0) == pytest.approx(2 / 255)
        assert v.voxel(0, 0, 1) == pytest.approx(4 / 255)

    def test_engine_sized_file(self, tmp_path):
        n = 256
        path = write_raw(tmp_path, bytes(n * n * n))
        v = load_raw(path, VolumeDescriptor(dims=(n, n, n), scalar_type="u8"))
        assert v.data.size == 16_777_216

    def test_u16_normalization(self, tmp_path):
        payload = np.array([0, 32768, 65535, 100] * 2, dtype="<u2").tobytes()
        v = load_raw(write_raw(tmp_path, payload), VolumeDescriptor(dims=(2, 2, 2), scalar_type="u16"))
        assert v.voxel(0, 0, 0) == 0.0
        assert v.voxel(0, 1, 0) == pytest.approx(1.0)
        assert v.value_range == (0.0, 65535.0)

    def test_f32_minmax_normalization(self, tmp_path):
        vals = np.array([-2.0, 0.0, 2.0, 1.0, -1.0, 0.5, -0.5, 2.0], dtype="<f4")
        v = load_raw(write_raw(tmp_path, vals.tobytes()), VolumeDescriptor(dims=(2, 2, 2), scalar_type="f32"))
        assert v.value_range == (-2.0, 2.0)
        assert v.data.min() == 0.0 and v.data.max() == 1.0
        assert v.voxel(1, 0, 0) == pytest.approx(0.5)

    def test_size_mismatch(self, tmp_path):
        path = write_raw(tmp_path, bytes(7))
        with pytest.raises(DescriptorError):
            load_raw(path, VolumeDescriptor(dims=(2, 2, 2), scalar_type="u8"))

    def test_unsupported_scalar_type(self, tmp_path):
        path = write_raw(tmp_path, bytes(8))
        with pytest.raises(FormatError):
            load_raw(path, VolumeDescriptor(dims=(2, 2, 2), scalar_type="f64"))

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(OSError):
            load_raw(tmp_path / "missing.raw", VolumeDescriptor(dims=(2, 2, 2), scalar_type="u8"))

    def test_descriptor_json_roundtrip(self, tmp_path):
        desc = VolumeDescriptor(dims=(4, 5, 6), scalar_type="u16", spacing=(1.0, 1.0, 2.0))
        p = tmp_path / "d.json"
        p.write_text(desc.to_json())
        assert VolumeDescriptor.from_json(p) == desc

    def test_malformed_descriptor(self, tmp_path):
        p = tmp_path / "d.json"
        p.write_text('{"dims": [4, 4], "scalar_type": "u8"}')
        with pytest.raises(DescriptorError):
            VolumeDescriptor.from_json(p)

    def test_dims_too_small(self):
        with pytest.raises(DescriptorError):
            VolumeDataset.from_array(np.zeros((1, 4, 4), dtype=np.float32))


class TestAnisotropicBox:
    def test_longest_axis_spans_unit(self):
        v = VolumeDataset.from_array(np.zeros((4, 8, 16), dtype=np.float32))  # nx=16 longest
        assert np.allclose(v.box_lo, [0.0, 0.25, 0.375])
        assert np.allclose(v.box_hi, [1.0, 0.75, 0.625])

    def test_spacing_scales_extent(self):
        v = VolumeDataset.from_array(np.zeros((4, 4, 4), dtype=np.float32), spacing=(1.0, 2.0, 1.0))
        assert np.allclose(v.box_hi - v.box_lo, [0.5, 1.0, 0.5])


class TestSampleTrilinear:
    def test_constant_field(self):
        v = VolumeDataset.from_array(np.full((4, 4, 4), 0.5, dtype=np.float32))
        for p in [(0.5, 0.5, 0.5), (0.1, 0.9, 0.3), (0.0, 0.0, 0.0)]:
            assert sample_trilinear(v, p) == pytest.approx(0.5)

    def test_voxel_center_round_trip(self):
        # Power-of-two dims keep the center coordinates binary-exact, so the
        # interpolation weights collapse to exactly 0/1.
        rng = np.random.default_rng(1)
        v = VolumeDataset.from_array(rng.random((4, 8, 16)).astype(np.float32))
        for x, y, z in [(0, 0, 0), (15, 7, 3), (9, 2, 1), (1, 4, 2)]:
            p = v.voxel_center(x, y, z)
            assert sample_trilinear(v, p) == v.voxel(x, y, z)

    def test_voxel_center_round_trip_odd_dims(self):
        rng = np.random.default_rng(1)
        v = VolumeDataset.from_array(rng.random((5, 6, 7)).astype(np.float32))
        for x, y, z in [(0, 0, 0), (6, 5, 4), (3, 2, 1), (1, 4, 2)]:
            p = v.voxel_center(x, y, z)
            assert sample_trilinear(v, p) == pytest.approx(v.voxel(x, y, z), abs=1e-12)

    def test_cube_center_is_corner_mean(self):
        rng = np.random.default_rng(2)
        corners = rng.random((2, 2, 2)).astype(np.float32)
        v = VolumeDataset.from_array(corners)
        expected = float(corners.astype(np.float64).mean())  # eight equal weights
        assert sample_trilinear(v, (0.5, 0.5, 0.5)) == pytest.approx(expected, abs=1e-12)

    def test_outside_cube_is_zero(self):
        v = VolumeDataset.from_array(np.ones((4, 4, 4), dtype=np.float32))
        assert sample_trilinear(v, (1.2, 0.5, 0.5)) == 0.0
        assert sample_trilinear(v, (0.5, -0.01, 0.5)) == 0.0

    def test_clamp_to_edge_inside_cube(self):
        data = np.zeros((4, 4, 4), dtype=np.float32)
        data[:, :, 0] = 1.0  # x = 0 voxel plane
        v = VolumeDataset.from_array(data)
        # Between the cube face and the first voxel-center plane the value clamps.
        assert sample_trilinear(v, (0.0, 0.5, 0.5)) == pytest.approx(1.0)
        assert sample_trilinear(v, (0.05, 0.5, 0.5)) == pytest.approx(1.0)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(3)
        v = VolumeDataset.from_array(rng.random((6, 6, 6)).astype(np.float32))
        pts = rng.uniform(-0.1, 1.1, size=(50, 3))
        many = sample_trilinear_many(v, pts)
        for p, expected in zip(pts, many):
            assert sample_trilinear(v, p) == expected


class TestGradient:
    def test_constant_volume(self):
        v = VolumeDataset.from_array(np.full((8, 8, 8), 0.3, dtype=np.float32))
        assert np.allclose(gradient(v, (0.5, 0.5, 0.5)), 0.0)

    def test_linear_field_matches_analytic(self):
        n = 16
        x = (np.arange(n) + 0.5) / n
        data = np.broadcast_to(x, (n, n, n)).astype(np.float32)  # f = x
        v = VolumeDataset.from_array(data)
        rng = np.random.default_rng(4)
        pts = rng.uniform(2.0 / n, 1.0 - 2.0 / n, size=(20, 3))
        grads = gradient_many(v, pts)
        assert np.allclose(grads, [1.0, 0.0, 0.0], atol=1e-6)

    def test_linear_field_against_fd_oracle(self):
        # Independent check: tiny-step central differences on the sampler.
        n = 16
        x = (np.arange(n) + 0.5) / n
        v = VolumeDataset.from_array(np.broadcast_to(x, (n, n, n)).astype(np.float32))
        p = np.array([0.43, 0.51, 0.62])
        eps = 1e-5
        oracle = np.array([
            (sample_trilinear(v, p + e) - sample_trilinear(v, p - e)) / (2 * eps)
            for e in np.eye(3) * eps
        ])
        assert np.allclose(gradient(v, p), oracle, atol=1e-6)

    def test_boundary_is_finite(self):
        rng = np.random.default_rng(5)
        v = VolumeDataset.from_array(rng.random((8, 8, 8)).astype(np.float32))
        for p in [(0.0, 0.5, 0.5), (1.0, 1.0, 1.0), (0.5, 0.0, 1.0)]:
            g = gradient(v, p)
            assert np.all(np.isfinite(g))
