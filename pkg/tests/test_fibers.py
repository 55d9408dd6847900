import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paramsens.fibers import (
    CHARACTERISTICS,
    Fiber,
    ModelError,
    ParameterDescriptor,
    bounding_box,
    build_result,
    derive_characteristics,
    read_fiber_csv,
    validate_vector,
    write_fiber_csv,
)
from tests.conftest import straight_fiber


def random_fiber(rng, n_vertices=4):
    # random polyline with distinct consecutive vertices
    steps = rng.uniform(-1, 1, size=(n_vertices - 1, 3))
    steps[np.linalg.norm(steps, axis=1) < 1e-3] += 0.5
    verts = np.concatenate([[rng.uniform(-5, 5, 3)], steps]).cumsum(axis=0)
    return Fiber(0, verts, float(rng.uniform(0.1, 2.0)))


class TestDescriptors:
    def test_range(self):
        d = ParameterDescriptor("a", 0.0, 2.0)
        assert d.span == 2.0

    def test_invalid_range(self):
        with pytest.raises(ModelError):
            ParameterDescriptor("a", 1.0, 1.0)

    def test_vector_validation(self):
        descs = (ParameterDescriptor("a", 0, 1), ParameterDescriptor("b", -1, 1))
        assert validate_vector((0.5, 0.0), descs) == (0.5, 0.0)
        with pytest.raises(ModelError):
            validate_vector((1.5, 0.0), descs)
        with pytest.raises(ModelError):
            validate_vector((0.5,), descs)


class TestCharacteristics:
    def test_axis_aligned_straight_fiber(self):
        c = derive_characteristics(straight_fiber())
        assert c["StraightLength"] == pytest.approx(10.0)
        assert c["CurvedLength"] == pytest.approx(10.0)
        assert c["Diameter"] == pytest.approx(2.0)
        assert c["OrientationTheta"] == pytest.approx(0.0)

    def test_right_angle_polyline(self):
        f = Fiber(0, np.array([[0.0, 0, 0], [3, 0, 0], [3, 4, 0]]), 1.0)
        c = derive_characteristics(f)
        assert c["CurvedLength"] == pytest.approx(7.0)
        assert c["StraightLength"] == pytest.approx(5.0)

    def test_cylinder_volume_and_surface(self):
        # r=1, arclength 10: closed-form tube formulas
        c = derive_characteristics(straight_fiber())
        assert c["Volume"] == pytest.approx(math.pi * 100 / 10, rel=1e-9)  # pi*1*10
        assert c["Volume"] == pytest.approx(31.4159, abs=1e-4)
        assert c["SurfaceArea"] == pytest.approx(62.8319, abs=1e-4)

    def test_theta_folded_to_upper_hemisphere(self):
        down = straight_fiber(end=(0.0, 0.0, -10.0))
        c = derive_characteristics(down)
        assert 0.0 <= c["OrientationTheta"] <= 90.0
        assert c["OrientationTheta"] == pytest.approx(0.0)

    def test_theta_45_degrees(self):
        f = straight_fiber(end=(10.0, 0.0, 10.0))
        assert derive_characteristics(f)["OrientationTheta"] == pytest.approx(45.0)

    def test_degenerate_rejected(self):
        with pytest.raises(ModelError):
            Fiber(0, np.array([[1.0, 1, 1], [1, 1, 1]]), 1.0)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_curved_at_least_straight(self, seed):
        f = random_fiber(np.random.default_rng(seed))
        c = derive_characteristics(f)
        assert c["CurvedLength"] >= c["StraightLength"] - 1e-12

    @given(st.integers(0, 10_000))
    @settings(max_examples=20, deadline=None)
    def test_translation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        f = random_fiber(rng)
        shift = rng.uniform(-100, 100, 3)
        g = Fiber(0, f.vertices + shift, f.radius)
        a, b = derive_characteristics(f), derive_characteristics(g)
        for name in CHARACTERISTICS:
            assert a[name] == pytest.approx(b[name], abs=1e-8)

    @given(st.integers(0, 10_000))
    @settings(max_examples=20, deadline=None)
    def test_rotation_leaves_sizes_unchanged(self, seed):
        rng = np.random.default_rng(seed)
        f = random_fiber(rng)
        # random rotation via QR
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        g = Fiber(0, f.vertices @ q.T, f.radius)
        a, b = derive_characteristics(f), derive_characteristics(g)
        for name in ("StraightLength", "CurvedLength", "Diameter", "Volume", "SurfaceArea"):
            assert a[name] == pytest.approx(b[name], rel=1e-9)


class TestBoundingBox:
    def test_inflated_by_radius(self):
        box = bounding_box(straight_fiber())
        assert np.allclose(box, [[-1, -1, -1], [1, 1, 11]])

    def test_diagonal_contains_inflated_endpoints(self):
        f = Fiber(0, np.array([[0.0, 0, 0], [5, 6, 7]]), 0.5)
        box = bounding_box(f)
        assert (box[0] <= -0.5).all()
        assert (box[1] >= np.array([5.5, 6.5, 7.5])).all()

    def test_contains_sampled_tube_points(self):
        # point-sampling oracle: >= 10^3 random points of the tube are inside
        rng = np.random.default_rng(7)
        f = random_fiber(rng, n_vertices=5)
        box = bounding_box(f)
        v = f.vertices
        seg = rng.integers(0, len(v) - 1, size=1500)
        t = rng.random(1500)[:, None]
        axis_points = v[seg] + t * (v[seg + 1] - v[seg])
        offsets = rng.normal(size=(1500, 3))
        offsets /= np.linalg.norm(offsets, axis=1)[:, None]
        pts = axis_points + offsets * (rng.random(1500)[:, None] * f.radius)
        assert (pts >= box[0] - 1e-12).all() and (pts <= box[1] + 1e-12).all()


class TestFiberCsv:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        result = build_result(7, [random_fiber(rng) for _ in range(5)])
        # distinct ids
        result = build_result(
            7, [Fiber(i, f.vertices, f.radius) for i, f in enumerate(result.fibers)]
        )
        path = tmp_path / "r.csv"
        write_fiber_csv(path, result)
        loaded = read_fiber_csv(path, result_id=7)
        assert loaded.fiber_ids == result.fiber_ids
        for a, b in zip(result.fibers, loaded.fibers):
            assert np.array_equal(a.vertices, b.vertices)
            assert a.radius == b.radius
        assert np.array_equal(loaded.characteristics, result.characteristics)

    def test_rejects_varying_radius(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "fiber_id,vertex_index,x,y,z,radius\n"
            "0,0,0.0,0.0,0.0,1.0\n"
            "0,1,0.0,0.0,5.0,2.0\n"
        )
        with pytest.raises(ModelError, match="radius"):
            read_fiber_csv(path)

    def test_rejects_degenerate_fiber(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "fiber_id,vertex_index,x,y,z,radius\n"
            "0,0,1.0,1.0,1.0,1.0\n"
            "0,1,1.0,1.0,1.0,1.0\n"
        )
        with pytest.raises(ModelError):
            read_fiber_csv(path)

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,x,y,z\n")
        with pytest.raises(ModelError, match="header"):
            read_fiber_csv(path)
