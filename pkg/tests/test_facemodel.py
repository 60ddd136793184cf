import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gada.errors import InvalidArgument
from gada.facemodel import (AlignmentParams, FaceModel, generate_synthetic_model, pose_matrix,
                            reconstruct_vertices)
from oracles import dense_reconstruct


def _params(model, rng, scale=10.0):
    return AlignmentParams(pose_matrix(*rng.uniform(-0.3, 0.3, 3), scale=scale),
                           rng.normal(size=model.n_id), rng.normal(size=model.n_exp),
                           rng.uniform(0, 20, 2))


def test_tiny_grid_layout():
    m = generate_synthetic_model(1, 2, 1, 1)
    assert m.n_vertices == 4
    assert len(m.triangles) == 2
    np.testing.assert_array_equal(m.uv_coords, [[0, 0], [0, 1], [1, 0], [1, 1]])


def test_triangle_count_and_index_range():
    m = generate_synthetic_model(3, 7, 2, 2)
    assert len(m.triangles) == 2 * 6 ** 2
    assert m.triangles.min() == 0 and m.triangles.max() == m.n_vertices - 1


def test_deterministic():
    a = generate_synthetic_model(1, 8, 3, 2)
    b = generate_synthetic_model(1, 8, 3, 2)
    for name in ("mean_shape", "basis_id", "basis_exp", "uv_coords", "triangles"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()


def test_basis_columns_have_unit_norm():
    m = generate_synthetic_model(1, 8, 3, 2)
    np.testing.assert_allclose(np.linalg.norm(m.basis_id, axis=0), 1, atol=1e-9)
    np.testing.assert_allclose(np.linalg.norm(m.basis_exp, axis=0), 1, atol=1e-9)


def test_mean_shape_is_front_facing_half_ellipsoid():
    m = generate_synthetic_model(1, 9, 1, 1)
    x, y, z = m.mean_shape.T
    assert np.all(z >= 0)
    np.testing.assert_allclose((x / 1.0) ** 2 + (y / 1.15) ** 2 + (z / 0.8) ** 2, 1, atol=1e-9)
    assert z[4 * 9 + 4] == pytest.approx(0.8)  # grid center bulges furthest


def test_grid_n_below_two_rejected():
    with pytest.raises(InvalidArgument):
        generate_synthetic_model(1, 1, 1, 1)


def test_invariant_violations_rejected():
    m = generate_synthetic_model(1, 3, 1, 1)
    bad_uv = m.uv_coords.copy()
    bad_uv[0, 0] = 1.5
    with pytest.raises(InvalidArgument):
        FaceModel(m.mean_shape, m.basis_id, m.basis_exp, bad_uv, m.triangles)
    bad_tri = m.triangles.copy()
    bad_tri[0, 0] = m.n_vertices
    with pytest.raises(InvalidArgument):
        FaceModel(m.mean_shape, m.basis_id, m.basis_exp, m.uv_coords, bad_tri)


def test_identity_pose_reproduces_mean_shape():
    m = generate_synthetic_model(2, 5, 2, 3)
    p = AlignmentParams(np.eye(3), np.zeros(2), np.zeros(3), np.zeros(2))
    np.testing.assert_array_equal(reconstruct_vertices(m, p), m.mean_shape)


def test_translation_only():
    m = generate_synthetic_model(2, 5, 2, 3)
    p = AlignmentParams(np.eye(3), np.zeros(2), np.zeros(3), [5, 7])
    np.testing.assert_allclose(reconstruct_vertices(m, p) - m.mean_shape,
                               np.tile([5, 7, 0], (m.n_vertices, 1)))


def test_matches_dense_matrix_product_oracle():
    rng = np.random.default_rng(7)
    m = generate_synthetic_model(7, 6, 4, 3)
    p = _params(m, rng)
    ref = dense_reconstruct(m.mean_shape, m.basis_id, m.basis_exp, p.rotation, p.alpha_id,
                            p.alpha_exp, p.t_2d)
    np.testing.assert_allclose(reconstruct_vertices(m, p), ref, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_linear_in_coefficients(seed):
    rng = np.random.default_rng(seed)
    m = generate_synthetic_model(seed, 4, 2, 2)
    p1 = _params(m, rng)
    a2, e2 = rng.normal(size=2), rng.normal(size=2)
    p12 = AlignmentParams(p1.rotation, p1.alpha_id + a2, p1.alpha_exp + e2, p1.t_2d)
    delta = ((m.basis_id @ a2 + m.basis_exp @ e2).reshape(-1, 3)) @ p1.rotation.T
    np.testing.assert_allclose(reconstruct_vertices(m, p12), reconstruct_vertices(m, p1) + delta,
                               atol=1e-9)


def test_dimension_mismatch_rejected():
    m = generate_synthetic_model(1, 3, 2, 2)
    with pytest.raises(InvalidArgument):
        reconstruct_vertices(m, AlignmentParams(np.eye(3), np.zeros(3), np.zeros(2), np.zeros(2)))


def test_pose_matrix_is_scaled_rotation():
    r = pose_matrix(0.3, -0.2, 0.1, scale=4.0)
    np.testing.assert_allclose(r @ r.T, 16 * np.eye(3), atol=1e-12)
    assert np.linalg.det(r) > 0


def test_save_load_round_trip(tmp_path):
    m = generate_synthetic_model(1, 4, 2, 2)
    m.save(tmp_path / "m.tensors")
    back = FaceModel.load(tmp_path / "m.tensors")
    np.testing.assert_array_equal(back.triangles, m.triangles)
    np.testing.assert_allclose(back.mean_shape, m.mean_shape, rtol=1e-6)
    np.testing.assert_array_equal(back.basis_id, m.basis_id.astype(np.float32))


def test_arrays_are_read_only():
    m = generate_synthetic_model(1, 3, 1, 1)
    with pytest.raises(ValueError):
        m.mean_shape[0, 0] = 1.0
