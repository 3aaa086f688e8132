import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from slingloiter.errors import CoincidentAnchors
from slingloiter.geometry import (
    is_rotation, matrix_to_rpy, orthonormalize, rotation_angle, rpy_to_matrix, skew,
    so3_exp, so3_log, unit_between, vee,
)

from .conftest import random_rotation

vec3 = arrays(np.float64, 3, elements=st.floats(-10, 10, allow_nan=False))


@given(vec3, vec3)
def test_skew_matches_cross(a, b):
    np.testing.assert_allclose(skew(a) @ b, np.cross(a, b), atol=1e-12)
    np.testing.assert_array_equal(vee(skew(a)), a)


@settings(max_examples=200)
@given(arrays(np.float64, 3, elements=st.floats(-3.0, 3.0, allow_nan=False)))
def test_exp_log_roundtrip(w):
    R = so3_exp(w)
    assert is_rotation(R)
    if np.linalg.norm(w) < np.pi - 1e-3:
        np.testing.assert_allclose(so3_log(R), w, atol=1e-9)


def test_exp_small_angle_branch():
    w = np.array([1e-10, -2e-10, 3e-10])
    np.testing.assert_allclose(so3_exp(w), np.eye(3) + skew(w), atol=1e-18)


def test_exp_matches_rodrigues_about_z():
    th = 0.7
    c, s = np.cos(th), np.sin(th)
    np.testing.assert_allclose(so3_exp([0, 0, th]), [[c, -s, 0], [s, c, 0], [0, 0, 1]], atol=1e-15)


def test_orthonormalize_recovers_rotation(rng):
    R = random_rotation(rng)
    noisy = R + 1e-6 * rng.normal(size=(3, 3))
    Q = orthonormalize(noisy)
    assert is_rotation(Q, tol=1e-12)
    assert rotation_angle(Q, R) < 1e-5


def test_is_rotation_rejects():
    assert not is_rotation(np.diag([1.0, 1.0, -1.0]))
    assert not is_rotation(np.eye(2))
    assert not is_rotation(2 * np.eye(3))


def test_rotation_angle_small_and_large():
    assert rotation_angle(np.eye(3), so3_exp([0, 1e-9, 0])) == pytest.approx(1e-9, rel=1e-6)
    assert rotation_angle(np.eye(3), so3_exp([0, 0, 2.5])) == pytest.approx(2.5)


def test_rpy_convention():
    roll, pitch, yaw = 0.1, -0.2, 0.3
    Rx = so3_exp([roll, 0, 0])
    Ry = so3_exp([0, pitch, 0])
    Rz = so3_exp([0, 0, yaw])
    np.testing.assert_allclose(rpy_to_matrix(roll, pitch, yaw), Rz @ Ry @ Rx, atol=1e-15)
    np.testing.assert_allclose(matrix_to_rpy(Rz @ Ry @ Rx), [roll, pitch, yaw], atol=1e-14)


def test_unit_between():
    np.testing.assert_allclose(unit_between([1, 0, 0], [0, 0, 0]), [1, 0, 0])
    with pytest.raises(CoincidentAnchors):
        unit_between([1, 2, 3], [1, 2, 3 + 1e-12])
