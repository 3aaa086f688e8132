"""SO(3) and small-vector helpers.

Vectors are ``(3,)`` float arrays and rotations are ``(3, 3)`` matrices; no
wrapper classes.
"""

import numpy as np
from scipy.spatial.transform import Rotation as _ScipyRotation

from .errors import CoincidentAnchors

EPS_GEOM = 1e-9  # m, anchors closer than this are treated as coincident

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def skew(v):
    """Return S(v) such that ``skew(v) @ w == np.cross(v, w)``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(M):
    return np.array([M[2, 1], M[0, 2], M[1, 0]])


def so3_exp(w):
    """Rodrigues formula for exp(S(w))."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w)
    K = skew(w)
    if theta < 1e-8:
        # second-order Taylor; error O(theta^3) is below double precision here
        return np.eye(3) + K + 0.5 * (K @ K)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * K + b * (K @ K)


def so3_log(R):
    """Inverse of :func:`so3_exp` for rotation angles in [0, pi)."""
    c = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(c)
    if theta < 1e-8:
        return vee(R - R.T) / 2.0
    return theta / (2.0 * np.sin(theta)) * vee(R - R.T)


def orthonormalize(R):
    """Closest rotation matrix in the Frobenius sense (polar factor)."""
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0.0:
        U[:, -1] *= -1.0
        Q = U @ Vt
    return Q


def is_rotation(R, tol=1e-9):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return bool(
        np.abs(R.T @ R - np.eye(3)).max() <= tol and abs(np.linalg.det(R) - 1.0) <= tol
    )


def rotation_angle(R_a, R_b):
    """Geodesic distance (rad) between two rotations."""
    M = np.asarray(R_a).T @ np.asarray(R_b)
    # atan2 form keeps precision for small angles where arccos does not
    s = np.linalg.norm(vee(M - M.T)) / 2.0
    c = (np.trace(M) - 1.0) / 2.0
    return float(np.arctan2(s, c))


def unit_between(bi, bj, eps=EPS_GEOM):
    """Unit vector pointing from anchor ``bj`` to anchor ``bi``."""
    d = np.asarray(bi, dtype=float) - np.asarray(bj, dtype=float)
    dist = np.linalg.norm(d)
    if dist <= eps:
        raise CoincidentAnchors(f"anchors {bi} and {bj} are within {eps} m")
    return d / dist


def rpy_to_matrix(roll, pitch, yaw):
    """Roll-pitch-yaw (rad) to R = Rz(yaw) Ry(pitch) Rx(roll)."""
    return _ScipyRotation.from_euler("xyz", [roll, pitch, yaw]).as_matrix()


def matrix_to_rpy(R):
    return _ScipyRotation.from_matrix(R).as_euler("xyz")
