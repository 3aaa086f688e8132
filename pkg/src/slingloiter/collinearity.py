"""Scalar tests for whether a cable force keeps changing direction.

For a cable force y and its rate y_dot, the direction of y changes at an
instant exactly when y_dot is not parallel to y. Two equivalent measures are
provided: the product-of-norms gap ``|y_dot| |y| - |y_dot . y|`` and its
squared Lagrange-identity form ``|y|^2 |y_dot|^2 - (y . y_dot)^2``.
"""

from dataclasses import dataclass

import numpy as np

DEFAULT_ZMIN = 1e-6


def z_value(y, y_dot):
    """Product-of-norms gap; broadcasts over leading axes."""
    y = np.asarray(y, dtype=float)
    y_dot = np.asarray(y_dot, dtype=float)
    nn = np.linalg.norm(y, axis=-1) * np.linalg.norm(y_dot, axis=-1)
    dot = np.abs(np.sum(y * y_dot, axis=-1))
    # rounding can push the difference a few ulps below zero
    return np.maximum(nn - dot, 0.0)


def z_squared(y, y_dot):
    """``|y x y_dot|^2``, the Lagrange-identity form of the gap."""
    c = np.cross(np.asarray(y, dtype=float), np.asarray(y_dot, dtype=float))
    return np.sum(c * c, axis=-1)


@dataclass(frozen=True)
class ZSeries:
    t: np.ndarray
    z: np.ndarray  # (K, n)
    z_min: np.ndarray  # (n,)
    argmin_t: np.ndarray  # (n,)
    threshold: float
    verdict: bool


def persistent_change_check(plan, zmin=DEFAULT_ZMIN):
    """Evaluate z for every cable over a planned trajectory.

    The verdict is true when every cable's minimum z over the grid exceeds
    ``zmin``.
    """
    if plan.t.size == 0:
        raise ValueError("empty plan")
    z = z_value(plan.f, plan.f_dot)
    return zseries_from(plan.t, z, zmin)


def zseries_from(t, z, zmin=DEFAULT_ZMIN):
    z = np.asarray(z, dtype=float)
    k = np.argmin(z, axis=0)
    z_min = z[k, np.arange(z.shape[1])]
    return ZSeries(
        t=np.asarray(t),
        z=z,
        z_min=z_min,
        argmin_t=np.asarray(t)[k],
        threshold=zmin,
        verdict=bool(np.all(z_min > zmin)),
    )
