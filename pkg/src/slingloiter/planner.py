"""Internal-force trajectories and the carrier motions they induce.

At a static load equilibrium the stacked cable forces are
``f(t) = G_pinv @ W + N @ lam(t)``; each cable force gives a tension and a
direction, and the carrier sits one cable length along that direction from its
anchor.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._accel import BACKEND
from .errors import DegenerateGeometry, DimensionMismatch, SlackCable
from .grasp import anchors_collinear

GRAVITY = 9.81
EPS_TENSION = 1e-6  # N
EPS_FEAS = 1e-6  # N
DEFAULT_PHASE_SEPARATION = 0.3  # rad


def static_wrench(load, g=GRAVITY):
    """Wrench the cables must supply to hold the load still."""
    return np.array([0.0, 0.0, load.mass * g, 0.0, 0.0, 0.0])


def distribute_forces(gs, W, lam, basis="pair"):
    N = gs.basis(basis)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (N.shape[1],):
        raise DimensionMismatch(
            f"lambda has {lam.size} entries, the {basis} basis has {N.shape[1]} columns"
        )
    return gs.G_pinv @ np.asarray(W, dtype=float) + N @ lam


def force_rate(gs, lam_dot, basis="pair"):
    N = gs.basis(basis)
    lam_dot = np.atleast_1d(np.asarray(lam_dot, dtype=float))
    if lam_dot.shape != (N.shape[1],):
        raise DimensionMismatch(
            f"lambda_dot has {lam_dot.size} entries, the {basis} basis has {N.shape[1]} columns"
        )
    return N @ lam_dot


def cable_state(f_i, eps=EPS_TENSION):
    """Split a cable force into tension and unit direction (anchor -> carrier)."""
    f_i = np.asarray(f_i, dtype=float)
    T = float(np.linalg.norm(f_i))
    if T <= eps:
        raise SlackCable(f"cable force norm {T:.3g} N is not above {eps} N")
    return T, f_i / T


def q_rate(f_i, f_dot_i, eps=EPS_TENSION):
    """Tension rate and direction rate from a cable force and its derivative."""
    T, q = cable_state(f_i, eps)
    f_dot_i = np.asarray(f_dot_i, dtype=float)
    T_dot = float(q @ f_dot_i)
    q_dot = (f_dot_i - q * T_dot) / T
    return T_dot, q_dot


def carrier_pose(p_L, R_L, load, q_i, L_i, i):
    return np.asarray(p_L, float) + np.asarray(R_L, float) @ load.anchors[i] + np.asarray(q_i) * L_i


def carrier_velocity_static(q_dot_i, L_i):
    return L_i * np.asarray(q_dot_i, dtype=float)


@dataclass(frozen=True)
class LambdaTrajectory:
    """lam_k(t) = lambda0_k + amplitude_k * cos(frequency_k * t + phase_k)."""

    lambda0: np.ndarray
    amplitude: np.ndarray
    frequency: np.ndarray
    phase: np.ndarray
    lower: float = -np.inf
    upper: float = np.inf

    def __post_init__(self):
        arrs = [np.atleast_1d(np.asarray(a, dtype=float)) for a in
                (self.lambda0, self.amplitude, self.frequency, self.phase)]
        m = arrs[0].shape[0]
        for name, a in zip(("lambda0", "amplitude", "frequency", "phase"), arrs):
            if a.ndim != 1 or a.shape[0] != m:
                raise DimensionMismatch(f"{name} must have {m} entries")
            object.__setattr__(self, name, a)
        if np.any(self.amplitude < 0) or not np.all(np.isfinite(self.amplitude)):
            raise ValueError("amplitudes must be finite and non-negative")
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")
        if np.any(self.lambda0 < self.lower) or np.any(self.lambda0 > self.upper):
            raise ValueError("initial internal forces lie outside the bounds")

    @classmethod
    def uniform(cls, m, lambda0, amplitude, frequency, phases, **bounds):
        """Same lambda0/amplitude/frequency for every component."""
        return cls(np.full(m, float(lambda0)), np.full(m, float(amplitude)),
                   np.full(m, float(frequency)), np.asarray(phases, float), **bounds)

    @property
    def m(self):
        return self.lambda0.shape[0]

    def packed(self):
        return np.vstack([self.lambda0, self.amplitude, self.frequency, self.phase])

    def __call__(self, t):
        """Values and rates; scalar t gives (m,) arrays, array t gives (K, m)."""
        arg = np.multiply.outer(t, self.frequency) + self.phase
        lam = self.lambda0 + self.amplitude * np.cos(arg)
        lam_dot = -self.amplitude * self.frequency * np.sin(arg)
        return lam, lam_dot

    def peak(self):
        """Upper bound on |lam_k(t)| over all t."""
        return np.abs(self.lambda0) + self.amplitude

    def within_bounds(self):
        return bool(np.all(self.lambda0 - self.amplitude >= self.lower)
                    and np.all(self.lambda0 + self.amplitude <= self.upper))

    def is_phase_separated(self, min_separation=DEFAULT_PHASE_SEPARATION):
        """Equal positive frequencies and pairwise phase gaps of at least ``min_separation``."""
        if self.m < 2:
            return False
        if not np.allclose(self.frequency, self.frequency[0]) or self.frequency[0] <= 0:
            return False
        if np.any(self.amplitude <= 0):
            return False
        gaps = np.abs(self.phase[:, None] - self.phase[None, :])
        return bool(np.all(gaps[np.triu_indices(self.m, 1)] >= min_separation))


def lambda_eval(traj, t):
    return traj(t)


@dataclass(frozen=True)
class CableModel:
    lengths: np.ndarray
    stiffness: float = np.inf

    def __post_init__(self):
        L = np.atleast_1d(np.asarray(self.lengths, dtype=float))
        object.__setattr__(self, "lengths", L)
        if np.any(L <= 0):
            raise ValueError("cable lengths must be positive")
        if not self.stiffness > 0:
            raise ValueError("cable stiffness must be positive")

    @classmethod
    def uniform(cls, n, length, stiffness=np.inf):
        return cls(np.full(n, float(length)), stiffness)

    @property
    def n(self):
        return self.lengths.shape[0]


def feasibility_three(gs, load, g=GRAVITY):
    """Per-cable distance (N) of the gravity-balancing force from its internal-force plane.

    A positive margin for every cable is the hypothesis under which three
    phase-separated cosine internal forces keep all carriers moving.
    """
    if gs.n != 3:
        raise DegenerateGeometry(f"margin is defined for 3 cables, got {gs.n}")
    return plane_margins(gs, load, g)


def plane_margins(gs, load, g=GRAVITY):
    """Margins for any pair set in which every cable appears exactly twice."""
    if anchors_collinear(load.anchors):
        raise DegenerateGeometry("anchors are collinear; internal-force planes degenerate")
    f0 = (gs.G_pinv @ static_wrench(load, g)).reshape(gs.n, 3)
    out = np.empty(gs.n)
    for i, (u, v) in enumerate(gs.planes()):
        normal = np.cross(u, v)
        nn = np.linalg.norm(normal)
        if nn <= 1e-12:
            raise DegenerateGeometry(f"internal-force directions at cable {i} are parallel")
        out[i] = abs(normal @ f0[i]) / nn
    return out


@dataclass(frozen=True)
class PlannedTrajectory:
    """Sampled plan. Arrays are indexed [sample, cable, xyz] or [sample, component]."""

    t: np.ndarray
    lam: np.ndarray
    lam_dot: np.ndarray
    f: np.ndarray
    f_dot: np.ndarray
    T: np.ndarray
    T_dot: np.ndarray
    q: np.ndarray
    q_dot: np.ndarray
    p_R: np.ndarray
    v_R: np.ndarray
    p_L: np.ndarray
    R_L: np.ndarray
    pairs: list = field(default_factory=list)

    @property
    def n(self):
        return self.f.shape[1]

    @property
    def speeds(self):
        return np.linalg.norm(self.v_R, axis=2)


@dataclass(frozen=True)
class ForcePlan:
    """Everything needed to evaluate the plan at any time, not just on a grid."""

    gs: object
    traj: LambdaTrajectory
    cables: CableModel
    g: float = GRAVITY
    basis: str = "pair"

    def __post_init__(self):
        N = self.gs.basis(self.basis)
        if self.traj.m != N.shape[1]:
            raise DimensionMismatch(
                f"trajectory has {self.traj.m} components, basis has {N.shape[1]} columns"
            )
        if self.cables.n != self.gs.n:
            raise DimensionMismatch(f"{self.cables.n} cables for {self.gs.n} anchors")

    @property
    def f0(self):
        return self.gs.G_pinv @ static_wrench(self.gs.load, self.g)

    @property
    def N(self):
        return self.gs.basis(self.basis)

    @property
    def anchors_world(self):
        """Equilibrium anchor positions in the world frame, (n, 3)."""
        return self.gs.position + self.gs.load.anchors @ self.gs.attitude.T

    def kernel_args(self):
        return (np.ascontiguousarray(self.f0), np.ascontiguousarray(self.N, dtype=float),
                np.ascontiguousarray(self.traj.packed()), np.ascontiguousarray(self.anchors_world))

    def sample(self, t_grid, backend=None):
        backend = backend or BACKEND
        t = np.ascontiguousarray(np.atleast_1d(np.asarray(t_grid, dtype=float)))
        f0, N, lp, anchors_eq = self.kernel_args()
        kern = _kernels.plan_nb if backend == "numba" else _kernels.plan_np
        # tension is checked on the direct force evaluation before any division
        f = f0 + self.traj(t)[0] @ N.T
        T = np.linalg.norm(f.reshape(len(t), self.gs.n, 3), axis=2)
        bad = np.argwhere(T <= EPS_TENSION)
        if bad.size:
            k, i = bad[0]
            raise SlackCable(
                f"cable {i + 1} tension {T[k, i]:.3g} N at t = {t[k]:.6g} s",
                cable=int(i), time=float(t[k]),
            )
        out = kern(t, f0, N, lp, anchors_eq, self.cables.lengths)
        lam, lam_dot, f, f_dot, T, T_dot, q, q_dot, p_R, v_R = out
        return PlannedTrajectory(
            t=t, lam=lam, lam_dot=lam_dot, f=f, f_dot=f_dot, T=T, T_dot=T_dot,
            q=q, q_dot=q_dot, p_R=p_R, v_R=v_R,
            p_L=self.gs.position.copy(), R_L=self.gs.attitude.copy(),
            pairs=list(self.gs.pairs),
        )

    def speeds_at(self, t):
        """Carrier speeds (n,) at a single time, evaluated analytically."""
        return self.sample(np.array([float(t)])).speeds[0]


def time_grid(duration, dt):
    """Uniform grid 0, dt, ..., including ``duration`` when it is a multiple of dt."""
    if dt <= 0 or duration < 0:
        raise ValueError("need dt > 0 and duration >= 0")
    steps = int(round(duration / dt))
    if abs(steps * dt - duration) > 1e-9 * max(1.0, duration):
        steps = int(np.floor(duration / dt))
    return np.arange(steps + 1) * dt


def plan(gs, load, cables, traj, t_grid, g=GRAVITY, basis="pair"):
    """Sample the full force/kinematics chain on ``t_grid``."""
    if load is not gs.load and not np.array_equal(load.anchors, gs.load.anchors):
        raise DimensionMismatch("load does not match the grasp system")
    return ForcePlan(gs, traj, cables, g=g, basis=basis).sample(t_grid)
