"""Closed-loop simulation: rigid load, elastic cables, PD-tracked point-mass carriers.

Carriers track references built from the force plan. Because the simulated
cables stretch, the reference sits at ``anchor + q * (L0 + T / K_c)`` so the
spring supplies the planned tension when tracking is perfect.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._accel import BACKEND
from .errors import DimensionMismatch, Diverged
from .geometry import matrix_to_rpy, skew
from .planner import GRAVITY, ForcePlan

_CABLE_MODES = {"spring": _kernels.CABLE_SPRING, "ideal": _kernels.CABLE_IDEAL,
                "none": _kernels.CABLE_NONE}


@dataclass(frozen=True)
class CarrierModel:
    mass: float = 0.1
    kd: float = 1.5
    kp: float = 1000.0

    def __post_init__(self):
        if not (self.mass > 0 and self.kd > 0 and self.kp > 0):
            raise ValueError("carrier mass and gains must be positive")


@dataclass(frozen=True)
class SimState:
    t: float
    p_L: np.ndarray
    v_L: np.ndarray
    R_L: np.ndarray
    w_L: np.ndarray  # body frame
    p_R: np.ndarray  # (n, 3)
    v_R: np.ndarray  # (n, 3)

    @property
    def n(self):
        return self.p_R.shape[0]

    def flat(self):
        return np.concatenate([self.p_L, self.v_L, self.w_L, self.p_R.ravel(), self.v_R.ravel()])

    @classmethod
    def from_flat(cls, t, x, R):
        n = (x.shape[0] - 9) // 6
        return cls(t=float(t), p_L=x[0:3].copy(), v_L=x[3:6].copy(), R_L=np.array(R, float),
                   w_L=x[6:9].copy(), p_R=x[9:9 + 3 * n].reshape(n, 3).copy(),
                   v_R=x[9 + 3 * n:].reshape(n, 3).copy())


@dataclass(frozen=True)
class StateRate:
    """Time derivative of a :class:`SimState` (``R_L`` holds dR/dt)."""

    p_L: np.ndarray
    v_L: np.ndarray
    R_L: np.ndarray
    w_L: np.ndarray
    p_R: np.ndarray
    v_R: np.ndarray
    tension: np.ndarray


@dataclass(frozen=True)
class SimConfig:
    load: object
    cables: object
    carriers: list
    plan: ForcePlan
    dt: float = 1e-3
    duration: float = 20.0
    feedforward: bool = True
    cable_mode: str = "spring"
    g: float = GRAVITY

    def __post_init__(self):
        n = self.load.n
        if self.cables.n != n or len(self.carriers) != n or self.plan.gs.n != n:
            raise DimensionMismatch("load, cables, carriers and plan disagree on cable count")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.duration < self.dt:
            raise ValueError("duration must be at least one step")
        if self.cable_mode not in _CABLE_MODES:
            raise ValueError(f"cable_mode must be one of {sorted(_CABLE_MODES)}")
        if not np.isfinite(self.cables.stiffness):
            raise ValueError("simulation needs a finite cable stiffness")

    @property
    def n(self):
        return self.load.n

    @property
    def nsteps(self):
        return int(round(self.duration / self.dt))

    def kernel_args(self):
        load = self.load
        cab = np.column_stack([
            self.cables.lengths,
            np.full(self.n, float(self.cables.stiffness)),
            [c.mass for c in self.carriers],
            [c.kp for c in self.carriers],
            [c.kd for c in self.carriers],
        ])
        f0, N, lp, anchors_eq = self.plan.kernel_args()
        return (
            np.array([load.mass, load.linear_friction, load.angular_friction, self.g]),
            np.ascontiguousarray(load.inertia),
            np.ascontiguousarray(np.linalg.inv(load.inertia)),
            np.ascontiguousarray(load.anchors),
            np.ascontiguousarray(cab),
            f0, N, lp, anchors_eq,
            bool(self.feedforward),
            _CABLE_MODES[self.cable_mode],
        )


@dataclass(frozen=True)
class SimSeries:
    t: np.ndarray
    p_L: np.ndarray
    v_L: np.ndarray
    R_L: np.ndarray
    w_L: np.ndarray
    p_R: np.ndarray
    v_R: np.ndarray
    tension: np.ndarray
    lam: np.ndarray
    lam_dot: np.ndarray
    pairs: list = field(default_factory=list)
    p_target: np.ndarray = field(default_factory=lambda: np.zeros(3))
    R_target: np.ndarray = field(default_factory=lambda: np.eye(3))

    @property
    def n(self):
        return self.p_R.shape[1]

    @property
    def speeds(self):
        return np.linalg.norm(self.v_R, axis=2)

    @property
    def rpy(self):
        return matrix_to_rpy(self.R_L)

    def state(self, k):
        return SimState(t=float(self.t[k]), p_L=self.p_L[k], v_L=self.v_L[k], R_L=self.R_L[k],
                        w_L=self.w_L[k], p_R=self.p_R[k], v_R=self.v_R[k])


def spring_cable_force(p_anchor_world, p_R, L0, K_c):
    """Force the cable applies to the load; the carrier feels the negative."""
    d = np.asarray(p_R, float) - np.asarray(p_anchor_world, float)
    dist = np.linalg.norm(d)
    if dist <= L0:
        return np.zeros(3)
    return K_c * (dist - L0) * d / dist


def _kernels_for(backend):
    if backend == "numba":
        return _kernels.rhs_nb, _kernels.rk4_step_nb, _kernels.run_nb
    return _kernels.rhs_np, _kernels.rk4_step_np, _kernels.run_np


def dynamics_rhs(state, config, t=None, backend=None):
    rhs, _, _ = _kernels_for(backend or BACKEND)
    t = state.t if t is None else t
    x = state.flat()
    x_dot, w_world, tension = rhs(float(t), x, np.ascontiguousarray(state.R_L),
                                  *config.kernel_args())
    n = state.n
    return StateRate(
        p_L=x_dot[0:3], v_L=x_dot[3:6], R_L=skew(w_world) @ state.R_L, w_L=x_dot[6:9],
        p_R=x_dot[9:9 + 3 * n].reshape(n, 3), v_R=x_dot[9 + 3 * n:].reshape(n, 3),
        tension=tension,
    )


def step_rk4(state, config, t=None, dt=None, backend=None):
    """Advance one step. Attitude follows the Lie-group (Munthe-Kaas) form of RK4."""
    _, step, _ = _kernels_for(backend or BACKEND)
    t = state.t if t is None else t
    dt = config.dt if dt is None else dt
    if not dt > 0:
        raise ValueError("dt must be positive")
    x_new, R_new = step(float(t), state.flat(), np.ascontiguousarray(state.R_L), float(dt),
                        *config.kernel_args())
    return SimState.from_flat(t + dt, x_new, R_new)


def initial_state(config):
    """Load at its equilibrium pose and carriers on their references at t = 0."""
    gs = config.plan.gs
    f0, N, lp, anchors_eq = config.plan.kernel_args()
    cab = config.kernel_args()[4]
    p_ref, v_ref, _ = _kernels.reference_np(0.0, f0, N, lp, anchors_eq, cab)
    return SimState(t=0.0, p_L=gs.position.copy(), v_L=np.zeros(3), R_L=gs.attitude.copy(),
                    w_L=np.zeros(3), p_R=p_ref, v_R=v_ref)


def run(config, state0=None, backend=None):
    """Integrate from ``state0`` (default: :func:`initial_state`) over the configured horizon."""
    _, _, run_kernel = _kernels_for(backend or BACKEND)
    s0 = initial_state(config) if state0 is None else state0
    nsteps = config.nsteps
    X, Rs, tension, status, last = run_kernel(
        s0.flat(), np.ascontiguousarray(s0.R_L), float(s0.t), float(config.dt), nsteps, *config.kernel_args()
    )
    t = s0.t + np.arange(X.shape[0]) * config.dt
    if status != 0:
        raise Diverged(f"state norm exceeded {_kernels.DIVERGE_LIMIT:g} at t = {t[last]:.6g} s",
                       time=float(t[last]))
    n = config.n
    lam, lam_dot = config.plan.traj(t)
    gs = config.plan.gs
    return SimSeries(
        t=t, p_L=X[:, 0:3], v_L=X[:, 3:6], R_L=Rs, w_L=X[:, 6:9],
        p_R=X[:, 9:9 + 3 * n].reshape(-1, n, 3), v_R=X[:, 9 + 3 * n:].reshape(-1, n, 3),
        tension=tension, lam=lam, lam_dot=lam_dot, pairs=list(gs.pairs),
        p_target=gs.position.copy(), R_target=gs.attitude.copy(),
    )


def rigid_body_energy(state, config):
    """Kinetic energy of the load alone (J)."""
    J = config.load.inertia
    return 0.5 * config.load.mass * state.v_L @ state.v_L + 0.5 * state.w_L @ J @ state.w_L


