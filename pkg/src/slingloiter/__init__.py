"""Non-stop internal-force planning for cable-suspended loads carried by moving carriers."""

from ._accel import BACKEND, HAVE_NUMBA
from .analysis import DegenerateFlags, NonStopReport, detect_degenerate, min_speed, pose_error
from .collinearity import ZSeries, persistent_change_check, z_value
from .config import RunConfig, read_config
from .errors import (
    CoincidentAnchors,
    ConfigError,
    DegenerateGeometry,
    DegenerateGeometryWarning,
    Diverged,
    DimensionMismatch,
    SlackCable,
    SlingLoiterError,
    TooFewCables,
)
from .grasp import GraspSystem, LoadModel, build_grasp, hamiltonian_pairs, pairwise_nullspace
from .planner import CableModel, ForcePlan, LambdaTrajectory, PlannedTrajectory, plan, time_grid
from .simulator import CarrierModel, SimConfig, SimSeries, SimState, run

__version__ = "0.1.0"
