"""Run configuration: JSON file -> validated model objects."""

import json
from dataclasses import dataclass, replace
from importlib import resources

import jsonschema
import numpy as np

from .errors import ConfigError
from .geometry import rpy_to_matrix
from .grasp import GraspSystem, LoadModel
from .planner import GRAVITY, CableModel, ForcePlan, LambdaTrajectory
from .simulator import CarrierModel, SimConfig

BUILTIN = ("ref-n1", "ref-n2", "ref-n3", "ref-case1", "ref-case2")


def schema():
    text = resources.files("slingloiter").joinpath("schema/run_config.schema.json").read_text()
    return json.loads(text)


def builtin_path(name):
    return resources.files("slingloiter").joinpath(f"configs/{name}.json")


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    load: LoadModel
    cables: CableModel
    carriers: list
    feedforward: bool
    grasp: GraspSystem
    traj: LambdaTrajectory
    dt: float
    duration: float
    v_min: float
    z_min: float
    g: float = GRAVITY

    @property
    def n(self):
        return self.load.n

    @property
    def force_plan(self):
        return ForcePlan(self.grasp, self.traj, self.cables, g=self.g)

    def sim_config(self):
        return SimConfig(self.load, self.cables, self.carriers, self.force_plan,
                         dt=self.dt, duration=self.duration,
                         feedforward=self.feedforward, g=self.g)

    def with_overrides(self, dt=None, duration=None, v_min=None, z_min=None):
        changes = {k: float(v) for k, v in
                   (("dt", dt), ("duration", duration), ("v_min", v_min), ("z_min", z_min))
                   if v is not None}
        return replace(self, **changes)

    def with_lambda(self, **arrays):
        """Copy with some internal-force parameter arrays replaced."""
        tr = self.traj
        fields = {k: getattr(tr, k) for k in ("lambda0", "amplitude", "frequency", "phase")}
        fields.update({k: np.asarray(v, float) for k, v in arrays.items()})
        return replace(self, traj=LambdaTrajectory(lower=tr.lower, upper=tr.upper, **fields))


def read_config(path):
    """Load a config from a path, or a built-in name such as ``ref-n3``."""
    p = str(path)
    try:
        if p in BUILTIN:
            text = builtin_path(p).read_text()
        else:
            with open(p) as fh:
                text = fh.read()
        raw = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(raw)


def parse_config(raw):
    try:
        jsonschema.validate(raw, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc

    ld = raw["load"]
    anchors = np.asarray(ld["anchors"], dtype=float)
    n = anchors.shape[0]
    try:
        load = LoadModel(
            mass=ld["mass"], inertia=np.asarray(ld["inertia_diag"], float), anchors=anchors,
            linear_friction=ld.get("friction_lin", 0.0),
            angular_friction=ld.get("friction_rot", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"load: {exc}") from exc

    length = raw["cables"]["length"]
    lengths = np.full(n, float(length)) if np.isscalar(length) else np.asarray(length, float)
    if lengths.shape != (n,):
        raise ConfigError(f"cables.length has {lengths.size} entries for {n} anchors")
    cables = CableModel(lengths, float(raw["cables"]["stiffness"]))

    cr = raw["carriers"]
    carriers = [CarrierModel(mass=cr["mass"], kd=cr["kd"], kp=cr["kp"]) for _ in range(n)]

    eq = raw["equilibrium"]
    R = rpy_to_matrix(*np.radians(eq["attitude_rpy"]))
    seed = raw.get("grasp", {}).get("hamiltonian_seed", 0)
    gs = GraspSystem.at_equilibrium(load, R, np.asarray(eq["position"], float), seed=seed)

    lam = raw["lambda"]
    m = len(gs.pairs)
    for key in ("lambda0", "amplitude", "frequency", "phase"):
        if len(lam[key]) != m:
            raise ConfigError(f"lambda.{key} has {len(lam[key])} entries, expected {m} for {n} cables")
    lo, hi = lam.get("bounds", [None, None])
    try:
        traj = LambdaTrajectory(
            lam["lambda0"], lam["amplitude"], lam["frequency"], lam["phase"],
            lower=-np.inf if lo is None else float(lo),
            upper=np.inf if hi is None else float(hi),
        )
    except ValueError as exc:
        raise ConfigError(f"lambda: {exc}") from exc

    dt = float(raw["sim"]["dt"])
    duration = float(raw["sim"]["duration"])
    if duration < dt:
        raise ConfigError("sim.duration must be at least sim.dt")
    vf = raw["verify"]
    return RunConfig(
        raw=raw, load=load, cables=cables, carriers=carriers,
        feedforward=bool(cr.get("feedforward", True)), grasp=gs, traj=traj,
        dt=dt, duration=duration, v_min=float(vf["v_min"]), z_min=float(vf.get("z_min", 1e-6)),
        g=float(raw.get("gravity", GRAVITY)),
    )
