"""``slingloiter`` command-line front end.

Exit codes: 0 ok, 2 config/schema error, 3 degenerate geometry, 4 slack cable,
5 simulation diverged.
"""

import argparse
import itertools
import logging
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analysis, io
from .collinearity import persistent_change_check, zseries_from
from .config import parse_config, read_config
from .errors import ConfigError, DegenerateGeometry, Diverged, SlackCable
from .grasp import count_hamiltonian_cycles
from .io import SchemaError
from .planner import EPS_FEAS, feasibility_three, plane_margins, time_grid
from .simulator import run as run_sim

log = logging.getLogger("slingloiter")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_SLACK = 4
EXIT_DIVERGED = 5

VERDICT_SINGLE = "non-stop impossible (single cable: trivial nullspace)"
VERDICT_PAIR = "non-stop impossible (two cables: internal force along one fixed line)"
VERDICT_FEASIBLE = "non-stop possible (every cable force clears its internal-force plane)"
VERDICT_BLOCKED = "non-stop not guaranteed (a cable force lies in its internal-force plane)"


def analyze(rc):
    gs = rc.grasp
    n = rc.n
    margins = None
    if n == 1:
        feasible, verdict = False, VERDICT_SINGLE
    elif n == 2:
        feasible, verdict = False, VERDICT_PAIR
    else:
        margins = feasibility_three(gs, rc.load, rc.g) if n == 3 else plane_margins(gs, rc.load, rc.g)
        feasible = bool(np.all(margins > EPS_FEAS))
        verdict = VERDICT_FEASIBLE if feasible else VERDICT_BLOCKED
    return {
        "n": n,
        "grasp_rank": int(gs.rank),
        "nullity": int(gs.nullity),
        "pairs": [[i + 1, j + 1] for i, j in gs.pairs],
        "pairwise_rank": int(gs.pair_rank),
        "hamiltonian_cycles": count_hamiltonian_cycles(n) if n >= 3 else None,
        "feasibility_margins": None if margins is None else [float(x) for x in margins],
        "feasible": feasible,
        "verdict": verdict,
    }


def plan_report(rc):
    """Sample the plan on the configured grid and analyse it."""
    fp = rc.force_plan
    p = fp.sample(time_grid(rc.duration, rc.dt))
    deg = (analysis.detect_degenerate(p.lam_dot, p.pairs, t=p.t, traj=rc.traj)
           if p.t.size >= 10 else analysis.DegenerateFlags())
    rep = analysis.min_speed(p, rc.v_min, refine_with=fp, degenerate=deg)
    zs = persistent_change_check(p, rc.z_min)
    return p, io.report_dict(rep, zs, "plan", p.t.size, p.t, p.pairs)


def simulate(rc):
    series = run_sim(rc.sim_config())
    deg = analysis.detect_degenerate(series.lam_dot, series.pairs, t=series.t, traj=rc.traj)
    pe = analysis.pose_error(series, series.p_target, series.R_target)
    rep = analysis.min_speed(series, rc.v_min, degenerate=deg, pose_error=pe)
    zs = zseries_from(series.t, io.sim_z(series, rc.load.anchors), rc.z_min)
    return series, io.report_dict(rep, zs, "simulation", series.t.size, series.t, series.pairs)


def verify(csv_path, v_min, z_min, target=None):
    s = io.read_series_csv(csv_path)
    if s.t.size < 10:
        raise SchemaError("verification needs at least 10 samples")
    deg = analysis.detect_degenerate(s.lam_dot, s.pairs, t=s.t)
    pe = None
    if target is not None:
        from .geometry import rpy_to_matrix

        R_series = np.array([rpy_to_matrix(*r) for r in s.rpy])
        pe = analysis.pose_error(_Poses(s.p_L, R_series), *target)
    rep = analysis.min_speed(s, v_min, degenerate=deg, pose_error=pe)
    zs = zseries_from(s.t, s.z, z_min)
    report = io.report_dict(rep, zs, "csv", s.t.size, s.t, s.pairs)
    ok = report["nonstop"] and report["persistent_change"] and not deg
    return {"verdict": "pass" if ok else "fail", "report": report}


class _Poses:
    def __init__(self, p_L, R_L):
        self.p_L = p_L
        self.R_L = R_L


# --- sweep ------------------------------------------------------------------

_AXIS_RE = re.compile(r"^(lambda0|amplitude|frequency|phase)(\d+)=(.+)$")


def parse_axis(spec, m):
    """``phase2=0:0.1:3.14`` -> ("phase", 1, values). Indices in the spec are 1-based."""
    mt = _AXIS_RE.match(spec.strip())
    if not mt:
        raise ConfigError(f"malformed --vary {spec!r}; expected e.g. phase2=0:0.1:3.14")
    key, idx, rng = mt.group(1), int(mt.group(2)), mt.group(3)
    if not 1 <= idx <= m:
        raise ConfigError(f"--vary {key}{idx}: index must be within 1..{m}")
    parts = rng.split(":")
    try:
        nums = [float(x) for x in parts]
    except ValueError as exc:
        raise ConfigError(f"malformed range in --vary {spec!r}") from exc
    if len(nums) == 1:
        values = np.array(nums)
    elif len(nums) == 3:
        start, step, stop = nums
        if step <= 0 or stop < start:
            raise ConfigError(f"--vary {spec!r} describes an empty axis")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = start + step * np.arange(count)
    else:
        raise ConfigError(f"malformed range in --vary {spec!r}")
    return key, idx - 1, values


def _sweep_point(raw, overrides, dt, duration):
    rc = parse_config(raw).with_overrides(dt=dt, duration=duration)
    arrays = {}
    for key, idx, val in overrides:
        arr = np.array(arrays.get(key, getattr(rc.traj, key)), dtype=float)
        arr[idx] = val
        arrays[key] = arr
    rc = rc.with_lambda(**arrays)
    try:
        _, rep = plan_report(rc)
    except SlackCable:
        return {"status": "slack", "min_speed": [float("nan")] * rc.n, "nonstop": False,
                "case1": 0, "case2": 0}
    return {"status": "ok", "min_speed": rep["min_speed"], "nonstop": rep["nonstop"],
            "case1": len(rep["degenerate"]["case1"]), "case2": len(rep["degenerate"]["case2"])}


def sweep(rc, axes, jobs=1):
    """Evaluate the plan on the product grid of ``axes``; returns (header, rows)."""
    if not 1 <= len(axes) <= 2:
        raise ConfigError("sweep takes one or two --vary axes")
    names = [f"{k}{i + 1}" for k, i, _ in axes]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate --vary axis")
    points = list(itertools.product(*[v for _, _, v in axes]))
    tasks = [[(k, i, float(val)) for (k, i, _), val in zip(axes, pt)] for pt in points]
    args = [(rc.raw, tk, rc.dt, rc.duration) for tk in tasks]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_star, args))
    else:
        results = [_sweep_point(*a) for a in args]
    header = names + ["min_speed"] + [f"min_speed{i + 1}" for i in range(rc.n)]
    header += ["nonstop", "case1", "case2", "status"]
    rows = []
    for pt, res in zip(points, results):
        ms = res["min_speed"]
        rows.append(list(pt) + [float(np.min(ms))] + list(ms)
                    + [int(res["nonstop"]), res["case1"], res["case2"], res["status"]])
    return header, rows


def _sweep_star(a):
    return _sweep_point(*a)


def _rows_text(header, rows):
    def fmt(v):
        if isinstance(v, str):
            return v
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            return str(v)
        return io.FLOAT_FMT % v

    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# --- entry point ------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="slingloiter", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required,
                        help="run config JSON path or built-in name (e.g. ref-n3)")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--dt", type=float, help="time step override (s)")
        sp.add_argument("--duration", type=float, help="horizon override (s)")
        sp.add_argument("--v-min", type=float, help="carrier speed floor (m/s)")
        sp.add_argument("--z-min", type=float, help="direction-change threshold")

    common(sub.add_parser("analyze", help="grasp rank, nullity and feasibility"))
    common(sub.add_parser("plan", help="sample internal-force plan, write CSV + summary"))
    common(sub.add_parser("simulate", help="closed-loop simulation, write CSV + summary"))
    vp = sub.add_parser("verify", help="re-check a stored series CSV")
    common(vp, config_required=False)
    vp.add_argument("--csv", required=True, help="series CSV written by plan or simulate")
    sp = sub.add_parser("sweep", help="plan over a grid of internal-force parameters")
    common(sp)
    sp.add_argument("--vary", action="append", default=[], metavar="KEYi=START:STEP:STOP")
    sp.add_argument("--jobs", type=int, default=1)
    return p


def _emit(obj, out, name):
    text = io.dumps(obj)
    if out:
        io.atomic_write_text(os.path.join(out, name), text)
    sys.stdout.write(text)


def _load(args):
    rc = read_config(args.config)
    return rc.with_overrides(dt=args.dt, duration=args.duration, v_min=args.v_min,
                             z_min=args.z_min)


def _dispatch(args):
    if args.command == "analyze":
        _emit(analyze(_load(args)), args.out, "analyze.json")
    elif args.command == "plan":
        rc = _load(args)
        p, rep = plan_report(rc)
        if args.out:
            io.write_plan_csv(os.path.join(args.out, "plan.csv"), p)
        _emit(rep, args.out, "plan_summary.json")
    elif args.command == "simulate":
        rc = _load(args)
        series, rep = simulate(rc)
        if args.out:
            io.write_sim_csv(os.path.join(args.out, "sim.csv"), series, rc.load.anchors)
        _emit(rep, args.out, "sim_summary.json")
    elif args.command == "verify":
        target = None
        v_min = 0.05 if args.v_min is None else args.v_min
        z_min = 1e-6 if args.z_min is None else args.z_min
        if args.config:
            rc = _load(args)
            v_min, z_min = rc.v_min, rc.z_min
            target = (rc.grasp.position, rc.grasp.attitude)
        _emit(verify(args.csv, v_min, z_min, target), args.out, "verify.json")
    elif args.command == "sweep":
        rc = _load(args)
        axes = [parse_axis(s, rc.traj.m) for s in args.vary]
        header, rows = sweep(rc, axes, jobs=max(1, args.jobs))
        text = _rows_text(header, rows)
        if args.out:
            io.atomic_write_text(os.path.join(args.out, "sweep.csv"), text)
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (ConfigError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateGeometry as exc:
        print(f"degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except SlackCable as exc:
        print(f"slack cable: {exc}", file=sys.stderr)
        return EXIT_SLACK
    except Diverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
