"""CSV time series and JSON summaries.

CSV layout (one row per sample, 17 significant digits)::

    t, pL_x, pL_y, pL_z, roll, pitch, yaw,
    per carrier i: pR{i}_x, pR{i}_y, pR{i}_z, vR{i}_x, vR{i}_y, vR{i}_z, speed{i}, T{i},
    per internal force (a, b): lambda_{a}_{b} ..., then lambda_dot_{a}_{b} ...,
    per carrier i: z{i}

Carrier and pair indices in files are 1-based. Angles are radians.
"""

import csv
import json
import os
import re
import tempfile
from dataclasses import dataclass

import numpy as np

from .collinearity import z_value
from .errors import SlingLoiterError
from .geometry import matrix_to_rpy

FLOAT_FMT = "%.17g"
MAX_LISTED_INSTANTS = 100


class SchemaError(SlingLoiterError, ValueError):
    pass


def csv_header(n, pairs):
    cols = ["t", "pL_x", "pL_y", "pL_z", "roll", "pitch", "yaw"]
    for i in range(1, n + 1):
        cols += [f"pR{i}_{a}" for a in "xyz"] + [f"vR{i}_{a}" for a in "xyz"]
        cols += [f"speed{i}", f"T{i}"]
    cols += [f"lambda_{i + 1}_{j + 1}" for i, j in pairs]
    cols += [f"lambda_dot_{i + 1}_{j + 1}" for i, j in pairs]
    cols += [f"z{i}" for i in range(1, n + 1)]
    return cols


def atomic_write_text(path, text):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _table_text(header, table):
    lines = [",".join(header)]
    for row in table:
        lines.append(",".join(FLOAT_FMT % v for v in row))
    return "\n".join(lines) + "\n"


def plan_table(plan):
    K, n = plan.T.shape
    rpy = matrix_to_rpy(plan.R_L)
    z = z_value(plan.f, plan.f_dot)
    speeds = plan.speeds
    blocks = [plan.t[:, None], np.tile(plan.p_L, (K, 1)), np.tile(rpy, (K, 1))]
    for i in range(n):
        blocks += [plan.p_R[:, i], plan.v_R[:, i], speeds[:, i, None], plan.T[:, i, None]]
    blocks += [plan.lam, plan.lam_dot, z]
    return np.hstack(blocks)


def sim_forces(series, anchors):
    """Actual cable forces on the load, (K, n, 3), from recorded tensions and geometry."""
    anchor_w = series.p_L[:, None, :] + np.einsum("kab,ib->kia", series.R_L, anchors)
    d = series.p_R - anchor_w
    return series.tension[..., None] * d / np.linalg.norm(d, axis=2, keepdims=True)


def sim_z(series, anchors):
    f = sim_forces(series, anchors)
    f_dot = np.gradient(f, series.t, axis=0)
    return z_value(f, f_dot)


def sim_table(series, anchors):
    K, n = series.tension.shape
    speeds = series.speeds
    blocks = [series.t[:, None], series.p_L, matrix_to_rpy(series.R_L)]
    for i in range(n):
        blocks += [series.p_R[:, i], series.v_R[:, i], speeds[:, i, None],
                   series.tension[:, i, None]]
    blocks += [series.lam, series.lam_dot, sim_z(series, anchors)]
    return np.hstack(blocks)


def write_plan_csv(path, plan):
    atomic_write_text(path, _table_text(csv_header(plan.n, plan.pairs), plan_table(plan)))


def write_sim_csv(path, series, anchors):
    atomic_write_text(path, _table_text(csv_header(series.n, series.pairs),
                                        sim_table(series, anchors)))


@dataclass(frozen=True)
class CsvSeries:
    """A series read back from CSV; duck-types the fields the analysis needs."""

    t: np.ndarray
    p_L: np.ndarray
    rpy: np.ndarray
    p_R: np.ndarray
    v_R: np.ndarray
    speed: np.ndarray
    T: np.ndarray
    lam: np.ndarray
    lam_dot: np.ndarray
    z: np.ndarray
    pairs: list

    @property
    def n(self):
        return self.p_R.shape[1]


_LAMBDA_RE = re.compile(r"^lambda_(\d+)_(\d+)$")


def read_series_csv(path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError("empty CSV")
    header = [h.strip() for h in rows[0]]
    n = sum(1 for h in header if re.fullmatch(r"speed\d+", h))
    pairs = []
    for h in header:
        mt = _LAMBDA_RE.match(h)
        if mt:
            pairs.append((int(mt.group(1)) - 1, int(mt.group(2)) - 1))
    if n < 1 or header != csv_header(n, pairs):
        raise SchemaError("CSV header does not match the series schema")
    body = rows[1:]
    if not body:
        raise SchemaError("CSV has a header but no samples")
    width = len(header)
    for r, row in enumerate(body, start=2):
        if len(row) != width:
            raise SchemaError(f"row {r} has {len(row)} fields, expected {width}")
    try:
        data = np.array(body, dtype=float)
    except ValueError as exc:
        raise SchemaError(f"non-numeric field: {exc}") from exc
    if not np.all(np.isfinite(data)):
        raise SchemaError("non-finite values in CSV")
    if np.any(np.diff(data[:, 0]) <= 0):
        raise SchemaError("time column is not strictly increasing")

    m = len(pairs)
    K = data.shape[0]
    col = 7
    p_R = np.empty((K, n, 3))
    v_R = np.empty((K, n, 3))
    speed = np.empty((K, n))
    T = np.empty((K, n))
    for i in range(n):
        p_R[:, i] = data[:, col:col + 3]
        v_R[:, i] = data[:, col + 3:col + 6]
        speed[:, i] = data[:, col + 6]
        T[:, i] = data[:, col + 7]
        col += 8
    lam = data[:, col:col + m]
    lam_dot = data[:, col + m:col + 2 * m]
    z = data[:, col + 2 * m:col + 2 * m + n]
    return CsvSeries(t=data[:, 0], p_L=data[:, 1:4], rpy=data[:, 4:7], p_R=p_R, v_R=v_R,
                     speed=speed, T=T, lam=lam, lam_dot=lam_dot, z=z, pairs=pairs)


def _floats(a):
    return [float(x) for x in np.atleast_1d(a)]


def _pair_label(pairs, k):
    i, j = pairs[k]
    return [i + 1, j + 1]


def report_dict(report, zs, source, samples, t, pairs):
    """JSON-ready dict with a fixed key set for every command."""
    deg = report.degenerate
    case1 = [{"lambdas": [_pair_label(pairs, f.lambdas[0]), _pair_label(pairs, f.lambdas[1])],
              "cable": f.cable + 1, "ratio": float(f.ratio),
              "window": [float(f.window[0]), float(f.window[1])]} for f in deg.case1]
    case2 = [{"lambdas": [_pair_label(pairs, f.lambdas[0]), _pair_label(pairs, f.lambdas[1])],
              "cable": f.cable + 1, "count": int(f.instants.size),
              "instants": _floats(f.instants[:MAX_LISTED_INSTANTS])} for f in deg.case2]
    pose = None
    if report.pose_error is not None:
        pose = {"position": float(report.pose_error[0]),
                "attitude_deg": float(np.degrees(report.pose_error[1]))}
    return {
        "source": source,
        "n": int(report.min_speed.size),
        "m": len(pairs),
        "pairs": [[i + 1, j + 1] for i, j in pairs],
        "samples": int(samples),
        "t_start": float(t[0]),
        "t_end": float(t[-1]),
        "v_min": report.v_min,
        "min_speed": _floats(report.min_speed),
        "argmin_time": _floats(report.argmin_time),
        "refined_min_speed": None if report.refined_min_speed is None
        else _floats(report.refined_min_speed),
        "min_tension": _floats(report.min_tension),
        "nonstop": bool(report.verdict),
        "z_threshold": float(zs.threshold),
        "z_min": _floats(zs.z_min),
        "z_argmin_time": _floats(zs.argmin_t),
        "persistent_change": bool(zs.verdict),
        "degenerate": {"case1": case1, "case2": case2},
        "pose_error": pose,
    }


REPORT_KEYS = (
    "source", "n", "m", "pairs", "samples", "t_start", "t_end", "v_min", "min_speed",
    "argmin_time", "refined_min_speed", "min_tension", "nonstop", "z_threshold", "z_min",
    "z_argmin_time", "persistent_change", "degenerate", "pose_error",
)


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def write_json(path, obj):
    atomic_write_text(path, dumps(obj))
