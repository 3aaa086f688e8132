import json

import numpy as np
import pytest

from slingloiter import io
from slingloiter.config import BUILTIN, builtin_path, parse_config, read_config
from slingloiter.errors import ConfigError
from slingloiter.planner import time_grid


@pytest.mark.parametrize("name", BUILTIN)
def test_builtins_parse(name):
    rc = read_config(name)
    assert rc.traj.m == len(rc.grasp.pairs)


def _raw(name="ref-n3"):
    return json.loads(builtin_path(name).read_text())


@pytest.mark.parametrize("mutate", [
    lambda r: r.pop("verify"),
    lambda r: r["load"].update(mass=-1),
    lambda r: r.update(extra=1),
    lambda r: r["lambda"].update(phase=[0, 1]),
    lambda r: r["cables"].update(length=[1, 1]),
    lambda r: r["sim"].update(duration=1e-5),
])
def test_bad_configs(mutate):
    raw = _raw()
    mutate(raw)
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_overrides(n3):
    rc = n3.with_overrides(dt=0.01, v_min=0.1)
    assert (rc.dt, rc.v_min, rc.duration) == (0.01, 0.1, n3.duration)
    rc = n3.with_lambda(phase=[0, 0, 0])
    np.testing.assert_array_equal(rc.traj.phase, 0.0)
    np.testing.assert_array_equal(rc.traj.frequency, n3.traj.frequency)


def test_csv_roundtrip(tmp_path, n3):
    p = n3.force_plan.sample(time_grid(1.0, 0.01))
    path = tmp_path / "plan.csv"
    io.write_plan_csv(path, p)
    s = io.read_series_csv(path)
    np.testing.assert_array_equal(s.t, p.t)
    np.testing.assert_array_equal(s.v_R, p.v_R)
    np.testing.assert_array_equal(s.lam_dot, p.lam_dot)
    assert s.pairs == p.pairs
    assert not list(tmp_path.glob(".tmp-*"))


@pytest.mark.parametrize("body,msg", [
    ("", "empty"),
    ("t,x\n0,1\n", "header"),
    (None, "fields"),
    (None, "non-numeric"),
    (None, "increasing"),
    (None, "non-finite"),
])
def test_csv_schema_errors(tmp_path, body, msg):
    header = ",".join(io.csv_header(1, []))
    width = len(io.csv_header(1, []))
    row = ",".join(["0"] * width)
    row1 = ",".join(["1"] + ["0"] * (width - 1))
    if body is None:
        body = {
            "fields": f"{header}\n{row},0\n",
            "non-numeric": f"{header}\n{row[:-1]}x\n",
            "increasing": f"{header}\n{row1}\n{row}\n",
            "non-finite": f"{header}\n{row[:-1]}nan\n",
        }[msg]
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(io.SchemaError, match=msg):
        io.read_series_csv(path)


def test_report_keys_fixed(n3):
    from slingloiter.cli import plan_report

    _, rep = plan_report(n3.with_overrides(duration=1.0))
    assert tuple(rep) == io.REPORT_KEYS
    json.dumps(rep)
