import json
import math

import numpy as np
import pytest

from trichokin import cli
from trichokin.harness import (
    ScenarioRunError,
    emit_outputs,
    format_csv,
    format_table,
    run_scenario,
    run_sweep,
    trajectory_csv,
)
from trichokin.kinetics import State
from trichokin.scenarios import (
    BUILTIN_SCENARIOS,
    BUILTIN_SWEEPS,
    ScenarioError,
    SweepSpec,
    load_scenario,
    load_sweep,
    scenario_from_dict,
    with_override,
)

VALIDATION_2_YAML = """\
name: v2-file
growth: {kind: monod, mu_max: 0.2, k_s: 35.55}
params: {K_H: 0.176, alpha: 0.2, k_d: 0.048, Y_Bs: 1.19, inv_Y_Ps: 0.2, m_s: 0.0047, m_P: 0.002}
initial: {X: 17, B: 5, s: 9.5, P: 1.5}
"""


@pytest.fixture(scope="module")
def v2():
    return run_scenario(BUILTIN_SCENARIOS["validation-2"])


# -- scenarios ---------------------------------------------------------------

def test_yaml_scenario_matches_builtin(tmp_path):
    f = tmp_path / "v2.yaml"
    f.write_text(VALIDATION_2_YAML)
    sc = load_scenario(str(f))
    ref = BUILTIN_SCENARIOS["validation-2"]
    assert sc.name == "v2-file"
    assert sc.params == ref.params and sc.initial == ref.initial


def test_yaml_base_override(tmp_path):
    f = tmp_path / "o.yaml"
    f.write_text("base: validation-1\nparams: {k_d: 0.03}\ninitial: {X: 90}\nconfig: {h: 0.02}\n")
    sc = load_scenario(str(f))
    assert sc.name == "o"
    assert sc.params.k_d == 0.03 and sc.params.alpha == 0.2
    assert sc.initial == State(90, 15, 50, 0)
    assert sc.simulation_config().h == 0.02


@pytest.mark.parametrize(
    "doc, match",
    [
        ({"base": "nope"}, "unknown base"),
        ({"growth": {"kind": "tessier"}}, "unknown growth law"),
        ({"base": "validation-1", "params": {"alpha": 1.5}}, "alpha"),
        ({"base": "validation-1", "params": {"bogus": 1}}, "malformed"),
        ({"base": "validation-1", "initial": {"B": -1}}, "B"),
        ({"base": "validation-1", "config": {"dt": 1}}, "unknown config"),
        ("just a string", "mapping"),
    ],
)
def test_bad_scenarios(doc, match):
    with pytest.raises((ScenarioError, ValueError), match=match):
        scenario_from_dict(doc)


def test_missing_file_is_scenario_error():
    with pytest.raises(ScenarioError, match="no such file"):
        load_scenario("/nonexistent/file.yaml")


def test_with_override_paths():
    base = BUILTIN_SCENARIOS["validation-1"]
    assert with_override(base, "initial.X", 90).initial.X == 90
    assert with_override(base, "params.k_d", 0.03).params.k_d == 0.03
    assert with_override(base, "growth.mu_max", 0.2).params.growth.mu_max == 0.2
    assert with_override(base, "params.growth.k_s", 3.0).params.growth.k_s == 3.0
    assert with_override(base, "config.h", 0.05).config == {"h": 0.05}
    assert base.params.k_d == 0.048  # original untouched
    for bad in ("initial.Q", "params.nope", "growth.nope", "foo", "config.initial"):
        with pytest.raises(ScenarioError):
            with_override(base, bad, 1.0)
    with pytest.raises(ScenarioError, match="k_d"):
        with_override(base, "params.k_d", -1.0)


def test_yaml_sweep(tmp_path):
    f = tmp_path / "sw.yaml"
    f.write_text("base: kd-base\nsweep:\n  parameter: params.k_d\n  values: [0.09, 0.03]\n")
    spec = load_sweep(str(f))
    names = [s.name for s in spec.scenarios()]
    assert names == ["sw[params.k_d=0.09]", "sw[params.k_d=0.03]"]
    (tmp_path / "bad.yaml").write_text("base: kd-base\n")
    with pytest.raises(ScenarioError, match="sweep"):
        load_sweep(str(tmp_path / "bad.yaml"))


# -- runs --------------------------------------------------------------------

def test_validation_2_golden(v2):
    sm = v2.summary
    # frozen from a reference run at h=0.01; RK4 is deterministic
    assert sm.s_star == pytest.approx(2.9096020877268858, rel=1e-9)
    assert sm.p_star == pytest.approx(9.59772232628078, rel=1e-9)
    assert sm.B_max == pytest.approx(9.643440376886577, rel=1e-9)
    assert sm.s_max == pytest.approx(20.835429045832907, rel=1e-9)
    assert sm.t_final == pytest.approx(765.83)
    assert sm.steady_state_reached and sm.closure_ok and sm.bound_ok and sm.in_attractor
    assert sm.hypothesis_warnings == ("Y_Bs=1.19 violates 0<Y_Bs<1", "Y_Ps=5 violates 0<Y_Ps<1")


def test_validation_2_shape(v2):
    traj = v2.trajectory
    # biomass rises then decays; substrate rises from hydrolysis before being consumed
    iB = int(np.argmax(traj.B))
    assert 0 < iB < len(traj) - 1
    assert traj.B[iB] > traj.B[0] and traj.B[-1] < 1e-9
    assert np.all(np.diff(traj.P) >= 0)
    assert traj.s.max() > traj.s[0] > traj.s[-1]


def test_no_biomass_summary():
    sm = run_scenario(BUILTIN_SCENARIOS["no-biomass"]).summary
    assert sm.p_star == 0.0 and sm.B_max == 0.0
    assert sm.s_star == pytest.approx(95.0, rel=1e-9)
    assert sm.p_star_predicted == pytest.approx(0.0, abs=1e-9)
    assert sm.int_B == 0.0


def test_summary_dict_is_json_ready(v2):
    d = v2.summary.to_dict()
    assert "lambda" in d and "lambda_" not in d
    assert list(d).index("lambda") == list(d).index("closure_rel_err") + 1
    json.dumps(d, allow_nan=False)


def test_unbounded_lambda_serialises_as_null():
    sc = with_override(BUILTIN_SCENARIOS["validation-1"], "params.k_d", 0.2)
    d = run_scenario(sc, t_end=50.0).summary.to_dict()
    assert d["lambda"] is None
    json.dumps(d, allow_nan=False)


def test_run_error_carries_scenario_name():
    with pytest.raises(ScenarioRunError, match="validation-1") as info:
        run_scenario(BUILTIN_SCENARIOS["validation-1"], h=20.0)
    assert info.value.scenario == "validation-1"


def test_sweep_order_with_workers():
    spec = BUILTIN_SWEEPS["kd-sweep"]
    serial = run_sweep(spec, t_end=100.0)
    parallel = run_sweep(spec, jobs=2, t_end=100.0)
    assert [r.label for r in parallel] == ["kd=0.03", "kd=0.09", "kd=0.12", "kd=0.18"]
    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a.result.trajectory.states, b.result.trajectory.states)


def test_sweep_records_per_value_failure():
    spec = SweepSpec(BUILTIN_SCENARIOS["validation-1"], "config.h", (0.05, 20.0), ("ok", "huge-step"))
    rows = run_sweep(spec, t_end=100.0)
    assert rows[0].error is None and rows[0].result is not None
    assert rows[1].result is None and "huge-step" in rows[1].error


# -- output ------------------------------------------------------------------

def test_emit_outputs_deterministic(tmp_path, v2):
    a, b = tmp_path / "a", tmp_path / "b"
    fa = emit_outputs([v2], a, with_z=True)
    fb = emit_outputs([run_scenario(BUILTIN_SCENARIOS["validation-2"])], b, with_z=True)
    assert [p.name for p in fa] == ["validation-2.csv", "summary.json", "summary.txt"]
    for pa, pb in zip(fa, fb):
        assert pa.read_bytes() == pb.read_bytes()
    data = np.loadtxt(a / "validation-2.csv", delimiter=",", skiprows=1)
    assert (a / "validation-2.csv").read_text().splitlines()[0] == "t,X,B,s,P,Z"
    assert np.all(np.diff(data[:, 5]) <= 1e-9)
    assert json.loads((a / "summary.json").read_text())["validation-2"]["closure_ok"] is True


def test_emit_outputs_errors(tmp_path, v2):
    with pytest.raises(ValueError):
        emit_outputs([], tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="cannot write"):
        emit_outputs([v2], blocker / "sub")


def test_text_formats(v2):
    table = format_table([v2.summary])
    assert table.splitlines()[0].split()[:3] == ["name", "s_star", "p_star"]
    assert "warning [validation-2]" in table
    csv = format_csv([v2.summary]).splitlines()
    assert len(csv) == 2 and csv[0].split(",")[0] == "name"
    assert trajectory_csv(v2).splitlines()[0] == "t,X,B,s,P"


# -- CLI ---------------------------------------------------------------------

def test_cli_run_json(capsys):
    assert cli.main(["run", "validation-2", "--format", "json"]) == cli.EXIT_OK
    d = json.loads(capsys.readouterr().out)["validation-2"]
    for key in ("s_star", "p_star", "p_star_predicted", "lambda", "s_star_upper_bound", "t_converged"):
        assert key in d


def test_cli_sweep_writes_files(tmp_path, capsys):
    rc = cli.main(["sweep", "x0-sweep", "--horizon", "50", "--out", str(tmp_path), "--format", "csv"])
    assert rc == cli.EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 5
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "X0=180.csv", "X0=360.csv", "X0=45.csv", "X0=90.csv", "summary.json", "summary.txt",
    ]


def test_cli_list(capsys):
    assert cli.main(["--list-scenarios"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "validation-1" in out and "kd-sweep" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "no-such-scenario"],
        ["run", "validation-1", "--step", "20"],
        ["run", "validation-1", "--step", "-1"],
        [],
    ],
)
def test_cli_invalid(argv, capsys):
    assert cli.main(argv) == cli.EXIT_INVALID


def test_cli_io_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    rc = cli.main(["run", "validation-1", "--horizon", "10", "--out", str(blocker / "x")])
    assert rc == cli.EXIT_IO
    assert "I/O error" in capsys.readouterr().err
