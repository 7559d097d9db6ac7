import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinc_immersion.cli import convergence_study, main, run_scenario
from spinc_immersion.config import ConfigError, config_from_mapping, load_config
from spinc_immersion.expressions import ExpressionError, ScalarField
from spinc_immersion.report import read_csv, report_dict

CONFIGS = __import__("pathlib").Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.mark.parametrize(
    "src,u,v,expected",
    [
        ("0", 0.3, 0.1, 0.0),
        ("2*u - v/4", 1.0, 2.0, 1.5),
        ("sin(u)^2 + cos(u)**2", 0.7, 0.0, 1.0),
        ("-pi*cos(v)", 0.0, 0.0, -np.pi),
        ("(u+1)^-1", 1.0, 0.0, 0.5),
        ("2*u^2 + 1", 3.0, 0.0, 19.0),
    ],
)
def test_expression_values(src, u, v, expected):
    assert ScalarField.parse(src)(np.array(u), np.array(v)) == pytest.approx(expected)


@pytest.mark.parametrize("src", ["exp(u)", "x", "u**0.5", "__import__('os')", "u if v else 1", "u.real", "", "sin(u, v)", "1 +"])
def test_expression_rejects(src):
    with pytest.raises(ExpressionError):
        ScalarField.parse(src)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_expression_derivative(u, v):
    f = ScalarField.parse("sin(u)*v^2")
    assert f.derivative(0)(np.array(u), np.array(v)) == pytest.approx(np.cos(u) * v * v, abs=1e-12)
    assert f.derivative(1)(np.array(u), np.array(v)) == pytest.approx(2 * np.sin(u) * v, abs=1e-12)


def test_config_parsing():
    cfg = config_from_mapping({"kind": "torus_family", "params": {"a": 0.6}, "resolutions": [16, [32, 32]], "A1": ["cos(v)"]})
    assert cfg.resolutions == ((16, 16), (32, 32))
    assert cfg.scenario.A1[1].is_zero
    assert load_config(CONFIGS / "clifford_torus.yaml").gauge_twist.source == "u"


@pytest.mark.parametrize(
    "data,needle",
    [
        ({"kind": "latitude_circle", "params": {"theta0": 0}}, "theta0"),
        ({"kind": "nope"}, "nope"),
        ({}, "kind"),
        ({"kind": "great_circle", "colour": 1}, "colour"),
        ({"kind": "great_circle", "resolution": 4}, "minimum"),
        ({"kind": "clifford_torus", "resolution": [16]}, "2 entries"),
        ({"kind": "great_circle", "A1": ["exp(u)"]}, "A1"),
        ({"kind": "clifford_torus", "eta": ["1", "2"]}, "eta"),
        ({"kind": "great_circle", "tolerances": {"killing_residual": -1}}, "tolerances"),
        ({"kind": "great_circle", "debug": {"zero_q": True}}, "debug"),
        ({"kind": "great_circle", "ratio_window": [5, 3]}, "ratio_window"),
    ],
)
def test_config_errors(data, needle):
    with pytest.raises(ConfigError, match=needle):
        config_from_mapping(data)


def test_run_great_circle_passes(tmp_path):
    cfg = write(tmp_path, "kind: great_circle\nresolution: 128\n")
    assert main(["run", str(cfg), "-o", str(tmp_path / "out"), "-q"]) == 0
    data = json.loads((tmp_path / "out" / "report.json").read_text())
    assert data["pass"] is True
    assert all(c["pass"] for c in data["checks"])
    assert data["schema"] == "spinc-immersion-report" and data["schema_version"] == 1


def test_invalid_parameter_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "kind: latitude_circle\nparams: {theta0: 0}\n")
    assert main(["run", str(cfg), "-o", str(tmp_path / "out")]) == 2
    assert "theta0" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.yaml")]) == 2
    assert main(["run", str(write(tmp_path, "kind: [unclosed\n", "bad.yaml"))]) == 2


def test_zeroed_B_run_fails_and_still_writes(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(CONFIGS / "clifford_torus.yaml"), "-r", "32", "--zero-b", "-o", str(out), "-q"]) == 1
    data = json.loads((out / "report.json").read_text())
    res = next(c for c in data["checks"] if c["name"] == "killing_residual")
    assert res["pass"] is False
    assert data["debug"]["zero_b"] is True


def test_study_requires_doubling(tmp_path):
    cfg = str(CONFIGS / "great_circle.yaml")
    assert main(["study", cfg, "-r", "64", "-o", str(tmp_path)]) == 2
    assert main(["study", cfg, "-r", "32", "-r", "48", "-o", str(tmp_path)]) == 2
    with pytest.raises(ConfigError):
        convergence_study(load_config(CONFIGS / "great_circle.yaml"), [64])


def test_study_torus_family_ratios():
    report, code = convergence_study(load_config(CONFIGS / "torus_family.yaml"), [32, 64, 128])
    assert code == 0
    assert all(3.2 <= r <= 4.8 for r in report.check("killing_residual").ratios)


def test_tolerance_override(tmp_path):
    cfg = str(CONFIGS / "great_circle.yaml")
    assert main(["run", cfg, "-r", "32", "--tol", "killing_residual=1e-9", "-o", str(tmp_path), "-q"]) == 1
    assert main(["run", cfg, "--tol", "nonsense=1", "-o", str(tmp_path)]) == 2
    assert main(["run", cfg, "--tol", "killing_residual=abc", "-o", str(tmp_path)]) == 2


def test_reports_are_deterministic(tmp_path):
    cfg = str(CONFIGS / "latitude_circle.yaml")
    for d in ("a", "b"):
        assert main(["study", cfg, "-o", str(tmp_path / d), "--format", "both", "-q"]) == 0
    for name in ("report.json", "report.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_round_trip(tmp_path):
    report, _ = run_scenario(load_config(CONFIGS / "great_subsphere.yaml").with_resolutions([16, 32]))
    main(["study", str(CONFIGS / "great_subsphere.yaml"), "-r", "16x16", "-r", "32x32", "-o", str(tmp_path), "--format", "csv", "-q"])
    rows = read_csv(tmp_path / "report.csv")
    assert len(rows) == 2 * len(report.checks)
    for row in rows:
        rec = report.check(row["check"])
        i = [lvl[0] for lvl in rec.levels].index(row["resolution"])
        st_ = rec.levels[i][1]
        assert row["max"] == st_.max and row["mean"] == st_.mean
        assert row["ratio"] == (rec.ratios[i - 1] if i else None)
        assert row["pass"] == rec.passed


def test_mesh_dump(tmp_path):
    mesh = tmp_path / "mesh.txt"
    main(["run", str(CONFIGS / "torus_family.yaml"), "-r", "16x24", "-o", str(tmp_path), "--mesh", str(mesh), "-q"])
    rows = np.loadtxt(mesh)
    assert rows.shape == (16 * 24, 2 + 4)
    np.testing.assert_allclose(np.linalg.norm(rows[:, 2:], axis=1), 1, atol=1e-12)
    # row-major: v varies fastest
    assert rows[1, 0] == rows[0, 0] and rows[1, 1] > rows[0, 1]


def test_timings_only_on_request(tmp_path):
    report, _ = run_scenario(load_config(CONFIGS / "great_circle.yaml").with_resolutions([16]))
    assert "timings" not in report_dict(report)
    assert set(report_dict(report, timings=True)["timings"][0]) >= {"geometry", "residual"}


def test_debug_flags_from_cli(tmp_path):
    out = tmp_path / "o"
    assert main(["run", str(CONFIGS / "great_circle.yaml"), "-r", "32", "--zero-nu", "-o", str(out), "-q"]) == 1
    assert main(["run", str(CONFIGS / "torus_family.yaml"), "-r", "32", "--perturb-a", "0.01", "-o", str(out), "-q"]) == 1
    assert main(["run", str(CONFIGS / "torus_family.yaml"), "-r", "128", "--phase-twist", "u+v", "-o", str(out), "-q"]) == 0
    assert main(["run", str(CONFIGS / "torus_family.yaml"), "--phase-twist", "exp(u)", "-o", str(out)]) == 2
