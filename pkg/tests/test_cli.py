import json
from pathlib import Path

import numpy as np
import pytest

from isothermic.errors import ConfigError
from isothermic.main import apply_overrides, build_parser, load_config, main, run
from isothermic.models import CheckResult, DetectionReport, RunConfig, Verdict
from isothermic.runner import SurfaceRunner
from isothermic.stores import read_profile_csv, report_json, write_field_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path: Path, payload: dict, name: str = "config.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def round_cylinder_payload(out: Path) -> dict:
    payload = json.loads((CONFIGS / "round_cylinder.json").read_text(encoding="utf-8"))
    payload["output"] = {"dir": str(out)}
    return payload


def test_round_cylinder_report(tmp_path):
    out = tmp_path / "out"
    path = write_config(tmp_path, round_cylinder_payload(out))
    assert run(path, "report") == 0

    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["schema"] == 1
    assert report["type_verdicts"] == {"1": "pass"}
    assert report["minimal_type"] == 1
    checks = {check["check"]: check for check in report["checks"]}
    assert checks["type1.span"]["verdict"] == "pass"
    assert checks["type1.space_form"]["message"] == "euclidean"
    assert checks["conservation"]["verdict"] == "pass"
    assert (out / "series.json").exists()
    header = (out / "fields" / "gamma_-1.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "u,value"


def test_reports_are_byte_stable(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    run(write_config(tmp_path, round_cylinder_payload(first), "a.json"), "fcq")
    run(write_config(tmp_path, round_cylinder_payload(second), "b.json"), "fcq")
    assert (first / "report.json").read_bytes() == (second / "report.json").read_bytes()


def test_non_positive_r0_is_a_config_error(tmp_path, capsys):
    payload = round_cylinder_payload(tmp_path / "out")
    payload["r"] = [-1.0]
    assert run(write_config(tmp_path, payload), "fcq") == 3
    assert "r0 must be positive" in capsys.readouterr().err


def test_unknown_key_is_a_config_error(tmp_path):
    payload = round_cylinder_payload(tmp_path / "out")
    payload["colour"] = "blue"
    assert run(write_config(tmp_path, payload)) == 3


def test_wrong_sign_of_c_is_a_config_error(tmp_path, capsys):
    payload = round_cylinder_payload(tmp_path / "out")
    payload["surface"] = {"kind": "revolution", "C": 1.0, "profile": {"kind": "constant", "value": 1.0}}
    assert run(write_config(tmp_path, payload)) == 3
    assert "C < 0" in capsys.readouterr().err


def test_samples_of_the_wrong_length_are_a_config_error(tmp_path, capsys):
    payload = round_cylinder_payload(tmp_path / "out")
    payload["surface"] = {"kind": "cylinder", "profile": {"kind": "samples", "values": [2.0] * 100}}
    assert run(write_config(tmp_path, payload), "fcq") == 3
    assert "samples but the grid has n=512" in capsys.readouterr().err


def test_curvature_export_reads_back_as_a_profile(tmp_path):
    out = tmp_path / "out"
    assert run(write_config(tmp_path, round_cylinder_payload(out)), "report") == 0
    path = out / "fields" / "curvature.csv"
    assert path.read_text(encoding="utf-8").splitlines()[0] == "u,k"
    samples = read_profile_csv(path)
    assert samples.shape == (512,)
    assert np.allclose(samples, 2.0)


def test_invalid_json_is_a_config_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(path)


def test_noisy_profile_fails_type_one(tmp_path):
    payload = json.loads((CONFIGS / "noisy_cylinder.json").read_text(encoding="utf-8"))
    payload["output"] = {"dir": str(tmp_path / "out")}
    assert run(write_config(tmp_path, payload), "detect") == 1


def test_sampled_depth_limit_exits_with_failure(tmp_path, capsys):
    payload = json.loads((CONFIGS / "noisy_cylinder.json").read_text(encoding="utf-8"))
    payload["output"] = {"dir": str(tmp_path / "out")}
    payload["depth"] = 6
    payload["checks"] = ["conservation"]
    assert run(write_config(tmp_path, payload), "fcq") == 1
    assert "insufficient smoothness" in capsys.readouterr().err


def test_overrides():
    raw = {"depth": 6, "surface": {"grid": {"n": 64}}}
    merged = apply_overrides(raw, {"depth": 3, "grid_n": 128, "tol": 1e-4, "out": "elsewhere"})
    assert merged["depth"] == 3
    assert merged["grid"] == {"n": 128}
    assert merged["tolerances"] == {"detection": 1e-4}
    assert merged["output"] == {"dir": "elsewhere"}
    assert raw["depth"] == 6


def test_grid_override_reaches_surface():
    config = RunConfig.model_validate(
        {
            "schema": 1,
            "surface": {"kind": "cylinder", "profile": {"kind": "constant", "value": 2.0}},
            "grid": {"n": 64},
            "checks": ["type1", "type3", "cmc"],
        }
    )
    assert config.surface.grid.n == 64
    assert config.requested("cmc")
    assert not config.requested("gram")
    assert config.requested_types() == [1, 3]


def test_unknown_check_is_rejected():
    with pytest.raises(ValueError, match="Unknown check"):
        RunConfig.model_validate(
            {
                "schema": 1,
                "surface": {"kind": "cylinder", "profile": {"kind": "constant", "value": 2.0}},
                "checks": ["typo"],
            }
        )


def test_main_prints_json(tmp_path, capsys):
    out = tmp_path / "out"
    path = write_config(tmp_path, round_cylinder_payload(out))
    assert main(["fcq", "--config", str(path), "--depth", "3", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["depth"] == 3


def test_parser_requires_config():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["report"])


def test_runner_skips_unrequested_groups(tmp_path):
    config = RunConfig.model_validate(
        {
            "schema": 1,
            "surface": {"kind": "cylinder", "profile": {"kind": "constant", "value": 2.0}},
            "depth": 3,
            "checks": ["gram"],
            "output": {"dir": str(tmp_path)},
        }
    )
    runner = SurfaceRunner(config)
    report = runner.run("report")
    assert [check.check for check in report.checks] == ["gram"]
    assert report.exit_code() == 0
    assert "series" not in runner.__dict__


def test_report_json_drops_non_finite_values():
    report = DetectionReport()
    report.add(CheckResult(check="cmc", verdict=Verdict.FAIL, residual=float("nan")))
    payload = json.loads(report_json(report))
    assert payload["checks"][0]["residual"] is None


def test_field_csv_round_trip(tmp_path, round_cylinder):
    path = write_field_csv(round_cylinder.curvature, tmp_path / "k.csv")
    table = np.genfromtxt(path, delimiter=",", names=True)
    assert table.dtype.names == ("u", "value")
    assert np.allclose(table["value"], 2.0)


def test_profile_csv_missing_file(tmp_path):
    with pytest.raises(ValueError):
        read_profile_csv(tmp_path / "missing.csv")
