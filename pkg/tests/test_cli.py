import csv
import io
import json
import subprocess
import sys

import pytest

from formsens.cli import main
from formsens.config import bundled

SMALL = ["--mvn-samples", "51200"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name, counts", [
    ("frame", "OK, 4 limit states, 4 variables"),
    ("parabola", "OK, 1 limit state, 2 variables"),
    ("beambar_gaussian", "OK, 5 limit states, 3 variables"),
    ("beambar_lognormal", "OK, 5 limit states, 3 variables"),
    ("illustrative", "OK, 2 limit states, 2 variables"),
])
def test_validate_bundled(capsys, name, counts):
    code, out, _ = run(capsys, "validate", "--config", bundled(name))
    assert code == 0
    assert out.strip().splitlines()[-1] == counts
    assert "warning" not in out


def write(tmp_path, body):
    path = tmp_path / "p.ini"
    path.write_text("[variables]\nU1 = normal 0 1\nU2 = normal 0 1\n" + body)
    return path


def test_unknown_identifier_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "validate", "--config",
                       write(tmp_path, "[limit_states]\ng = 3 - U1 - W\n"))
    assert code == 2
    assert "W" in err


def test_syntax_error_reports_offset(capsys, tmp_path):
    code, _, err = run(capsys, "validate", "--config",
                       write(tmp_path, "[limit_states]\ng = U1 + + U2\n"))
    assert code == 2
    assert "byte offset 5" in err


def test_gradient_warning(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", "--config",
                       write(tmp_path, "[limit_states]\ng = 3 - U1 + sin(1e6*U2)\n"))
    assert code == 0
    assert "warning: g: gradient mismatch" in out


def test_missing_config_exit_2(capsys):
    code, _, err = run(capsys, "analyze", "--config", "/nonexistent.ini")
    assert code == 2 and "cannot read" in err


def test_numerical_failure_exit_3(capsys, tmp_path):
    path = write(tmp_path, "[limit_states]\ng = 3 + 0*U1\n[solver]\nmax_iter = 5\n")
    code, _, err = run(capsys, "analyze", "--config", path, *SMALL)
    assert code == 3 and err.startswith("error:")


def test_empty_sweep_range(capsys):
    cfg = bundled("illustrative")
    for rng, steps in (("45:45", 3), ("0:90", 0)):
        code, _, err = run(capsys, "sweep", "--config", cfg, "--param", "theta",
                           "--range", rng, "--steps", steps)
        assert code == 2 and "empty" in err
    code, _, err = run(capsys, "sweep", "--config", cfg, "--param", "kappa",
                       "--range", "0:1", "--steps", 2)
    assert code == 2


def analyze_json(tmp_path, capsys, tag, *extra):
    out = tmp_path / f"{tag}.json"
    code, stdout, _ = run(capsys, "analyze", "--config", bundled("illustrative"), *SMALL,
                          "--out", out, *extra)
    assert code == 0
    assert "sensitivity indices" in stdout
    return out.read_text()


def test_json_deterministic_modulo_run_info(tmp_path, capsys):
    a = json.loads(analyze_json(tmp_path, capsys, "a"))
    b = json.loads(analyze_json(tmp_path, capsys, "b"))
    assert set(a["run_info"]) == {"timestamp", "wall_clock_s"}
    a.pop("run_info"), b.pop("run_info")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["schema_version"] == "1.0"
    assert a["seeds"] == {"solver": 42, "mvn": 42, "mc": 42}
    c = json.loads(analyze_json(tmp_path, capsys, "c", "--seed", "7"))
    assert c["sensitivity"]["p_f"] != a["sensitivity"]["p_f"]


def test_csv_matches_json(tmp_path, capsys):
    report = json.loads(analyze_json(tmp_path, capsys, "r"))
    path = tmp_path / "r.csv"
    code, _, _ = run(capsys, "analyze", "--config", bundled("illustrative"), *SMALL,
                     "--format", "csv", "--out", path)
    assert code == 0
    raw = path.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    by = {(r["section"], r["name"]): r for r in rows}
    sens = report["sensitivity"]
    for kind in ("first_order", "total_effect"):
        for name, e in sens[kind].items():
            assert float(by[(kind, name)]["value"]) == e["value"]
            assert float(by[(kind, name)]["std_error"]) == e["std_error"]
    assert float(by[("probability", "system")]["value"]) == report["probabilities"]["system"]["value"]
    assert float(by[("closed", "U1 U2")]["value"]) == sens["closed"][0]["value"]


def test_parabola_lists_two_design_points(tmp_path, capsys):
    out = tmp_path / "p.json"
    code, stdout, _ = run(capsys, "analyze", "--config", bundled("parabola"), *SMALL,
                          "--n-starts", 8, "--out", out)
    assert code == 0
    report = json.loads(out.read_text())
    assert len(report["design_points"]) == 2
    assert stdout.count("beta = ") == 2


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--config", bundled("illustrative"), *SMALL,
                     "--param", "theta", "--range", "0:90", "--steps", 3, "--out", out)
    assert code == 0
    rows = list(csv.DictReader(out.open(newline="")))
    assert [float(r["theta"]) for r in rows] == [0.0, 45.0, 90.0]
    for col in ("p_series", "p_parallel", "S_parallel_U2", "ST_g2_U2_se"):
        assert col in rows[0]


def test_mc_flag_adds_section(tmp_path, capsys):
    report = json.loads(analyze_json(tmp_path, capsys, "m", "--mc", "--mc-samples", "20000"))
    assert report["mc"]["pick_freeze"]["n_evaluations"] == 20000 * 4
    assert report["mc"]["p_f"]["n_samples"] == 20000


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "formsens", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "formsens" in proc.stdout
