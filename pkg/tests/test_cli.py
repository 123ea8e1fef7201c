"""Command-line interface: subcommands, exit codes, deterministic output."""

import contextlib
import io
import json
import subprocess
import sys

import pytest

from clifford_ym.cli import (
    EXIT_CONFIG,
    EXIT_GOLDEN,
    EXIT_OK,
    EXIT_TOLERANCE,
    main,
)


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


BASE_CONFIG = {
    "signature": {"p": 2, "q": 0},
    "frame": {"kind": "identity"},
    "gauge": {
        "kind": "exp_bivector",
        "terms": [{
            "blade": "e12",
            "poly": {"monomials": [
                {"exps": [1, 0], "coeff": [0.3, 0.0]},
                {"exps": [0, 2], "coeff": [-0.2, 0.0]},
            ]},
        }],
    },
    "samples": {"count": 6, "seed": 3, "box": [-1.0, 1.0]},
    "sigma": [1.0, 0.0],
}


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "case.json"
    path.write_text(json.dumps(BASE_CONFIG))
    return str(path)


def test_tables_text_output():
    code, out, _ = run_cli(["tables", "--n", "2"])
    assert code == EXIT_OK
    assert "lambda: 2 0 -2" in out
    assert "r: 1/2 -1/16 -3/32" in out
    assert "mu: - 1/2 1/4" in out


def test_tables_json_output():
    code, out, _ = run_cli(["tables", "--n", "3", "--json"])
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["n"] == 3
    assert data["lambdas"] == [3, -1, -1, 3]
    assert data["weights"] == [{"num": "3", "den": "16"}, {"num": "-1", "den": "16"}]


def test_tables_deterministic():
    _, out1, _ = run_cli(["tables", "--n", "4", "--json"])
    _, out2, _ = run_cli(["tables", "--n", "4", "--json"])
    assert out1 == out2


def test_tables_range_checks():
    code, _, err = run_cli(["tables", "--n", "99"])
    assert code == EXIT_CONFIG
    code, out, _ = run_cli(["tables", "--n", "1"])
    assert code == EXIT_OK


def test_golden_passes():
    code, out, _ = run_cli(["golden"])
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[-1].endswith("golden checks passed")
    assert all(line.startswith("ok ") for line in lines[:-1])


def test_golden_detects_mismatch(monkeypatch):
    import clifford_ym.cli as cli_mod
    fake = [("n=2 lambdas", False, "got (2, 0, 2), want (2, 0, -2)"),
            ("n=2 A", True, "exact match")]
    monkeypatch.setattr(cli_mod, "run_golden_checks", lambda: fake)
    code, out, _ = run_cli(["golden"])
    assert code == EXIT_GOLDEN
    assert "MISMATCH n=2 lambdas" in out
    assert "1/2 golden checks passed" in out


def test_verify_runs_and_passes(config_file):
    code, out, _ = run_cli(["verify", "--config", config_file])
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["pass"] is True
    assert report["signature"] == {"p": 2, "q": 0}
    assert report["primitive_max"] < 1e-8
    assert report["eq1_max"] < 1e-7
    assert report["eq2_max"] < 1e-7
    assert report["conservation_max"] < 1e-7
    assert report["epsilon"] == [4.0, 0.0]
    assert report["epsilon_rel_error"] < 1e-10
    assert report["gauge_check"]["pass"] is True
    assert len(report["per_point"]) == report["samples"]


def test_verify_deterministic_output(config_file):
    _, out1, _ = run_cli(["verify", "--config", config_file])
    _, out2, _ = run_cli(["verify", "--config", config_file])
    assert out1 == out2


def test_verify_seed_changes_report(config_file):
    _, out1, _ = run_cli(["verify", "--config", config_file, "--seed", "1"])
    _, out2, _ = run_cli(["verify", "--config", config_file, "--seed", "2"])
    r1, r2 = json.loads(out1), json.loads(out2)
    assert r1["seed"] == 1 and r2["seed"] == 2
    assert r1["per_point"] != r2["per_point"]
    assert r1["pass"] and r2["pass"]


def test_verify_sigma_override(config_file):
    code, out, _ = run_cli(["verify", "--config", config_file, "--sigma", "0,1"])
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["sigma"] == [0.0, 1.0]
    # 4(n-1) sigma^3 with n=2, sigma=i gives -4i.
    assert report["epsilon"] == [0.0, -4.0]
    assert report["pass"] is True


def test_verify_fd_mode(config_file):
    code, out, _ = run_cli(["verify", "--config", config_file, "--fd"])
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["mode"] == "fd"
    assert report["pass"] is True


def test_verify_missing_file():
    code, _, err = run_cli(["verify", "--config", "/nonexistent/nope.json"])
    assert code == EXIT_CONFIG
    assert err


def test_verify_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = run_cli(["verify", "--config", str(path)])
    assert code == EXIT_CONFIG


def test_verify_bad_signature(tmp_path):
    cfg = dict(BASE_CONFIG, signature={"p": 40, "q": 0})
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run_cli(["verify", "--config", str(path)])
    assert code == EXIT_CONFIG


def test_verify_non_bivector_gauge(tmp_path):
    cfg = json.loads(json.dumps(BASE_CONFIG))
    cfg["gauge"]["terms"][0]["blade"] = "e1"
    path = tmp_path / "vector_gauge.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run_cli(["verify", "--config", str(path)])
    assert code == EXIT_CONFIG


def test_verify_epsilon_override_breaches_tolerance(tmp_path):
    cfg = dict(BASE_CONFIG, epsilon_override=[13.0, 0.0])
    path = tmp_path / "forced_eps.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run_cli(["verify", "--config", str(path)])
    assert code == EXIT_TOLERANCE
    report = json.loads(out)
    assert report["pass"] is False
    assert report["epsilon"] == [13.0, 0.0]
    assert report["eq2_max"] > 1.0


def test_verify_output_file_matches_stdout(tmp_path, config_file):
    target = tmp_path / "report.json"
    cfg = dict(BASE_CONFIG, output=str(target))
    path = tmp_path / "with_output.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run_cli(["verify", "--config", str(path)])
    assert code == EXIT_OK
    assert json.loads(target.read_text()) == json.loads(out)


def test_demo_passes():
    code, out, _ = run_cli(["demo", "--n", "2"])
    assert code == EXIT_OK
    assert "PASS" in out
    assert "lambda" in out


def test_demo_rejects_bad_n():
    with pytest.raises(SystemExit) as exc:
        run_cli(["demo", "--n", "9"])
    assert exc.value.code == 2


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "clifford_ym.cli", "tables", "--n", "2", "--json"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["n"] == 2

    proc = subprocess.run(
        ["clifford-ym", "golden"], capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert "golden checks passed" in proc.stdout
