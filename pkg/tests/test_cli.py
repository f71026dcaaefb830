"""End-to-end command-line behavior: reports, artifacts, exit codes."""

from __future__ import annotations

import csv

import pytest

from critcouple.checks import check_names
from critcouple.cli import main

CASE1 = ["--params", "4,0.5,2,1.3333333333333333"]
LATTICE = ["--params", "1,0.25,1.8,1.5"]


@pytest.fixture()
def cli(capsys):
    def run(*argv: str) -> tuple[int, str, str]:
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run


def _csv_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_analyze_interior_minimum_report(cli):
    code, out, err = cli("analyze", *CASE1)
    assert code == 0
    assert "coupling case" in out and "beta<p" in out
    assert "tau_min" in out and "h(tau_min)" in out
    assert "sync residuals" in out
    assert "gamma lower threshold" in out


def test_analyze_degenerate_report(cli):
    code, out, _ = cli("analyze", "--params", f"1,{1 / 3.6},1.8,1.8")
    assert code == 0
    assert "beta=p,alpha=p" in out
    assert "ratio stays at its boundary value 1" in out


def test_analyze_artifacts(cli, tmp_path):
    out_dir = tmp_path / "report"
    code, out, _ = cli("analyze", *CASE1, "--out", str(out_dir))
    assert code == 0
    for name in ("analysis.csv", "roots.csv", "profile.csv", "profile.svg"):
        assert (out_dir / name).exists(), name
    rows = _csv_rows(out_dir / "profile.csv")
    assert len(rows) == 400
    assert {"tau", "h_value", "g_value"} == set(rows[0])


def test_analyze_usage_errors(cli, tmp_path):
    code, _, err = cli("analyze", "--params", "1,2")
    assert code == 2 and "error:" in err
    code, _, err = cli("analyze", "--params", "0,0.5,1.5,3")
    assert code == 2 and "error:" in err
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    code, _, err = cli("analyze", "--config", str(bad))
    assert code == 2 and "unknown key" in err
    code, _, err = cli("analyze", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2
    code, _, err = cli("analyze")  # params given neither by flag nor config
    assert code == 2 and "error:" in err


def test_no_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_config_file_with_flag_override(cli, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("N = 4\ns = 0.5\np = 2\nalpha = 1.3333333333333333\n")
    code, out, _ = cli("analyze", "--config", str(cfg))
    assert code == 0 and "beta<p" in out
    # flags win over the file
    code, out, _ = cli("analyze", "--config", str(cfg), "--params", f"1,{1 / 3.6},1.8,1.8")
    assert code == 0 and "beta=p,alpha=p" in out


def test_solve_gamma_report_and_thresholds(cli, tmp_path):
    out_dir = tmp_path / "roots"
    code, out, err = cli(
        "solve-gamma", *CASE1, "--gamma", "1.5", "--s-const", "6.0", "--out", str(out_dir)
    )
    assert code == 0
    assert "lower gamma threshold" in out
    assert "root(s) of the scale system" in out
    assert "least k+l" in out and "least energy" in out and "(S = 6" in out
    rows = _csv_rows(out_dir / "roots.csv")
    assert rows and {"k", "l", "k_plus_l", "is_k0", "is_l1"} <= set(rows[0])
    assert any(r["is_k0"] == "1" for r in rows)

    # below the lower threshold the result still comes out, with a warning
    code, out, err = cli("solve-gamma", *CASE1, "--gamma", "1e-4", "--s-const", "6.0")
    assert code == 0 and "warning:" in err

    code, _, err = cli("solve-gamma", *CASE1)
    assert code == 2 and "missing required settings: gamma" in err


def test_solve_gamma_lattice_estimate(cli, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("grid_n = 32\nmax_iter = 2000\ntol = 1e-08\n")
    code, out, _ = cli(
        "solve-gamma", "--config", str(cfg), *LATTICE, "--gamma", "0.5"
    )
    assert code == 0
    assert "lattice estimate, n=32" in out


def test_continue_branch_csv(cli, tmp_path):
    out_dir = tmp_path / "branch"
    code, out, _ = cli(
        "continue",
        *CASE1,
        "--gamma-grid",
        "geom:1e-6:0.3:8",
        "--out",
        str(out_dir),
    )
    assert code == 0
    assert "completed" in out and "largest gamma with k+l > 1" in out
    rows = _csv_rows(out_dir / "branch.csv")
    assert len(rows) == 8
    first = rows[0]
    assert float(first["k"]) == pytest.approx(1.0, abs=1e-4)
    assert float(first["l"]) == pytest.approx(1.0, abs=1e-4)
    assert all(float(r["k_plus_l"]) > 1.0 for r in rows)
    assert (out_dir / "branch.svg").exists()


def test_continue_past_fold_reports_partial(cli, tmp_path):
    out_dir = tmp_path / "stall"
    code, out, _ = cli(
        "continue",
        "--params",
        "4,0.5,2,1.2",
        "--gamma-grid",
        "geom:1e-6:1.4:12",
        "--out",
        str(out_dir),
    )
    assert code == 1
    assert "stalled" in out
    assert len(_csv_rows(out_dir / "branch.csv")) >= 1


def test_continue_usage_errors(cli):
    code, _, err = cli("continue", *CASE1)
    assert code == 2 and "gamma_grid" in err
    code, _, err = cli("continue", *CASE1, "--gamma-grid", "0.5,0.2")
    assert code == 2


def test_minimize_scalar_run(cli, tmp_path):
    out_dir = tmp_path / "scalar"
    code, out, _ = cli(
        "minimize",
        *LATTICE,
        "--grid-n",
        "32",
        "--max-iter",
        "4000",
        "--tol",
        "1e-9",
        "--symmetrize",
        "--out",
        str(out_dir),
    )
    assert code == 0
    assert "scalar quotient minimization" in out
    for name in ("minimizer_u.csv", "history.csv", "minimizer.svg"):
        assert (out_dir / name).exists(), name
    hist = [float(r["value"]) for r in _csv_rows(out_dir / "history.csv")]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(hist, hist[1:]))


def test_minimize_paired_comparison(cli):
    code, out, _ = cli(
        "minimize",
        *LATTICE,
        "--gamma",
        "1.0",
        "--grid-n",
        "32",
        "--max-iter",
        "4000",
        "--tol",
        "1e-8",
        "--symmetrize",
    )
    assert code == 0
    assert "coupled quotient minimization" in out
    assert "h(tau_min) * scalar" in out
    assert "ratio-identity gap" in out


def test_minimize_validation(cli):
    code, _, err = cli("minimize", *LATTICE, "--mask-radius", "0.1")
    assert code == 2 and "below one cell width" in err
    code, _, err = cli("minimize", *LATTICE, "--gamma", "1.0", "--eps-shift", "0.9")
    assert code == 2 and "eps_shift" in err
    code, _, err = cli("minimize", "--params", "4,0.5,2,1.3333333333333333")
    assert code == 2 and "N=1" in err


def test_verify_all_and_filtered(cli):
    code, out, _ = cli("verify")
    assert code == 0
    n = len(check_names())
    assert out.count("PASS") == n
    assert f"{n}/{n} checks passed" in out

    expected = [name for name in check_names() if "coupling" in name]
    code, out, _ = cli("verify", "--filter", "coupling")
    assert code == 0
    assert out.count("PASS") == len(expected)
    for name in expected:
        assert name in out

    code, _, err = cli("verify", "--filter", "no-such-check")
    assert code == 2 and "no checks match" in err


def test_verify_golden_negative(cli, tmp_path):
    import json

    from critcouple.checks import load_golden

    data = load_golden()
    data["thresholds"][0]["value"] *= 1.01
    tampered = tmp_path / "golden.json"
    tampered.write_text(json.dumps(data))
    code, out, _ = cli("verify", "--filter", "golden", "--golden", str(tampered))
    assert code == 1
    assert "FAIL" in out and "golden.reference-values" in out


def test_csv_outputs_are_byte_identical(cli, tmp_path):
    """Same config and seed must reproduce artifacts bit for bit."""
    paths = []
    for tag in ("a", "b"):
        out_dir = tmp_path / tag
        code, _, _ = cli("analyze", *CASE1, "--out", str(out_dir), "--seed", "5")
        assert code == 0
        code, _, _ = cli(
            "minimize",
            *LATTICE,
            "--grid-n",
            "32",
            "--max-iter",
            "500",
            "--symmetrize",
            "--out",
            str(out_dir),
            "--seed",
            "5",
        )
        paths.append(out_dir)
    for name in ("analysis.csv", "profile.csv", "minimizer_u.csv", "history.csv"):
        assert (paths[0] / name).read_bytes() == (paths[1] / name).read_bytes(), name


def test_threads_env_validation(cli, monkeypatch):
    monkeypatch.setenv("CRITCOUPLE_THREADS", "not-a-number")
    code, _, err = cli("analyze", *CASE1)
    assert code == 2 and "CRITCOUPLE_THREADS" in err
    monkeypatch.setenv("CRITCOUPLE_THREADS", "2")
    code, _, _ = cli("analyze", *CASE1)
    assert code == 0
