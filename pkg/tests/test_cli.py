import csv
import io
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from cotether import __version__
from cotether.cli import main, parse_grid, parse_int_list

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
FIG3 = str(CONFIGS / "fig3_budget.csv")


def run(argv, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out.read_text() if out.exists() else ""


def table(text):
    lines = text.splitlines()
    assert lines[0].startswith(f"# cotether {__version__} seed=")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_parse_helpers():
    np.testing.assert_allclose(parse_grid("1:3:3"), [1, 2, 3])
    np.testing.assert_allclose(parse_grid("1:100:3", log_spaced=True), [1, 10, 100])
    assert parse_int_list("2-4") == (2, 3, 4)
    assert parse_int_list("2,5") == (2, 5)
    for bad in ("3:1:5", "1:2", "0:10:5x"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_analyze_outage(tmp_path):
    code, text = run(["analyze", "--budget", FIG3, "--gamma-th", "0.1:100:5", "--log-grid"], tmp_path)
    assert code == 0
    rows = table(text)
    assert {r["path"] for r in rows} == {"conventional", "hybrid_direct", "ap_phase1", "ue_phase2", "hybrid"}
    assert len(rows) == 5 * 5


def test_analyze_summary_applies_hops_to_hybrid_only(tmp_path):
    code, text = run(["analyze", "--budget", FIG3, "--metric", "summary", "--nh", "2"], tmp_path)
    assert code == 0
    nh = {r["path"]: r["nh"] for r in table(text)}
    assert nh["hybrid"] == "2" and nh["conventional"] == "1"


def test_simulate_summary(tmp_path):
    code, text = run(["simulate", "--budget", FIG3, "--samples", "20000", "--metric", "summary"], tmp_path)
    assert code == 0
    (row,) = table(text)
    assert row["path"] == "hybrid" and row["n_samples"] == "20000"


def test_validate_passes(tmp_path):
    code, text = run(["validate", "--budget", FIG3, "--samples", "100000", "--threshold", "0.01"], tmp_path)
    assert code == 0
    assert all(r["passed"] == "true" for r in table(text))


def test_validate_failure_exit_code(tmp_path):
    code, text = run(["validate", "--budget", FIG3, "--samples", "100", "--threshold", "1e-6"], tmp_path)
    assert code == 4
    assert any(r["passed"] == "false" for r in table(text))


def test_invalid_input_exit_code(tmp_path, capsys):
    assert main(["analyze", "--budget", str(tmp_path / "missing.csv")]) == 2
    assert main(["analyze"]) == 2
    assert main(["analyze", "--budget", FIG3, "--gamma-th", "5:1:3"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("path,role,count,mean\nconventional,cell_ue,2,1.0\nconventional,cell_ue,1,2.0\n")
    assert main(["analyze", "--budget", str(bad)]) == 2
    assert main(["optimize", "--n", "2"]) == 2
    assert "error:" in capsys.readouterr().err


def test_cap_exit_code(tmp_path):
    code, _ = run(["optimize", "--n", "7", "--m", "5", "--reps", "1", "--schemes", "exhaustive", "--cap", "1000"], tmp_path)
    assert code == 3


def test_optimize_exhaustive_spot_count(tmp_path):
    code, text = run(["optimize", "--n", "7", "--m", "5", "--reps", "1", "--schemes", "exhaustive"], tmp_path)
    assert code == 0
    (row,) = table(text)
    assert row["evaluations"] == "279936"


def test_optimize_from_scenario_file(tmp_path):
    code, text = run(["optimize", "--scenario", str(CONFIGS / "single_cell.yaml"), "--n", "2,3", "--m", "1", "--reps", "3"], tmp_path)
    assert code == 0
    rows = table(text)
    assert [(r["N"], r["M"], r["scheme"]) for r in rows] == [("2", "1", "greedy"), ("3", "1", "greedy")]
    assert "seed=1 " in text.splitlines()[0]


def test_figure_command(tmp_path, capsys):
    code, text = run(["figure", "4"], tmp_path)
    assert code == 0
    assert table(text)
    assert "PASS" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--budget", FIG3, "--samples", "30000", "--path", "hybrid", "--gamma-th", "0.5:50:8"],
        ["validate", "--budget", FIG3, "--samples", "20000", "--threshold", "0.05"],
        ["optimize", "--n", "2,3", "--m", "1,2", "--reps", "4", "--schemes", "greedy,exhaustive"],
    ],
    ids=["simulate", "validate", "optimize"],
)
def test_byte_identical_across_workers(argv, tmp_path):
    outs = []
    for i, workers in enumerate((1, 1, 3)):
        code, text = run([*argv, "--seed", "7", "--workers", str(workers)], tmp_path, f"run{i}.csv")
        assert code == 0
        outs.append(text.split("\n", 1)[1])
    assert outs[0] == outs[1] == outs[2]


def test_console_script_installed():
    exe = shutil.which("cotether")
    assert exe is not None
    res = subprocess.run([exe, "--version"], capture_output=True, text=True, check=True)
    assert res.stdout.strip() == f"cotether {__version__}"
