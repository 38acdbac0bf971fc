"""End-to-end command-line runs on tiny problems: artifacts and exit codes."""

import json
import os
import subprocess

import pytest

from scissorlab.cli import main

FAST = ["--iterations", "40", "--seed", "0"]


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _manifest(outdir):
    with open(os.path.join(outdir, "manifest.json"), encoding="utf-8") as fh:
        return json.load(fh)


def _lines(path):
    return _read(path).decode().splitlines()


# ===== morph =====


def test_morph_writes_all_artifacts(tmp_path):
    out = str(tmp_path / "m")
    code = main(["morph", "--target", "circle", "--units", "4",
                 "--out", out] + FAST)
    assert code == 0
    for name in ("manifest.json", "design.json", "shape.csv", "overlay.svg"):
        assert os.path.exists(os.path.join(out, name))

    man = _manifest(out)
    assert man["command"] == "morph"
    assert man["seed"] == 0
    assert man["config"]["units"] == 4
    assert man["config"]["normalize"] is True
    assert man["inputs"] == {"analytic": "circle"}
    assert {"version", "backend", "timestamp"} <= set(man)

    with open(os.path.join(out, "design.json"), encoding="utf-8") as fh:
        design = json.load(fh)
    assert design["kind"] == "morph"
    assert len(design["alphas"]) == 4
    assert design["loss"] < 1e6
    assert {"l", "psi", "beta0", "base_position", "seed", "flags"} <= \
        set(design)

    lines = _lines(os.path.join(out, "shape.csv"))
    assert lines[0] == "index,x,y"
    assert len(lines) == 5  # one node per unit
    assert _read(os.path.join(out, "overlay.svg")).startswith(b"<svg")


def test_morph_is_byte_reproducible(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    args = ["morph", "--target", "spiral", "--units", "4"] + FAST
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(args + ["--out", out1]) == 0
    assert main(args + ["--out", out2]) == 0
    for name in ("manifest.json", "design.json", "shape.csv", "overlay.svg"):
        assert _read(os.path.join(out1, name)) == \
            _read(os.path.join(out2, name)), name


def test_morph_flags_win_over_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"units": 9, "iterations": 25, "seed": 4}))
    out = str(tmp_path / "m")
    code = main(["morph", "--target", "line", "--units", "4",
                 "--config", str(cfg), "--out", out])
    assert code == 0
    man = _manifest(out)
    assert man["config"]["units"] == 4        # explicit flag kept
    assert man["config"]["iterations"] == 25  # filled from config file
    assert man["seed"] == 4


def test_morph_reports_failed_design(tmp_path):
    # a curvature weight this large keeps the loss above the infeasibility
    # threshold, which the command must report as a failed design
    out = str(tmp_path / "m")
    code = main(["morph", "--target", "circle", "--units", "4",
                 "--weights", "1e9,1.0,0.1", "--iterations", "1",
                 "--out", out])
    assert code == 3
    assert os.path.exists(os.path.join(out, "design.json"))
    assert not os.path.exists(os.path.join(out, "shape.csv"))


# ===== write =====


def test_write_grid_search_artifacts(tmp_path):
    out = str(tmp_path / "w")
    code = main(["write", "--target", "line", "--grid", "2:3",
                 "--restarts", "2", "--samples", "20", "--stations", "12",
                 "--psi-range", "2.8:1.2", "--out", out] + FAST)
    assert code == 0
    for name in ("manifest.json", "design.json", "gridsearch.csv",
                 "trajectory.csv", "collage.svg"):
        assert os.path.exists(os.path.join(out, name))

    man = _manifest(out)
    assert man["command"] == "write"
    assert man["config"]["candidates"] == [2, 3]
    assert man["config"]["psi_range"] == [2.8, 1.2]

    grid = _lines(os.path.join(out, "gridsearch.csv"))
    assert grid[0] == "n_units,seed,loss"
    assert len(grid) == 5  # 2 candidates x 2 restarts
    assert [row.split(",")[1] for row in grid[1:]] == ["0", "1", "0", "1"]

    with open(os.path.join(out, "design.json"), encoding="utf-8") as fh:
        design = json.load(fh)
    assert design["kind"] == "write"
    assert design["sections"] in (2, 3)
    assert len(design["alphas"]) == design["sections"]
    assert design["psi_max"] == 2.8 and design["psi_min"] == 1.2

    traj = _lines(os.path.join(out, "trajectory.csv"))
    assert traj[0] == "psi,x,y"
    assert len(traj) == 21  # one row per sweep sample


def test_write_is_byte_reproducible(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    args = ["write", "--target", "line", "--units", "2", "--samples", "16",
            "--stations", "10", "--psi-range", "2.8:1.5"] + FAST
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(args + ["--out", out1]) == 0
    assert main(args + ["--out", out2]) == 0
    for name in ("manifest.json", "design.json", "gridsearch.csv",
                 "trajectory.csv", "collage.svg"):
        assert _read(os.path.join(out1, name)) == \
            _read(os.path.join(out2, name)), name


def test_write_reports_failed_design(tmp_path):
    out = str(tmp_path / "w")
    code = main(["write", "--target", "line", "--units", "2",
                 "--weights", "0.01,1e9,10.0", "--samples", "16",
                 "--stations", "10", "--iterations", "1", "--out", out])
    assert code == 3
    assert os.path.exists(os.path.join(out, "gridsearch.csv"))
    assert not os.path.exists(os.path.join(out, "trajectory.csv"))


# ===== analyze =====


def test_analyze_closure(tmp_path):
    out = str(tmp_path / "c")
    code = main(["analyze", "closure", "--alpha", "0.5,0.7",
                 "--units", "5:8", "--out", out])
    assert code == 0
    lines = _lines(os.path.join(out, "closure.csv"))
    assert lines[0] == "alpha,n_units,theory,measured,closes"
    assert len(lines) == 9  # 2 ratios x 4 sizes
    assert sum(row.endswith("True") for row in lines[1:]) == 4
    assert os.path.exists(os.path.join(out, "closure.svg"))
    assert _manifest(out)["config"]["study"] == "closure"


def test_analyze_sensitivity(tmp_path):
    out = str(tmp_path / "s")
    code = main(["analyze", "sensitivity", "--units", "5,7",
                 "--samples", "50", "--out", out])
    assert code == 0
    lines = _lines(os.path.join(out, "sensitivity.csv"))
    assert lines[0] == "n_units,unit,station,sigma,normalized_sigma"
    assert len(lines) == 13  # 5 + 7 units
    assert os.path.exists(os.path.join(out, "sensitivity.svg"))


def test_analyze_perturbation(tmp_path):
    out = str(tmp_path / "p")
    code = main(["analyze", "perturbation", "--units", "6", "--out", out])
    assert code == 0
    lines = _lines(os.path.join(out, "perturbation.csv"))
    assert lines[0] == "index,exact_x,exact_y,approx_x,approx_y,error"
    assert len(lines) == 7
    assert os.path.exists(os.path.join(out, "perturbation.svg"))


# ===== target files =====


def test_target_from_csv_file(tmp_path):
    path = tmp_path / "pts.csv"
    rows = ["x,y"] + [f"{x},{x * x}" for x in
                      (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)]
    path.write_text("\n".join(rows) + "\n")
    out = str(tmp_path / "m")
    code = main(["morph", "--target", str(path), "--units", "4",
                 "--no-normalize", "--out", out] + FAST)
    assert code == 0
    man = _manifest(out)
    assert man["inputs"]["file"] == str(path)
    assert len(man["inputs"]["sha256"]) == 64
    assert man["config"]["normalize"] is False


# ===== bad input =====


@pytest.mark.parametrize("argv", [
    ["morph", "--target", "nonagon"],            # unknown analytic family
    ["morph", "--target", "/no/such/file.csv"],
    ["morph", "--target", "circle", "--units", "1"],
    ["morph", "--target", "circle", "--restarts", "0"],
    ["morph", "--target", "circle", "--weights", "1,2"],
    ["write", "--target", "line", "--psi-range", "3.0"],
    ["write", "--target", "line", "--grid", "4:2"],
    ["morph"],                                    # --target is required
    ["frobnicate"],                               # unknown command
    ["analyze", "nonsense"],
])
def test_invalid_input_exits_2(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path / "x")]) == 2


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"velocity": 3}))
    assert main(["morph", "--target", "circle", "--config", str(cfg),
                 "--out", str(tmp_path / "m")]) == 2


def test_help_exits_cleanly():
    assert main(["--help"]) == 0


def test_console_script_is_wired():
    proc = subprocess.run(["scissor", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0
    assert "morph" in proc.stdout and "analyze" in proc.stdout
