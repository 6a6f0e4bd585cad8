import csv
import json
from pathlib import Path

import numpy as np
import pytest

from darkband import cli


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_loschmidt_run_and_rate_zero_at_origin(tmp_path):
    out = tmp_path / "run1"
    code = cli.main(["loschmidt", "--j", "10", "--t-steps", "20",
                     "--out-dir", str(out)])
    assert code == 0
    rows = read_csv(out / "loschmidt.csv")
    assert abs(float(rows[0]["r"])) < 1e-12
    assert abs(float(rows[0]["L"]) - 1.0) < 1e-12
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["files"] == ["loschmidt.csv"]
    assert manifest["parameters"]["m0"] == 6.0  # auto rule
    assert manifest["parameters"]["Omega"] == 1.0


def test_determinism_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["loschmidt", "--j", "12", "--t-steps", "30",
                         "--out-dir", str(out)]) == 0
        outs.append((out / "loschmidt.csv").read_bytes())
    assert outs[0] == outs[1]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("j = 8\nt-steps = 10\n# comment\nnorm = per-N\n")
    out = tmp_path / "out"
    code = cli.main(["loschmidt", "--config", str(cfg), "--out-dir", str(out)])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["parameters"]["j"] == 8.0
    assert manifest["parameters"]["norm"] == "per-N"
    assert manifest["parameters"]["t_steps"] == 10


def test_bad_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("nonsense-line-without-equals\n")
    assert cli.main(["loschmidt", "--config", str(cfg),
                     "--out-dir", str(tmp_path)]) == 2
    cfg.write_text("unknown_key = 3\n")
    assert cli.main(["loschmidt", "--config", str(cfg),
                     "--out-dir", str(tmp_path)]) == 2
    cfg.write_text("t_steps = not-a-number\n")
    assert cli.main(["loschmidt", "--config", str(cfg),
                     "--out-dir", str(tmp_path)]) == 2


def test_invalid_m0_exits_2(tmp_path):
    assert cli.main(["loschmidt", "--j", "10", "--m0", "11",
                     "--out-dir", str(tmp_path)]) == 2
    assert cli.main(["loschmidt", "--j", "10", "--m0", "x",
                     "--out-dir", str(tmp_path)]) == 2


def test_bipartite_budget_exit_4(tmp_path):
    assert cli.main(["bipartite", "--n-atoms", "60", "--t-steps", "5",
                     "--out-dir", str(tmp_path)]) == 4


def test_rainbow_outputs(tmp_path):
    out = tmp_path / "rb"
    assert cli.main(["rainbow", "--out-dir", str(out)]) == 0
    rows = read_csv(out / "rainbow_io.csv")
    t1 = max(float(r["theta_deg"]) for r in rows if r["order"] == "1")
    t2 = min(float(r["theta_deg"]) for r in rows if r["order"] == "2")
    assert abs(t1 - 42.0) < 0.5
    assert abs(t2 - 50.5) < 1.0
    band = read_csv(out / "darkband.csv")
    assert abs(float(band[0]["r"])) < 1e-12  # zero at the band edge


def test_classical_outputs(tmp_path):
    out = tmp_path / "cl"
    assert cli.main(["classical", "--j", "10", "--t-max", "3", "--t-steps", "3",
                     "--n-traj", "64", "--out-dir", str(out)]) == 0
    rows = read_csv(out / "ensemble.csv")
    t0 = [r for r in rows if float(r["t"]) == 0.0]
    assert all(abs(float(r["eta"]) - 0.6) < 1e-12 for r in t0)
    assert (out / "folds.csv").exists()


def test_fockmap_outputs(tmp_path):
    out = tmp_path / "fm"
    assert cli.main(["fockmap", "--j", "6", "--t-steps", "8",
                     "--out-dir", str(out)]) == 0
    rows = read_csv(out / "fockmap.csv")
    # t = 0 column: unit weight on m0 = 4 (auto for j = 6 -> 0.6 j = 3.6 -> 4)
    col0 = {r["m"]: float(r["abs_amp"]) for r in rows if float(r["t"]) == 0.0}
    assert abs(col0["4"] - 1.0) < 1e-12
    m = json.loads((out / "manifest.json").read_text())
    assert set(m["files"]) == {"fockmap.csv", "loschmidt.csv"}


def test_seventeen_digit_format(tmp_path):
    out = tmp_path / "fmt"
    assert cli.main(["loschmidt", "--j", "4", "--t-steps", "5",
                     "--out-dir", str(out)]) == 0
    text = (out / "loschmidt.csv").read_text().splitlines()[2]
    val = text.split(",")[1]
    assert len(val.split("e")[0].replace(".", "").replace("-", "").lstrip("0")) >= 15
