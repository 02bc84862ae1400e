import json
import subprocess
import sys

import pytest

from barfi.cli import main, parse_seed_range

CFG = """env = bandit
aux_variant = Bandit_none
method = barfi
total_episodes = 15
record_wallclock = false
"""


def test_seed_range():
    assert parse_seed_range("2..4") == [2, 3, 4]
    assert parse_seed_range("7") == [7]
    with pytest.raises(Exception):
        parse_seed_range("4..2")


def test_run_writes_outputs(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CFG)
    assert main(["run", "--config", str(cfg), "--seed", "5", "--out", str(tmp_path / "out")]) == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["seed"] == 5
    assert len((tmp_path / "out" / "metrics.csv").read_text().splitlines()) == 16


def test_bad_config_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(CFG + "bogus = 1\n")
    assert main(["run", "--config", str(cfg), "--seed", "0", "--out", str(tmp_path / "o")]) == 2
    assert "bogus" in capsys.readouterr().err


def test_sweep(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CFG)
    assert main(["sweep", "--config", str(cfg), "--seeds", "0..1", "--out", str(tmp_path), "--workers", "1"]) == 0
    assert (tmp_path / "seed_1" / "metrics.csv").exists()


def test_check_props_and_ridge_demo(capsys):
    assert main(["check-props", "--cases", "3"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4
    assert main(["ridge-demo"]) == 0
    lines = capsys.readouterr().out.splitlines()
    values = [float(line.split()[-1]) for line in lines]
    assert max(values) - min(values) < 1e-6 * abs(values[0])


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "barfi", "ridge-demo"], capture_output=True, text=True, check=True)
    assert "closed form" in out.stdout
