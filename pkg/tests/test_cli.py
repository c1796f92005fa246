from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from regnbhd.cli import main

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"
GOLDEN = ROOT / "src" / "regnbhd" / "golden"


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def section(output, name):
    start = output.index(f"----- BEGIN {name} -----\n") + len(f"----- BEGIN {name} -----\n")
    return output[start:output.index(f"----- END {name} -----", start)]


def test_run_g1_matches_its_golden_file():
    r = invoke("run", SCENARIOS / "g1.json", "--golden", GOLDEN / "g1.json")
    assert r.exit_code == 0, r.output
    assert section(r.output, "golden-diff").strip() == "(identical)"
    doc = json.loads(section(r.output, "json"))
    assert sorted(doc["gog"]["labels"].values()) == ["V0", "V1", "V1"]


def test_gallery_command_diffs_against_stored_output():
    r = invoke("gallery", "g5")
    assert r.exit_code == 0
    assert "(identical)" in r.output
    listing = invoke("gallery", "--list")
    assert listing.exit_code == 0 and "g2" in listing.output


def test_golden_mismatch_exits_4():
    r = invoke("run", SCENARIOS / "g1.json", "--golden", GOLDEN / "g5.json")
    assert r.exit_code == 4
    assert "+++ computed/g1" in section(r.output, "golden-diff")


def test_short_schedule_exits_3():
    r = invoke("run", SCENARIOS / "g2.json", "--radius-schedule", "1")
    assert r.exit_code == 3
    assert "NoStabilization" in r.output


@pytest.mark.parametrize("args", [
    ("run", "does-not-exist.json"),
    ("run", SCENARIOS / "g1.json", "--radius-schedule", "three"),
    ("run",),
    ("inumber", "g1", "0", "5"),
    ("gallery", "nope"),
])
def test_input_errors_exit_2(args):
    r = invoke(*args)
    assert r.exit_code == 2, r.output


def test_malformed_scenario_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schemaVersion": 1, "name": "bad", "gog": {"vertices": {}}}))
    r = invoke("run", bad)
    assert r.exit_code == 2
    assert "error [load]" in r.output


def test_out_directory_and_dot(tmp_path):
    r = invoke("run", SCENARIOS / "g1.json", "--emit", "dot", "--out", tmp_path)
    assert r.exit_code == 0
    dot = section(r.output, "dot")
    assert dot.startswith("graph") or dot.startswith("digraph")
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["g1.axioms.json", "g1.certificate.json", "g1.dot", "g1.json"]
    assert json.loads((tmp_path / "g1.axioms.json").read_text())


def test_direct_table_run():
    r = invoke("run", "--direct-table", SCENARIOS / "surface_table.json")
    assert r.exit_code == 0, r.output
    doc = json.loads(section(r.output, "json"))
    assert list(doc["gog"]["labels"].values()) == ["V0"]


def test_figure_is_written(tmp_path):
    fig = tmp_path / "g1.png"
    r = invoke("gallery", "g1", "--figure", fig)
    assert r.exit_code == 0
    assert fig.stat().st_size > 0


def test_inumber_command():
    r = invoke("inumber", "g1", "0", "0")
    assert r.exit_code == 0
    assert r.output.startswith("i(X, X) = 0")


def test_console_script_is_installed():
    import shutil
    import subprocess
    exe = shutil.which("regnbhd")
    if exe is None:
        pytest.skip("package not installed")
    out = subprocess.run([exe, "gallery", "--list"], capture_output=True, text=True)
    assert out.returncode == 0 and "g1" in out.stdout
