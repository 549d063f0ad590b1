import json
import subprocess
import sys

import pytest

from imcfp.cli import main
from imcfp.config import ConfigError, defaults, load_config, parse_overrides, preset_names
from imcfp.crossbar import dumps
from imcfp.faults import fame_style_array

XOR_PLA = ".i 2\n.o 1\n01 1\n10 1\n.e\n"


def test_compile_xor(tmp_path, capsys):
    pla = tmp_path / "xor.pla"
    pla.write_text(XOR_PLA)
    assert main(["compile", str(pla), "--out", str(tmp_path / "out")]) == 0
    out = capsys.readouterr().out
    assert "wrote 2 arrays" in out and "verification passed" in out
    assert main(["compile", str(pla), "--style", "nor-nor"]) == 0


def test_compile_errors(tmp_path):
    bad = tmp_path / "bad.pla"
    bad.write_text(".i 2\n.o 1\n1x 1\n")
    assert main(["compile", str(bad)]) == 2
    assert main(["compile", str(tmp_path / "missing.pla")]) == 2
    assert main(["compile"]) == 2
    assert main(["compile", "--bogus"]) == 2


def test_fp_vectors(tmp_path, capsys):
    vec = tmp_path / "v.txt"
    vec.write_text("add 3fc00000 40100000 40700000\nsub 3f800000 3f800000 00000000\n")
    out = tmp_path / "r.txt"
    assert main(["fp", str(vec), "--out", str(out)]) == 0
    assert main(["fp", str(vec), "--fidelity", "mapped"]) == 0
    vec.write_text("add 3f800000 3f800000 40000001\n")
    assert main(["fp", str(vec)]) == 1
    assert "MISMATCH" in capsys.readouterr().err
    vec.write_text("mul 1 2\n")
    assert main(["fp", str(vec)]) == 2


def test_fp_random_equivalence():
    assert main(["fp", "--random", "500", "--seed", "3"]) == 0


def test_coverage_smoke_and_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    csv = tmp_path / "a.csv"
    assert main(["coverage", "--preset", "smoke_yield1", "--trials", "20", "--out", str(a),
                 f"--csv={csv}"]) == 0
    doc = json.loads(a.read_text())
    assert doc["schema_version"] == 1 and doc["command"] == "coverage"
    assert doc["results"]["fixable_array_rate"] == 1.0
    assert csv.read_text().startswith("trial,")
    args = ["coverage", "--preset", "tableV_sato", "--trials", "30", "--seed", "4"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--jobs", "2"]) == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert json.dumps(ra["results"], sort_keys=True) == json.dumps(rb["results"], sort_keys=True)


def test_coverage_config_errors(tmp_path):
    assert main(["coverage", "--preset", "nope"]) == 2
    assert main(["coverage", "--unknown_key=3"]) == 2
    assert main(["coverage", "--trials=0"]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert main(["coverage", "--config", str(cfg)]) == 2


def test_analog_curves(tmp_path):
    out = tmp_path / "sm.csv"
    assert main(["analog", "--preset", "tableVIII_nodiode", "--mc_samples=0",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "k,sm_mv"
    sm = [float(x.split(",")[1]) for x in lines[1:]]
    assert all(b < a for a, b in zip(sm, sm[1:]))
    assert main(["analog", "--preset", "tableVIII_diode", "--k_max=5", "--mc_samples=100",
                 "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "k,mean,std,min"


def test_diagnose(tmp_path, capsys):
    target = fame_style_array()
    arr = tmp_path / "a.txt"
    arr.write_text(dumps(target.array))
    faults = tmp_path / "f.txt"
    faults.write_text("10 0\n40 15\n")
    out = tmp_path / "d.json"
    assert main(["diagnose", str(arr), str(faults), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["located"] == [[10, 0], [40, 15]]
    assert doc["steps"] == doc["step_formula"] == 32 + 2 * 64
    faults.write_text("")
    assert main(["diagnose", str(arr), str(faults), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["faulty_bitlines"] == []
    lrs = target.array.lrs_cells()[0]
    faults.write_text(f"{lrs[0]} {lrs[1]}\n")
    assert main(["diagnose", str(arr), str(faults)]) == 3


def test_yieldmath(capsys):
    assert main(["yieldmath", "0.99", "2048"]) == 0
    assert "1.150479e-09" in capsys.readouterr().out
    assert main(["yieldmath", "1", "100"]) == 0
    assert "1.000000e+00" in capsys.readouterr().out
    assert main(["yieldmath", "0.99", "256", "--mc-trials", "10000"]) == 0
    assert "sigma" in capsys.readouterr().out
    assert main(["yieldmath", "1.5", "3"]) == 2


def test_config_layering(tmp_path):
    assert set(preset_names()) >= {"tableV_sato", "tableV_ftv30", "tableVIII_nodiode",
                                   "tableVIII_diode", "smoke_yield1"}
    assert parse_overrides(["--trials=5", "--mitigation=FTV", "--vref=0.8"]) == \
        {"trials": 5, "mitigation": "FTV", "vref": 0.8}
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"trials": 7, "seed": 3}))
    merged = load_config(str(cfg), "tableV_ftv30", {"seed": 9})
    assert merged["trials"] == 7 and merged["seed"] == 9 and merged["fault_count"] == 30
    assert set(merged) == set(defaults())
    with pytest.raises(ConfigError):
        load_config(None, None, {"colour": 1})


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "imcfp", "yieldmath", "0.995", "2048"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "3.480722e-05" in r.stdout
