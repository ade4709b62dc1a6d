import json

import pytest
import yaml

from faultline import corpus
from faultline import report as R
from faultline.cli import main
from faultline.errors import SchemaMismatch


def test_instrument_prints_xor_and_registry(capsys, tmp_path):
    reg = tmp_path / "r.yaml"
    assert main(["instrument", "print_message", "--registry", str(reg)]) == 0
    out = capsys.readouterr().out
    assert "^ fault_4" in out
    doc = yaml.safe_load(reg.read_text())
    assert len(doc["sites"]) == 6 and doc["model"] == "both"


def test_instrument_test_inversion_only_conditions(tmp_path):
    reg = tmp_path / "r.yaml"
    assert main(["instrument", "print_message", "--model", "test-inversion", "--registry", str(reg)]) == 0
    sites = yaml.safe_load(reg.read_text())["sites"]
    assert sites and all(s["kind"] == "test-condition" for s in sites)


def test_attack_finds_the_mask_fault(capsys, tmp_path):
    out = tmp_path / "rep.json"
    code = main(["attack", "print_message", "--deps", "--brute-force", "--budget", "60", "--json", str(out)])
    assert code == 1
    rep = R.load(out)
    assert [sorted({f[0] for f in a["faults"]}) for a in rep.attacks] == [[4]]
    assert "fault_4" in capsys.readouterr().out


def test_attack_safe_exit_code():
    assert main(["attack", "bootloader_model", "--max-faults", "1", "--budget", "120"]) == 0


def test_attack_incomplete_exit_code(tmp_path):
    src = tmp_path / "loop.fic"
    src.write_text("void main(u32 n) {\n u32 i;\n u32 s = 0;\n for (i = 0; i < n; i++) s = s + 1;\n"
                   " //@ assert s != 5000;\n}\n")
    assert main(["attack", str(src), "--max-faults", "0", "--budget", "2"]) == 2


@pytest.mark.parametrize("flags", [
    ["--brute-force", "--max-faults", "2"],
    ["--shrink", "--max-faults", "2"],
    ["--grow", "--shrink"],
])
def test_flag_conflicts(flags, capsys):
    assert main(["attack", "print_message", *flags]) == 3
    assert "error" in capsys.readouterr().err


def test_select_then_attack_with_strategy(tmp_path):
    s = tmp_path / "s.yaml"
    assert main(["select", "print_message", "--deps", "--brute-force", "-o", str(s)]) == 0
    assert yaml.safe_load(s.read_text())["sites"] == ["fault_4"]
    assert main(["attack", "print_message", "--strategy", str(s), "--budget", "60"]) == 1


def test_program_without_assertions(tmp_path, caplog):
    src = tmp_path / "plain.fic"
    src.write_text("void main(u32 x) {\n u32 y = x + 1;\n __print(y);\n}\n")
    out = tmp_path / "s.yaml"
    assert main(["select", str(src), "--deps", "-o", str(out)]) == 0
    assert yaml.safe_load(out.read_text())["sites"] == []
    assert "no assertions" in caplog.text


def test_missing_file_is_an_error():
    assert main(["attack", "/nonexistent/x.fic"]) == 3


def _report(label, version=R.REPORT_VERSION):
    return R.RunReport("p", {"sites": ["fault_1"]}, {"sites": [1], "max_faults": 1, "rows": {"1": [0, 1]}, "totals": [0, 1],
                        "explored_paths": 3, "early_traces": 0},
                       label=label, version=version)


def test_report_version_and_compare(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(_report("all").dumps())
    d = json.loads(_report("deps").dumps())
    d["version"] = "9.9"
    b.write_text(json.dumps(d))
    with pytest.raises(SchemaMismatch):
        R.load(b)
    assert main(["report", str(a), str(b)]) == 3
    b.write_text(_report("deps").dumps())
    text = R.compare([R.load(a), R.load(b)])
    assert "all" in text and "deps" in text


def test_report_round_trip():
    rep = _report("x")
    assert R.RunReport.loads(rep.dumps()) == rep
    assert rep.exit_code == R.EXIT_SAFE
