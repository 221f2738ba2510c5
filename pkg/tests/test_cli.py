import csv
import io
import json
import subprocess
import sys

import pytest

from pseudospin.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_splittings_csv(capsys):
    code, out, _ = run(capsys, "splittings", "--j", "1.5", "--n", "0", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    vals = sorted(float(r["value"]) for r in rows)
    assert vals[2] == pytest.approx(1.207, abs=1e-3) and vals[3] == pytest.approx(4.306, abs=1e-3)
    assert all(r["route"] == "analytic" for r in rows)


def test_splittings_large_n_fit(capsys):
    code, out, _ = run(capsys, "splittings", "--j", "4", "--n", "10000")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    errs = [r["fit_rel_error"] for r in data["rows"] if r["fit_rel_error"] is not None]
    assert len(errs) == 4 and max(errs) < 0.02


def test_output_is_deterministic(capsys):
    a = run(capsys, "splittings", "--j", "0.5", "1", "2.5", "--n", "0", "3")[1]
    b = run(capsys, "splittings", "--j", "0.5", "1", "2.5", "--n", "0", "3")[1]
    assert a == b


def test_populations_block_and_full(capsys):
    code, out, _ = run(capsys, "populations", "--j", "1.5", "--n", "4", "--t-points", "5", "--format", "csv")
    assert code == 0
    block = list(csv.DictReader(io.StringIO(out)))
    code, out, _ = run(capsys, "populations", "--mode", "full", "--N", "3", "--n", "4",
                       "--t-points", "5", "--format", "csv")
    assert code == 0
    full = list(csv.DictReader(io.StringIO(out)))
    for b, f in zip(block, full):
        assert float(b["m=-3/2,n=4"]) == pytest.approx(float(f["000,n=4"]), abs=1e-9)


def test_decompose(capsys):
    code, out, _ = run(capsys, "decompose", "--N", "4", "--n-max", "2")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    assert data["multiplicities"] == {"2": 1, "1": 3, "0": 2}
    assert data["dimension_sum"] == 16


def test_decompose_fixture(capsys):
    code, out, _ = run(capsys, "decompose", "--N", "3", "--fixture", "--format", "csv")
    assert code == 0
    assert out.splitlines() == ["j,abundance,found", "3/2,1,1", "1/2,2,2"]


def test_switch(capsys):
    code, out, _ = run(capsys, "switch", "--N", "3", "--k", "1")
    data = json.loads(out)
    assert code == 0 and data["passed"] and data["lowering_residual"] < 1e-9
    code, out, _ = run(capsys, "switch", "--fixture", "q6_to_singlet")
    assert code == 0 and json.loads(out)["lowering_residual"] < 1e-9


def test_switch_unknown_fixture(capsys):
    code, _, err = run(capsys, "switch", "--fixture", "nope")
    assert code == 2 and "unknown fixture" in err


def test_decay(capsys):
    code, out, _ = run(capsys, "decay", "--N", "3")
    data = json.loads(out)
    assert code == 0
    assert (data["recovery_probability"]["numerator"], data["recovery_probability"]["denominator"]) == (2, 3)
    code, out, _ = run(capsys, "decay", "--N", "3", "--format", "csv")
    assert "prepared/decayed/recovered" in out


def test_dephasing(capsys):
    code, out, _ = run(capsys, "dephasing", "--phi", "1", "--t-end", "50")
    data = json.loads(out)
    assert code == 0 and data["passed"] and data["steady_state_reached"]
    assert data["closed_form_max_deviation"] < 1e-8


def test_dephasing_csv(capsys):
    code, out, _ = run(capsys, "dephasing", "--phi", "0.5", "--t-end", "2", "--t-points", "3", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "t,trace,purity,p_up,mean_photons"


def test_config_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"j": 0.5, "n": [2], "format": "csv"}))
    code, out, _ = run(capsys, "splittings", "--j", "2", "--config", str(cfg))
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2 and rows[0]["j"] == "0.5"


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "splittings", "--config", str(cfg))
    assert code == 2 and "bogus" in err


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "decay", "--N", "3", "--output", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["N"] == 3


@pytest.mark.parametrize("argv", [
    ["splittings", "--j", "0.3"],
    ["populations", "--t-points", "1"],
    ["populations", "--mode", "full", "--N", "3", "--bitstring", "01"],
    ["splittings", "--g", "-1"],
])
def test_invalid_input_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "pseudospin.cli", "splittings", "--j", "0.5", "--n", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["passed"]
