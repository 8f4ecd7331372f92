import csv
import json
from pathlib import Path

import pytest

from mixinglab import cli, verify

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_bound_prints_reference_value(capsys):
    code, out, _ = run(capsys, "bound", "--config", CONFIGS / "bound.ini")
    assert code == 0
    assert out == format(120 ** -0.5, ".12g") + "\n"


@pytest.mark.parametrize(
    "body, expected",
    [
        ("kind = theorem_3_3\nlam = 12\nrho = 10", 120 ** -0.5),
        ("kind = theorem_3_3\na_values = 2, 8\nrep = adjoint\nq = 1", (80 * 68) ** -0.5),
        ("kind = corollary_adjoint\na_values = 2, 8", (80 * 68) ** -0.5),
        ("kind = theorem_4_2\nlam = 8\nrho = 8\nA = 1\nsobolev_norms = 2 3", 18.0),
        ("kind = theorem_4_1\nlam = 8\nrho = 8\nA = 1\nd0 = 4\nsup_norms = 2 3\npm_norms = 0.5 1", 3.0),
    ],
)
def test_bound_kinds(tmp_path, capsys, body, expected):
    cfg = write(tmp_path, "[bound]\n" + body + "\n")
    code, out, _ = run(capsys, "bound", "--config", cfg)
    assert code == 0
    assert float(out) == pytest.approx(expected, rel=1e-11)


def test_bound_flags_inapplicable_input(tmp_path, capsys):
    cfg = write(tmp_path, "[bound]\nkind = corollary_standard\na_values = 2, 8\nC_prime = 3\n")
    code, out, err = run(capsys, "bound", "--config", cfg)
    assert code == 0 and out == "NA\n" and "not applicable" in err


def test_reduce_json(tmp_path, capsys):
    out = tmp_path / "split.json"
    code, _, _ = run(capsys, "reduce", "--config", CONFIGS / "reduce.ini", "--out", out)
    data = json.loads(out.read_text())
    assert code == 0 and data["schema_version"] == cli.SCHEMA_VERSION
    assert data["split"]["a_hat"] == ["4", 1, "1/4"] and data["centralizes"]


def test_correlate_json(tmp_path, capsys):
    cfg = write(
        tmp_path,
        "[correlate]\nmatrix = 2 1; 1 1\nfunctions = -1 1 0 : 1, 1 0 0 : 1\npowers = 1\nmc_samples = 1000\n",
    )
    code, out, _ = run(capsys, "correlate", "--config", cfg)
    data = json.loads(out)
    assert code == 0
    assert data["report"]["exact_re"] == 1.0 and data["report"]["exact_im"] == 0.0
    assert data["seed"] == 20240607


def test_function_file_descriptor(tmp_path, capsys):
    (tmp_path / "f.json").write_text(json.dumps({"dim": 3, "terms": [{"freq": [1, 0, 0], "re": 1, "im": 0}]}))
    cfg = write(tmp_path, "[correlate]\nmatrix = 2 1; 1 1\nfunctions = -1 1 0 : 1, @f.json\npowers = 1\n")
    code, out, _ = run(capsys, "correlate", "--config", cfg)
    assert code == 0 and json.loads(out)["report"]["exact_re"] == 1.0


def test_decay_csv_and_sidecar(tmp_path, capsys):
    out = tmp_path / "decay.csv"
    code, _, _ = run(capsys, "decay", "--config", CONFIGS / "decay.ini", "--out", out)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 10
    assert all(r["ratio"] != "NA" and float(r["ratio"]) <= 1 for r in rows)
    meta = json.loads(Path(str(out) + ".meta.json").read_text())
    assert meta["schema_version"] == cli.SCHEMA_VERSION and meta["C_calibrated"]
    assert meta["config"]["powers"] == "1..10" and len(meta["rows"]) == 10


def test_decay_is_byte_identical_with_mc(tmp_path, capsys):
    text = (CONFIGS / "decay.ini").read_text().replace("powers = 1..10", "powers = 1..3") + "mc_samples = 4000\nworkers = 2\n"
    cfg = write(tmp_path, text)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "decay", "--config", cfg, "--out", a)
    run(capsys, "decay", "--config", cfg, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    assert Path(str(a) + ".meta.json").read_bytes() == Path(str(b) + ".meta.json").read_bytes()


def test_calibrate_json(tmp_path, capsys):
    code, out, _ = run(capsys, "calibrate", "--config", CONFIGS / "calibrate.ini")
    data = json.loads(out)
    assert code == 0 and data["valid"] and data["checked"] == 4 and data["q"] == "1/3"


def test_verify_default_suite_passes(capsys):
    code, out, _ = run(capsys, "verify", "--config", CONFIGS / "verify.ini")
    assert code == 0
    assert out.count("PASS") == len(verify.DEFAULT_SUITES)


def test_verify_failure_dumps_witness(tmp_path, capsys, monkeypatch):
    bad = verify.SuiteResult("broken", trials=1)
    bad.fail("identity", m=(1, 2))
    monkeypatch.setattr(verify, "run_all", lambda seed: [bad])
    code, out, _ = run(capsys, "verify", "--config", CONFIGS / "verify.ini")
    assert code == 1
    assert "FAIL broken" in out and '"m": "(1, 2)"' in out


@pytest.mark.parametrize(
    "command, body, key",
    [
        ("bound", "[bound]\na_values = 2, 8\n", "kind"),
        ("bound", "[bound]\nkind = theorem_9\n", "kind"),
        ("bound", "[bound]\nkind = corollary_standard\na_values = 2, x\n", "a_values"),
        ("decay", "[decay]\nmatrix = 2 1; 1 1\nfunctions = box1, box1\npowers = 1..3\nC_prime = oops\n", "C_prime"),
        ("decay", "[decay]\nmatrix = 2 1; 1 2\nfunctions = box1, box1\npowers = 1..3\n", "matrix"),
        ("correlate", "[correlate]\nmatrix = 2 1; 1 1\nfunctions = box1, nosuch\npowers = 1\n", "functions"),
        ("reduce", "[reduce]\nentries = 4 1 1/4\nj = 1\n", "l"),
        ("calibrate", "[decay]\nmatrix = 2 1; 1 1\n", "[calibrate]"),
    ],
)
def test_malformed_config_names_the_key(tmp_path, capsys, command, body, key):
    cfg = write(tmp_path, body)
    code, _, err = run(capsys, command, "--config", cfg)
    assert code == 2
    assert key in err


def test_missing_config_file(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--config", tmp_path / "none.ini")
    assert code == 2 and "cannot read" in err
