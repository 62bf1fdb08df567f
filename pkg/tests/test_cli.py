import csv
import io
import json
import shutil
import subprocess

import pytest

from susyspin.cli import RunConfig, UsageError, dumps_json, fmt, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.reader(io.StringIO("\n".join(lines))))


def kv(text):
    return {r[0]: r[1] for r in rows(text)[1:]}


def test_bands_single_row(capsys):
    code, out, _ = run_cli(capsys, "bands", "--k", "1", "--b0", "2", "--q-min", "0",
                           "--q-max", "0", "--q-steps", "1")
    assert code == 0
    assert out.splitlines()[0].startswith("# susyspin bands version=")
    assert rows(out) == [["q", "E1", "E2"], ["0", "0.25", "2.25"]]


def test_bands_free_limit(capsys):
    code, out, _ = run_cli(capsys, "bands", "--k", "1", "--b0", "0", "--q-min", "-2",
                           "--q-max", "2", "--q-steps", "9")
    body = rows(out)[1:]
    assert code == 0 and len(body) == 9
    for q, e1, e2 in body:
        q, e1, e2 = float(q), float(e1), float(e2)
        assert e1 == pytest.approx((abs(q) - 0.5) ** 2, abs=1e-12)
        assert e2 == pytest.approx((abs(q) + 0.5) ** 2, abs=1e-12)


def test_classify_unbroken(capsys):
    code, out, _ = run_cli(capsys, "classify", "--k", "1", "--b0", "0.5")
    data = kv(out)
    assert code == 0
    assert data["phase"] == "Unbroken"
    assert data["q0"] == "±0.433012701892"


def test_classify_tanh_broken(capsys):
    code, out, _ = run_cli(capsys, "classify", "--k", "1", "--b0", "2", "--w", "tanh",
                           "--alpha", "0.5")
    data = kv(out)
    assert code == 0 and data["phase"] == "Broken"
    assert float(data["lambda"]) == pytest.approx(0.8660254, abs=1e-7)
    assert float(data["b0_threshold"]) == pytest.approx(2 ** 0.5, abs=1e-11)


def test_classify_zero_pitch(capsys):
    code, _, err = run_cli(capsys, "classify", "--k", "0", "--b0", "1")
    assert code == 2 and "k must be nonzero" in err


def test_classify_numeric_json(capsys):
    code, out, _ = run_cli(capsys, "classify", "--k", "1", "--b0", "2", "--numeric", "--n",
                           "256", "--periods", "1", "--levels", "4", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["method"] == "Both" and doc["phase"] == "Broken"
    assert doc["ground_energy_minus"] == pytest.approx(0.25, abs=0.02)


def test_ring_rejects_fractional_periods(capsys):
    code, _, err = run_cli(capsys, "ring", "--k", "1", "--b0", "0.5", "--periods", "1.5",
                           "--n", "64", "--levels", "2")
    assert code == 2 and "4*pi*m/k" in err


def test_ring_broken_rows(capsys):
    code, out, _ = run_cli(capsys, "ring", "--k", "1", "--b0", "2", "--periods", "1",
                           "--n", "512", "--levels", "3")
    body = rows(out)
    assert code == 0 and body[0] == ["index", "E_minus", "E_plus"]
    assert [r[0] for r in body[1:]] == ["0", "1", "2"]
    assert float(body[1][1]) == pytest.approx(0.25, abs=5e-3)
    assert float(body[1][1]) == pytest.approx(float(body[1][2]), abs=1e-9)


def test_ring_single_sector(capsys):
    code, out, _ = run_cli(capsys, "ring", "--k", "1", "--b0", "2", "--periods", "1",
                           "--n", "128", "--levels", "2", "--sector", "plus")
    body = rows(out)[1:]
    assert code == 0 and all(r[1] == "" and r[2] for r in body)


def test_ring_dump_states(capsys, tmp_path):
    path = tmp_path / "states.csv"
    code, _, _ = run_cli(capsys, "ring", "--k", "1", "--b0", "2", "--periods", "1",
                         "--n", "64", "--levels", "2", "--dump-states", str(path))
    table = list(csv.reader(path.open()))
    assert code == 0
    assert table[0] == ["sector", "level", "z", "re_up", "im_up", "re_down", "im_down"]
    assert len(table) == 1 + 2 * 2 * 64
    norm = sum(sum(float(x) ** 2 for x in r[3:]) for r in table[1:65]) * (4 * 3.141592653589793 / 64)
    assert norm == pytest.approx(1.0, abs=1e-9)


@pytest.mark.filterwarnings("ignore::susyspin.solver.BoxEdgeWarning")
def test_bound_tanh(capsys):
    code, out, _ = run_cli(capsys, "bound", "--w", "tanh", "--alpha", "1.5", "--k", "1",
                           "--b0", "2", "--length", "40", "--n", "4000", "--levels", "2")
    body = rows(out)
    assert code == 0
    assert float(body[1][1]) < 1e-3 and float(body[1][2]) > 0.01


def test_sweep_free(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--param", "b0", "--from", "0", "--to", "2",
                           "--steps", "201", "--k", "1")
    body = rows(out)[1:]
    assert code == 0 and len(body) == 201
    assert out.splitlines()[-1].startswith("# summary threshold=1 ")
    phases = [r[1] for r in body]
    flip = phases.index("Broken")
    assert set(phases[:flip]) == {"Unbroken"} and set(phases[flip:]) == {"Broken"}


def test_sweep_tanh(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--param", "b0", "--from", "0", "--to", "5",
                           "--steps", "11", "--k", "1", "--w", "tanh", "--alpha", "1.5")
    assert code == 0 and "threshold=3.16227766017 " in out.splitlines()[-1]


def test_sweep_empty_range(capsys):
    code, _, err = run_cli(capsys, "sweep", "--from", "2", "--to", "0", "--steps", "5", "--k", "1")
    assert code == 2 and "empty" in err


def test_zeromode_plus(capsys):
    code, out, _ = run_cli(capsys, "zeromode", "--k", "1", "--b0", "0.5", "--sector", "plus")
    data = kv(out)
    assert code == 0
    assert float(data["q0"]) == pytest.approx(0.4330127, abs=1e-7)
    assert float(data["ratio_re"]) == pytest.approx(0.2679492, abs=1e-7)
    assert float(data["residual"]) < 1e-12


def test_zeromode_broken(capsys):
    code, out, _ = run_cli(capsys, "zeromode", "--k", "1", "--b0", "2", "--sector", "minus")
    assert code == 0 and "none: SUSY broken" in out


def test_usage_errors(capsys):
    assert run_cli(capsys, "bands", "--k", "1")[0] == 2
    assert run_cli(capsys, "nosuch")[0] == 2
    assert run_cli(capsys, "classify", "--k", "1", "--b0", "2", "--w", "tanh")[0] == 2
    assert run_cli(capsys, "classify", "--k", "1", "--b0", "2", "--w", "tanh",
                   "--alpha", "-1")[0] == 2


def test_out_file(capsys, tmp_path):
    path = tmp_path / "bands.csv"
    code, out, _ = run_cli(capsys, "bands", "--k", "1", "--b0", "2", "--q-min", "0",
                           "--q-max", "1", "--q-steps", "3", "--out", str(path))
    assert code == 0 and out == "" and path.read_text().count("\n") == 5


@pytest.mark.parametrize("argv", [
    ["bands", "--k", "1", "--b0", "0.5", "--q-min", "-1", "--q-max", "1", "--q-steps", "7"],
    ["classify", "--k", "1", "--b0", "2", "--w", "tanh", "--alpha", "1.5"],
    ["zeromode", "--k", "1", "--b0", "0.5", "--sector", "minus"],
    ["sweep", "--from", "0", "--to", "2", "--steps", "5", "--k", "1"],
])
def test_json_round_trip(capsys, argv):
    code, out, _ = run_cli(capsys, *argv, "--format", "json")
    assert code == 0
    assert dumps_json(json.loads(out)) == out


def test_run_config_rejects_unknown_keys():
    with pytest.raises(UsageError, match="bogus"):
        RunConfig("bands", {"k": 1, "bogus": 2})
    with pytest.raises(UsageError):
        RunConfig("plot")


def test_fmt():
    assert fmt(-0.0) == "0"
    assert fmt(0.1 + 0.2) == "0.3"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(None) == ""


@pytest.mark.skipif(shutil.which("susyspin") is None, reason="console script not installed")
def test_console_script_exit_codes():
    ok = subprocess.run(["susyspin", "zeromode", "--k", "1", "--b0", "2", "--sector", "minus"],
                        capture_output=True, text=True)
    bad = subprocess.run(["susyspin", "classify", "--k", "0", "--b0", "1"],
                         capture_output=True, text=True)
    assert ok.returncode == 0 and bad.returncode == 2
