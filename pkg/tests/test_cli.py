import csv
import io
import json

import numpy as np
import pytest

from qsot import adc, channel, linalg
from qsot.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def usage_exit(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    return exc.value.code


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_tables_csv(capsys):
    code, out, _ = run(["tables", "--r3", "0.5", "--gamma", "0.5", "--which", "forward"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["table", "first", "sigma0", "sigma1", "sigma2", "sigma3"]
    assert len(rows) == 5
    assert float(rows[1][5]) == pytest.approx(0.75)
    assert float(rows[2][3]) == pytest.approx(np.sqrt(0.5))


def test_tables_json_all(capsys):
    code, out, _ = run(["tables", "--r3", "0.2", "--gamma", "0.6", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    t = adc.tables(0.2, 0.6)
    np.testing.assert_allclose(doc["bayes"], t.bayes, atol=1e-11)
    np.testing.assert_allclose(doc["ls_petz"], t.ls_petz, atol=1e-11)
    assert doc["s3"] == pytest.approx(0.68)


def test_tables_not_invertible(capsys):
    code, out, err = run(["tables", "--r3", "-0.5", "--gamma", "0.15", "--which", "bayes"], capsys)
    assert code == 2
    assert out == ""
    assert "gamma/(gamma-2)" in err
    code, _, _ = run(["tables", "--r3", "-0.5", "--gamma", "0.15", "--which", "forward"], capsys)
    assert code == 0


def test_tables_usage_errors():
    assert usage_exit(["tables", "--r3", "1.0", "--gamma", "0.5"]) == 64
    assert usage_exit(["tables", "--r3", "0.1", "--gamma", "1.5"]) == 64
    assert usage_exit(["tables", "--r3", "0.1"]) == 64
    assert usage_exit(["nonsense"]) == 64
    assert usage_exit(["tables", "--r3", "0.1", "--gamma", "0.5", "--tol", "-1"]) == 64


def test_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["bloch", "--gamma", "0.4", "--n", "30", "--seed", "2", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    for path in (a, b):
        assert main(["region", "--epsilon", "0.1", "0.9", "3", "--gamma", "0.2", "0.8", "3",
                     "--r3", "-0.5", "0.5", "3", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_invert_round_trip(tmp_path, capsys):
    ch = write_json(tmp_path / "ch.json", channel.channel_to_json(adc.adc_channel(0.6)))
    st = write_json(tmp_path / "st.json", {"bloch": [0, 0, 0.2]})
    code, out, _ = run(["invert", ch, st], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["is_cp"] is True
    assert doc["defining_residual"] <= 1e-9
    assert doc["symmetry_residual"] <= 1e-9
    inv = channel.channel_from_json(doc["inverse"])
    assert channel.is_cptp(inv).is_cptp
    assert channel.choi_distance(inv, adc.adc_inverse_closed_form(0.2, 0.6)) <= 1e-9


def test_invert_matrix_state_forms(tmp_path, capsys):
    ch = write_json(tmp_path / "ch.json", channel.channel_to_json(adc.adc_channel(0.3)))
    rho = adc.prior(0.4)
    for doc in (linalg.matrix_to_json(rho), {"matrix": linalg.matrix_to_json(rho)}):
        st = write_json(tmp_path / "st.json", doc)
        code, _, _ = run(["invert", ch, st], capsys)
        assert code == 0


def test_invert_not_cp(tmp_path, capsys):
    ch = write_json(tmp_path / "ch.json", channel.channel_to_json(adc.adc_channel(0.15)))
    st = write_json(tmp_path / "st.json", {"bloch": [0, 0, -0.5]})
    code, out, err = run(["invert", ch, st], capsys)
    assert code == 2
    doc = json.loads(out)
    assert doc["is_cp"] is False and doc["inverse"] is None
    assert doc["min_choi_eig"] < 0
    assert "not completely positive" in err


def test_invert_rank_deficient(tmp_path, capsys):
    ch = write_json(tmp_path / "ch.json", channel.channel_to_json(adc.adc_channel(1.0)))
    st = write_json(tmp_path / "st.json", {"bloch": [0, 0, 0]})
    code, _, _ = run(["invert", ch, st], capsys)
    assert code == 3


def test_invert_parse_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    st = write_json(tmp_path / "st.json", {"bloch": [0, 0, 0]})
    assert run(["invert", str(bad), st], capsys)[0] == 65
    assert run(["invert", str(tmp_path / "missing.json"), st], capsys)[0] == 65
    ch = write_json(tmp_path / "ch.json", channel.channel_to_json(adc.adc_channel(0.3)))
    wrong = write_json(tmp_path / "wrong.json", {"bloch": [0, 0]})
    assert run(["invert", ch, wrong], capsys)[0] == 65
    unphysical = write_json(tmp_path / "unph.json", {"bloch": [0, 0, 2]})
    assert run(["invert", ch, unphysical], capsys)[0] == 65


def test_region_csv(capsys):
    code, out, _ = run(["region", "--epsilon", "0.1", "0.5", "2", "--gamma", "0.5", "0.5", "1",
                        "--r3", "-0.5", "0.5", "3"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["epsilon", "gamma", "r3", "inside"]
    assert len(rows) == 1 + 2 * 1 * 3
    for eps, gamma, r3, inside in rows[1:]:
        assert int(inside) == int(adc.robustness_indicator(float(eps), float(gamma), float(r3)))


def test_region_empty_and_usage(capsys):
    code, out, _ = run(["region", "--epsilon", "0.1", "0.5", "0"], capsys)
    assert code == 0
    assert out.strip().splitlines() == ["epsilon,gamma,r3,inside"]
    assert usage_exit(["region", "--epsilon", "0.5", "0.1", "3"]) == 64
    assert usage_exit(["region", "--r3", "-1", "0.5", "3"]) == 64
    assert usage_exit(["region", "--gamma", "0.1", "0.5", "2.5"]) == 64


def test_bloch_modes(tmp_path, capsys):
    code, out, _ = run(["bloch", "--n", "5"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "y", "z", "x_out", "y_out", "z_out"]
    assert len(rows) == 6
    for row in rows[1:]:
        np.testing.assert_allclose([float(v) for v in row[:3]], [float(v) for v in row[3:]], atol=1e-12)
    code, out, err = run(["bloch", "--gamma", "0.15", "--r3", "-0.5", "--map", "bayes", "--n", "5"], capsys)
    assert code == 0 and "warning" in err
    code, out, _ = run(["bloch", "--gamma", "0.3", "--r3", "0.1", "--map", "petz", "--n", "4",
                        "--format", "json"], capsys)
    assert code == 0 and len(json.loads(out)) == 4
    ch = write_json(tmp_path / "ch.json", channel.channel_to_json(adc.adc_channel(0.3)))
    assert run(["bloch", "--channel", ch, "--n", "3"], capsys)[0] == 0
    assert usage_exit(["bloch", "--gamma", "0.3", "--map", "petz"]) == 64
    assert usage_exit(["bloch", "--n", "0"]) == 64


def test_circuit_command(capsys):
    code, out, _ = run(["circuit", "--alpha", "1", "--beta", "1", "--r3", "0.5", "--gamma", "0.5"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["expectation"] == pytest.approx(np.sqrt(0.5))
    assert doc["stderr"] == 0
    code, out, _ = run(["circuit", "--alpha", "3", "--beta", "0", "--r3", "0.5", "--gamma", "0.5",
                        "--direction", "reverse"], capsys)
    assert code == 0 and json.loads(out)["expectation"] == pytest.approx(0.5)
    code, out, _ = run(["circuit", "--alpha", "1", "--beta", "1", "--r3", "0.5", "--gamma", "0.5",
                        "--mode", "shots", "--shots", "2000", "--seed", "4"], capsys)
    doc = json.loads(out)
    assert doc["shots"] == 2000
    assert abs(doc["expectation"] - np.sqrt(0.5)) <= 5 * doc["stderr"]
    code, _, err = run(["circuit", "--alpha", "1", "--beta", "1", "--r3", "-0.5", "--gamma", "0.15",
                        "--direction", "reverse"], capsys)
    assert code == 2
    assert usage_exit(["circuit", "--alpha", "4", "--beta", "1", "--r3", "0", "--gamma", "0.5"]) == 64
    assert usage_exit(["circuit", "--alpha", "1", "--beta", "1", "--r3", "0", "--gamma", "0.5",
                       "--mode", "shots", "--shots", "0"]) == 64


def test_tol_flag_changes_nothing_for_well_conditioned_input(capsys):
    base = run(["tables", "--r3", "0.3", "--gamma", "0.4"], capsys)[1]
    assert run(["tables", "--r3", "0.3", "--gamma", "0.4", "--tol", "1e-7"], capsys)[1] == base


def test_bad_environment_tolerance(monkeypatch):
    for value in ("abc", "-1", "inf"):
        monkeypatch.setenv("QSOT_TOL", value)
        assert usage_exit(["tables", "--r3", "0.1", "--gamma", "0.2"]) == 64
