import pytest

from sudler.calibration import load_fixtures, save_fixtures
from sudler.cli import main
from sudler.serialize import load_json, table_from_dict, table_to_dict


def test_verify_constants_stdout(capsys):
    rc = main(["verify", "--suite", "constants"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "Vol(4_1)" in out
    assert "PASS" in out


def test_scan_prints_argmax_digits(capsys, tmp_path):
    out = tmp_path / "scan.json"
    rc = main(["scan", "--alpha", "[0;(6)]", "--K", "3", "--c", "2",
               "--out", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "[5, 5, 5]" in text
    doc = load_json(str(out))
    assert doc["schema_version"] == 1
    assert doc["sums"]["2.0"].startswith("0x")


def test_cf_table_roundtrip(tmp_path):
    out = tmp_path / "table.json"
    rc = main(["cf", "--alpha", "[0;2,(1,4)]", "--K", "6", "--out", str(out)])
    assert rc == 0
    doc = load_json(str(out))
    assert table_to_dict(table_from_dict(doc)) == doc


def test_ostrowski_command(capsys):
    rc = main(["ostrowski", "--alpha", "[0;(2)]", "--K", "3", "--N", "8"])
    assert rc == 0
    assert "[1, 1, 1]" in capsys.readouterr().out


def test_cotangent_csv(tmp_path):
    out = tmp_path / "v.csv"
    rc = main(["cotangent", "--alpha", "[0;(15)]", "--k", "4",
               "--grid", "-0.9:0.9:0.3", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# schema_version=1"
    assert lines[1] == "x,direct,main_term,residual"
    assert len(lines) == 2 + 7


def test_limitfn_csv_columns(tmp_path):
    out = tmp_path / "curve.csv"
    rc = main(["limitfn", "--alpha", "[0;(15)]", "--k", "4",
               "--grid", "-1:1:0.5", "--closed-form", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "x,empirical,closed_form,two_sin"
    assert len(lines) == 2 + 5  # -1, -0.5, 0, 0.5, 1


def test_bad_grid_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["limitfn", "--alpha", "[0;(15)]", "--k", "4", "--grid", "1:0:0.1"])
    assert exc.value.code == 2


def test_bad_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_figures_fig1_columns(tmp_path):
    rc = main(["figures", "--which", "fig1", "--grid", "-1:1:0.25",
               "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "fig1.csv").read_text().splitlines()
    assert lines[1] == "x,a5,a15,a50,two_sin"
    assert len(lines) == 2 + 9


def test_figures_fig3_residual_column(tmp_path, fixtures):
    rc = main(["figures", "--which", "fig3", "--grid", "-0.9:0.9:0.1",
               "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "fig3.csv").read_text().splitlines()
    assert lines[1] == "x,empirical,closed_form,residual"
    resids = [abs(float(row.split(",")[3])) for row in lines[2:]]
    assert max(resids) <= fixtures["limit_curve"]["fig3_residual_max"]


def test_missing_fixtures_directs_to_calibrate(capsys, tmp_path):
    rc = main(["verify", "--suite", "theorem3", "--alpha", "[0;(30)]",
               "--K", "3", "--fixtures", str(tmp_path / "none.json")])
    assert rc == 1
    assert "calibrate" in capsys.readouterr().err


def test_fixture_serialization_deterministic(tmp_path):
    fx = load_fixtures()
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_fixtures(fx, str(p1))
    save_fixtures(fx, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    assert load_fixtures(str(p1)) == fx


def test_calibration_entries_deterministic():
    # component calibrations are pure; two runs agree exactly
    from sudler.calibration import _dk_main_slack, _theorem3

    assert _dk_main_slack() == _dk_main_slack()
    assert _theorem3() == _theorem3()


def test_fixture_schema(fixtures):
    for key in ("vk_envelope", "vk_star_envelope", "limit_curve", "theorem1",
                "theorem2", "theorem3", "argmax_digit_distance", "b_transfer",
                "ek_residual", "un_residual", "dk_main_slack"):
        assert key in fixtures


def test_env_var_sets_default_bits(monkeypatch, capsys):
    monkeypatch.setenv("SUDLER_BITS", "128")
    rc = main(["cf", "--alpha", "golden", "--K", "4"])
    assert rc == 0


def test_rational_depth_error_exits_1(capsys):
    rc = main(["cf", "--alpha", "[0;2,3]", "--K", "5"])
    assert rc == 1
    assert "convergent" in capsys.readouterr().err


def test_verify_report_json(tmp_path):
    out = tmp_path / "report.json"
    rc = main(["verify", "--suite", "theorem2", "--alpha", "[0;(30)]", "--K", "3",
               "--c", "0.5,2,64", "--out", str(out)])
    assert rc == 0
    doc = load_json(str(out))
    assert doc["pass"] is True
    assert len(doc["reports"]) == 3
    assert all(r["pass"] for r in doc["reports"])
