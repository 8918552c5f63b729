import json
from pathlib import Path

import pytest

from dmbm.cli import (EXIT_IO, EXIT_OK, EXIT_RESOURCE, EXIT_VALIDATION, SpecError, main, parse_grid,
                      resolve_spec)
from dmbm.io import ResultTable, read_results, to_csv, to_json, write_results

RECIPES = Path(__file__).resolve().parent.parent / "recipes"

SMALL_BER = {
    "kind": "ber",
    "systems": [{"system": "DMBM", "M": 2, "m_rf": 1}, {"system": "SM", "M": 4, "n_T": 2}],
    "n_R": 2,
    "snr_db": {"start": 0, "stop": 6, "step": 3},
    "stopping": {"min_bit_errors": 100, "max_trials": 4000, "block_size": 500},
}


@pytest.fixture
def spec_file(tmp_path):
    def make(doc, name="spec.json"):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)
    return make


def run(argv, capsys):
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_simulate_writes_long_csv(spec_file, tmp_path, capsys):
    out = tmp_path / "ber.csv"
    rc, stdout, _ = run(["simulate", "--spec", spec_file(SMALL_BER), "--out", str(out)], capsys)
    assert rc == EXIT_OK and stdout.strip() == str(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "snr_db,system,trials,bit_errors,ber,ci95"
    assert len(lines) == 1 + 2 * 3
    meta = json.loads((tmp_path / "ber.csv.meta.json").read_text())["metadata"]
    assert meta["seed"] == 0 and meta["spec"]["stopping"]["max_trials"] == 4000
    assert meta["spec"]["systems"][0]["phi_deg"] is None  # defaults are recorded
    assert {"version", "timestamp"} <= set(meta)


def test_default_output_dir_from_environment(spec_file, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DMBM_OUTPUT_DIR", str(tmp_path / "outdir"))
    rc, stdout, _ = run(["simulate", "--spec", spec_file(SMALL_BER, "mine.json"), "--format", "json"], capsys)
    assert rc == EXIT_OK
    path = tmp_path / "outdir" / "mine.json"
    assert stdout.strip() == str(path)
    doc = json.loads(path.read_text())
    assert doc["columns"] == ["snr_db", "system", "trials", "bit_errors", "ber", "ci95"]
    assert len(doc["rows"]) == 6


def test_compare_is_wide(spec_file, tmp_path, capsys):
    doc = dict(SMALL_BER, kind="compare")
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--spec", spec_file(doc), "--out", str(out)]) == EXIT_OK
    table, _ = read_results(out)
    assert table.columns == ["snr_db", "DMBM", "SM"]
    assert table.column("snr_db") == [0.0, 3.0, 6.0]
    assert "snr_at_ber_1e-3" in table.metadata["results"]


def test_fig7b_recipe_shape(tmp_path, capsys):
    out = tmp_path / "f7b.csv"
    rc, _, _ = run(["compare", "--spec", str(RECIPES / "fig7b_compare_nr4.json"), "--out", str(out),
                    "--grid", "0:4:4", "--max-trials", "500"], capsys)
    assert rc == EXIT_OK
    header = out.read_text().splitlines()[0].split(",")
    assert header == ["snr_db", "DMBM", "MBM", "QSM", "SM"]
    meta = json.loads((tmp_path / "f7b.csv.meta.json").read_text())["metadata"]
    assert [s["label"] for s in meta["spec"]["systems"]] == ["DMBM", "MBM", "QSM", "SM"]
    from dmbm.analysis import config_for
    etas = {config_for(s["system"], s["M"], s["n_R"], s["n_T"], s["m_rf"]).eta for s in meta["spec"]["systems"]}
    assert etas == {10} and all(s["n_R"] == 4 for s in meta["spec"]["systems"])


def test_theory_recipe_three_columns(tmp_path, capsys):
    out = tmp_path / "th.csv"
    assert main(["theory", "--spec", str(RECIPES / "fig7a_theory.json"), "--out", str(out)]) == EXIT_OK
    table, _ = read_results(out)
    assert table.columns == ["snr_db", "DMBM m_rf=2", "DMBM m_rf=3", "DMBM m_rf=4"]
    row = dict(zip(table.columns, table.rows[-1]))
    assert row["DMBM m_rf=2"] < row["DMBM m_rf=3"] < row["DMBM m_rf=4"]


@pytest.mark.parametrize("cmd,recipe,header", [
    ("capacity", "fig6a_capacity.json", "snr_db,system,capacity_bits,stderr"),
    ("complexity", "table1_complexity.json", "system,eta,real_multiplications"),
    ("efficiency", "fig4a_energy_saving.json", "system,eta,energy_saving_pct"),
])
def test_report_headers(cmd, recipe, header, tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main([cmd, "--spec", str(RECIPES / recipe), "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == header


def test_complexity_values(tmp_path):
    out = tmp_path / "c.csv"
    main(["complexity", "--spec", str(RECIPES / "table1_complexity.json"), "--out", str(out)])
    table, _ = read_results(out)
    rows = {r[0]: r for r in table.rows}
    assert rows["DMBM"][2] == 12288 and rows["MBM"][2] == 768


def test_efficiency_with_theory(spec_file, tmp_path):
    doc = {"kind": "efficiency", "systems": ["SM", "DMBM"], "M": 2, "n_T": 2, "m_rf": 1, "n_R": 2,
           "snr_db": [10, 20], "tau_s": 0.5}
    out = tmp_path / "e.csv"
    assert main(["efficiency", "--spec", spec_file(doc), "--out", str(out)]) == EXIT_OK
    recs = read_results(out)[0].records()
    assert [r["system"] for r in recs] == ["SM", "SM", "DMBM", "DMBM"]
    dm = recs[3]
    assert dm["throughput"] == pytest.approx((1 - dm["aber"]) * 4 / 0.5)
    assert recs[0]["energy_saving_pct"] == pytest.approx(50.0) and dm["energy_saving_pct"] == 0.0


def test_angle_sweep_output(spec_file, tmp_path):
    doc = {"kind": "angle-sweep", "systems": [{"system": "DMBM", "M": 4, "m_rf": 1}], "n_R": 2,
           "snr_db": [8], "angles_deg": {"start": 0, "stop": 90, "step": 45},
           "stopping": {"min_bit_errors": 50, "max_trials": 4000, "block_size": 1000}}
    out = tmp_path / "a.csv"
    assert main(["angle-sweep", "--spec", spec_file(doc), "--out", str(out)]) == EXIT_OK
    table, _ = read_results(out)
    assert table.columns == ["snr_db", "angle_deg", "system", "trials", "bit_errors", "ber", "ci95"]
    assert table.column("angle_deg") == [0.0, 45.0, 90.0]
    assert table.metadata["results"]["optimum"][0]["argmin_deg"] == 45.0


def test_validate_prints_resolved_spec(spec_file, capsys):
    rc, out, _ = run(["validate", "--spec", spec_file(SMALL_BER)], capsys)
    assert rc == EXIT_OK
    resolved = json.loads(out)
    assert resolved["snr_db"] == [0.0, 3.0, 6.0]
    assert resolved["stopping"]["ber_floor"] is None


@pytest.mark.parametrize("patch,needle", [
    ({"snr_db": {"start": 5, "stop": 0, "step": 1}}, "grid is empty"),
    ({"snr_db": []}, "grid is empty"),
    ({"systems": [{"system": "OFDM", "M": 4}]}, "unknown system tag"),
    ({"systems": [{"system": "DMBM", "M": 3, "m_rf": 2}]}, "power of two"),
    ({"systems": [{"system": "SM", "M": 4, "n_T": 3}]}, "n_T"),
    ({"systems": [{"system": "DMBM", "M": 4, "m_rf": 0}]}, "m_rf"),
    ({"systems": []}, "systems"),
    ({"stopping": {"min_errors": 5}}, "stopping"),
    ({"bogus": 1}, "unknown spec keys"),
    ({"kind": "theory"}, "does not match"),
])
def test_validation_errors(patch, needle, spec_file, capsys):
    doc = dict(SMALL_BER, **patch)
    rc, _, err = run(["simulate", "--spec", spec_file(doc)], capsys)
    assert rc == EXIT_VALIDATION
    assert needle in err


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    rc, _, err = run(["validate", "--spec", str(p)], capsys)
    assert rc == EXIT_VALIDATION and "not valid JSON" in err


def test_unreadable_spec(tmp_path, capsys):
    rc, _, err = run(["simulate", "--spec", str(tmp_path / "missing.json")], capsys)
    assert rc == EXIT_IO and "I/O" in err


def test_unwritable_output(spec_file, tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    doc = {"kind": "complexity", "systems": ["DMBM"], "M": 4, "m_rf": 2}
    rc, _, err = run(["complexity", "--spec", spec_file(doc), "--out", str(blocker / "out.csv")], capsys)
    assert rc == EXIT_IO


def test_resource_cap(spec_file, capsys):
    doc = {"kind": "theory", "systems": [{"system": "DMBM", "M": 16, "m_rf": 3}], "snr_db": [10]}
    rc, _, err = run(["theory", "--spec", spec_file(doc)], capsys)
    assert rc == EXIT_RESOURCE and "subsample" in err
    doc = dict(SMALL_BER, systems=[{"system": "DMBM", "M": 16, "m_rf": 7}])
    rc, _, err = run(["simulate", "--spec", spec_file(doc)], capsys)
    assert rc == EXIT_RESOURCE


def test_cli_overrides(spec_file, tmp_path):
    out = tmp_path / "o.csv"
    main(["simulate", "--spec", spec_file(SMALL_BER), "--out", str(out), "--seed", "9",
          "--grid", "1:2:1", "--max-trials", "1000"])
    table, _ = read_results(out)
    assert table.metadata["seed"] == 9
    assert sorted(set(table.column("snr_db"))) == [1.0, 2.0]
    assert max(table.column("trials")) <= 1000


def test_parse_grid():
    assert parse_grid("0:10:2.5") == {"start": 0.0, "stop": 10.0, "step": 2.5}
    with pytest.raises(SpecError):
        parse_grid("0-10")


def test_grid_has_no_float_drift():
    spec = resolve_spec(dict(SMALL_BER, snr_db={"start": 0, "stop": 1, "step": 0.1}))
    assert spec["snr_db"][3] == 0.3 and len(spec["snr_db"]) == 11


def test_duplicate_systems_get_distinct_labels():
    spec = resolve_spec({"kind": "theory", "systems": [{"system": "DMBM", "m_rf": 2}, {"system": "DMBM", "m_rf": 3}],
                         "M": 2, "snr_db": [0]})
    assert [s["label"] for s in spec["systems"]] == ["DMBM(M=2,m_rf=2,n_R=1)", "DMBM(M=2,m_rf=3,n_R=1)"]


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_results_roundtrip_bytes(fmt, tmp_path):
    t = ResultTable("ber", ["snr_db", "system", "trials", "ber", "note"],
                    [[0.1, "A,B", 3, 1 / 3, None], [2.0, "C", 10, float("nan"), "x"], [1e-17, "D", 0, 0.0, None]],
                    {"seed": 1, "spec": {"a": [1, 2]}})
    p1 = write_results(t, tmp_path / f"a.{fmt}", fmt)
    back, got_fmt = read_results(p1)
    assert got_fmt == fmt
    p2 = write_results(back, tmp_path / f"b.{fmt}", fmt)
    assert p1.read_bytes() == p2.read_bytes()
    if fmt == "csv":
        assert (tmp_path / "a.csv.meta.json").read_bytes() == (tmp_path / "b.csv.meta.json").read_bytes()
    assert back.rows[0][:4] == [0.1, "A,B", 3, 1 / 3]


def test_serializers_are_stable():
    t = ResultTable("x", ["a"], [[0.1 + 0.2]], {})
    assert to_csv(t) == "a\n0.30000000000000004\n"
    assert '"a": 0.30000000000000004' in to_json(t)


def test_recipe_output_roundtrip(tmp_path):
    out = tmp_path / "t.csv"
    main(["theory", "--spec", str(RECIPES / "fig7a_theory.json"), "--out", str(out)])
    table, fmt = read_results(out)
    again = write_results(table, tmp_path / "t2.csv", fmt)
    assert again.read_bytes() == out.read_bytes()


def test_all_recipes_validate(capsys):
    recipes = sorted(RECIPES.glob("*.json"))
    assert len(recipes) >= 12
    for r in recipes:
        assert main(["validate", "--spec", str(r)]) == EXIT_OK, r.name
