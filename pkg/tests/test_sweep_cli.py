import csv
import json
import math

import numpy as np
import pytest

from kerrlab import FrameSpec, SweepSpec, __version__, oracle_check, run_sweep
from kerrlab.cli import load_config, main
from kerrlab.sweep import FORMULAS, SweepSpecError, figure_table, reproduce_figure, sweep_columns


def read_csv(text):
    lines = text.splitlines()
    meta = [l for l in lines if l.startswith("#")]
    rows = list(csv.DictReader(l for l in lines if not l.startswith("#")))
    return meta, rows


@pytest.mark.parametrize(
    "kwargs,field",
    [
        (dict(steps=1), "steps"),
        (dict(start=1.0, stop=1.0), "start/stop"),
        (dict(n_photons=(100.0, -1.0)), "n_photons"),
        (dict(eta=1.2), "eta"),
        (dict(quantities=("variance", "bogus")), "quantities"),
        (dict(kappa4="other"), "kappa4"),
        (dict(axis="t"), "axis"),
    ],
)
def test_invalid_specs_name_the_field(kwargs, field):
    with pytest.raises(SweepSpecError) as err:
        list(run_sweep(SweepSpec(**kwargs)))
    assert err.value.field == field


def test_zero_time_row_is_gaussian():
    spec = SweepSpec(n_photons=(50.0,), axis="chi_t", start=0.0, stop=0.01, steps=3,
                     quantities=("variance", "cumulants", "duan-simon", "reid"), frame=FrameSpec("lab", 0.2))
    first = next(run_sweep(spec))
    assert first["v_x"] == pytest.approx(1.0, abs=1e-12)
    assert abs(first["kappa3"]) < 1e-10
    assert abs(first["kappa4_paper"]) < 1e-10 and abs(first["kappa4_std"]) < 1e-10
    assert first["ds_plus"] == pytest.approx(4.0, abs=1e-10)
    assert first["reid"] == pytest.approx(1.0, abs=1e-10)


def test_row_order_and_columns():
    spec = SweepSpec(n_photons=(10.0, 100.0), start=0.0, stop=1.0, steps=4,
                     quantities=("moments", "asymptotics"), kappa4="standard")
    rows = list(run_sweep(spec))
    assert [r["n_photons"] for r in rows] == [10.0] * 4 + [100.0] * 4
    assert [r["chi_n_t"] for r in rows[:4]] == pytest.approx([0, 1 / 3, 2 / 3, 1])
    cols = sweep_columns(spec)
    assert all(set(cols) <= set(r) for r in rows)
    assert all(r["kappa4_variant"] == "standard" and r["axis"] == "chi_n_t" for r in rows)


def test_entanglement_sweep_finds_violation():
    spec = SweepSpec(n_photons=(1000.0,), axis="chi_t", start=0.0, stop=3e-3, steps=31,
                     eta=0.5, optimize=True, quantities=("duan-simon", "reid"))
    rows = list(run_sweep(spec))
    assert min(r["ds_opt"] for r in rows) < 4
    assert all(r["ds_opt"] <= min(r["ds_plus"], r["ds_minus"]) + 1e-12 for r in rows)
    assert all(r["reid_opt"] <= r["reid"] + 1e-12 for r in rows)


def test_scaled_skew_collapses_toward_cubic():
    table = figure_table(1)
    worst = {}
    for row in table.rows:
        if row["chi_n_t"] >= 0.1:
            err = abs(row["kappa3_scaled"] / row["kappa3_asymptotic_scaled"] - 1)
            worst[row["n_photons"]] = max(worst.get(row["n_photons"], 0.0), err)
    ns = sorted(worst)
    assert all(worst[a] > worst[b] for a, b in zip(ns, ns[1:]))
    assert worst[1e6] < 0.1


def test_figure_five_schema_and_squeezing():
    table = figure_table(5)
    assert {"chi_n_t", "v_x", "v_y"} <= set(table.columns)
    assert min(min(r["v_x"], r["v_y"], r["v_min"]) for r in table.rows) < 1
    assert table.meta["n_photons"] == "1000"


def test_figure_four_schema():
    table = figure_table(4)
    assert {"N", "kappa4_kerr", "kappa4_number_state"} <= set(table.columns)
    assert table.meta["chi_n_t"] == "25"


def test_figure_seven_reaches_epr_regime():
    table = figure_table(7)
    assert min(r["reid_opt"] for r in table.rows) < 1
    assert min(r["reid_canonical"] for r in table.rows) < 1


def test_unknown_figure():
    with pytest.raises(ValueError):
        figure_table(8)


@pytest.mark.parametrize("fig", range(1, 8))
def test_figure_columns_finite(fig):
    table = figure_table(fig)
    for row in table.rows:
        for c in table.columns:
            if isinstance(row[c], float):
                assert math.isfinite(row[c]), (fig, c)


def test_csv_header_and_round_trip(tmp_path):
    path = tmp_path / "f4.csv"
    table = reproduce_figure(4, path)
    meta, rows = read_csv(path.read_text())
    assert meta[0] == f"# kerrlab v{__version__} figure=4 frame=rotating axis=N"
    assert [float(r["kappa4_kerr"]) for r in rows] == [r["kappa4_kerr"] for r in table.rows]


def test_json_mirrors_csv(tmp_path):
    reproduce_figure(3, tmp_path / "a.csv")
    reproduce_figure(3, tmp_path / "a.json", fmt="json")
    _, rows = read_csv((tmp_path / "a.csv").read_text())
    data = json.loads((tmp_path / "a.json").read_text())
    assert [list(d) for d in data] == [list(r) for r in rows]
    assert [d["kappa3"] for d in data] == [float(r["kappa3"]) for r in rows]


def test_oracle_check_examples(tmp_path):
    report = oracle_check(16, tmp_path / "r.txt")
    assert report.passed and max(report.worst.values()) < 1e-9
    text = (tmp_path / "r.txt").read_text()
    assert all(name in text for name in FORMULAS)
    assert oracle_check(0).passed


def test_oracle_check_detects_corruption():
    report = oracle_check(4, inject_fault="duan_simon")
    assert report.failures == ["duan_simon"]
    with pytest.raises(ValueError):
        oracle_check(4, inject_fault="nonsense")
    with pytest.raises(ValueError):
        oracle_check(201)


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["oracle-check", "--max-n", "1", "--report", str(tmp_path / "ok.txt")]) == 0
    assert main(["oracle-check", "--max-n", "1", "--inject-fault", "reid_inferred",
                 "--report", str(tmp_path / "bad.txt")]) == 1
    assert main(["oracle-check", "--max-n", "999"]) == 2
    assert main(["sweep", "--steps", "1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["figure", "9"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "steps" in err


def test_cli_sweep_axis_and_json(tmp_path):
    out = tmp_path / "s.json"
    rc = main(["sweep", "--n-photons", "100,1000", "--chi-t", "--start", "0", "--stop", "0.001", "--steps", "3",
               "--quantities", "variance,duan-simon", "--optimize-angle", "--format", "json", "-o", str(out)])
    assert rc == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 6 and rows[0]["axis"] == "chi_t"
    assert rows[-1]["chi_t"] == pytest.approx(0.001) and rows[-1]["chi_n_t"] == pytest.approx(1.0)
    assert "ds_opt" in rows[0]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep settings\nn-photons = 200\nsteps = 5\nstop = 0.5\nframe = lab\nchi-t = true\n")
    assert load_config(cfg)["axis"] == "chi_t"
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(cfg), "--steps", "3", "-o", str(out)]) == 0
    meta, rows = read_csv(out.read_text())
    assert len(rows) == 3
    assert float(rows[-1]["chi_t"]) == 0.5 and rows[0]["frame"].startswith("lab")
    assert "axis=chi_t" in meta[0]
    cfg.write_text("volume = 11\n")
    assert main(["sweep", "--config", str(cfg)]) == 2


def test_cli_optimize(capsys):
    assert main(["optimize", "--n-photons", "1000", "--chi-t", "--time", "0.001", "--criterion", "reid"]) == 0
    header, values = capsys.readouterr().out.strip().splitlines()
    row = dict(zip(header.split(","), values.split(",")))
    assert float(row["value"]) < 1
    assert main(["optimize", "--n-photons", "1000"]) == 2


def test_figure_output_independent_of_jobs(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["figure", "6", "-o", str(a)]) == 0
    assert main(["figure", "6", "-o", str(b), "--jobs", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_output_independent_of_jobs():
    spec = SweepSpec(n_photons=(10.0, 1000.0), steps=9, quantities=("cumulants", "reid"), optimize=True)
    assert list(run_sweep(spec, jobs=1)) == list(run_sweep(spec, jobs=3))


def test_rows_to_stdout(capsys):
    assert main(["figure", "4"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# kerrlab v")
    assert np.isfinite([float(r["kappa4_kerr"]) for r in read_csv(out)[1]]).all()
