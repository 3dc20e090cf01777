import csv
import io
import math

import numpy as np
import pytest

from risnoma import sweep
from risnoma.sweep import (
    PRESETS,
    ConfigError,
    build_spec,
    dump_config,
    load_config,
    load_preset,
    main,
    run_sweep,
    write_csv,
)


def _small(**kw):
    raw = {"axis": "pt_dbm", "grid": [0.0, 10.0, 20.0], "metrics": ["op_d1", "op_d2"], "modes": ["analytic"]}
    raw.update(kw)
    return build_spec(raw)


def test_fig4_preset_shape():
    spec = load_preset("fig4")
    assert spec.axis == "pt_dbm"
    assert spec.grid == tuple(float(x) for x in range(-10, 51, 5))
    assert spec.metrics == ("op_d1", "op_d2")
    assert set(spec.modes) == {"analytic", "mc"}
    series = dict(spec.series)
    assert series["rho"] == (0.0, 0.2)
    assert dict(spec.settings)["omega_db"] == -math.inf
    p, _ = spec.base
    assert p.omega == 0.0


def test_units_converted_at_load():
    spec = _small(beta_12_db=-20.0, p_th=10.0, omega_db=-30.0)
    p, eh = spec.base
    assert p.beta_12 == pytest.approx(1e-2)
    assert p.omega == pytest.approx(1e-3)
    assert eh.p_th == pytest.approx(1e-2)
    assert p.pt_w == pytest.approx(1e-3)


def test_alpha_sum_must_be_one(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('axis = "pt_dbm"\ngrid = [0.0]\nmetrics = ["op_d1"]\nalpha1 = 0.2\nalpha2 = 0.9\n')
    with pytest.raises(ConfigError, match="alpha"):
        load_config(path)


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('preset = "fig4"\nalpha3 = 0.1\n')
    with pytest.raises(ConfigError, match="alpha3"):
        load_config(path)


def test_parse_error_names_file(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("axis = \n")
    with pytest.raises(ConfigError, match="broken.toml"):
        load_config(path)


@pytest.mark.parametrize("raw", [
    {"grid": []},
    {"grid": [10.0, 0.0, 20.0]},
    {"grid": [0.0, 0.0]},
    {"metrics": []},
    {"metrics": ["op_d3"]},
    {"modes": ["exact"]},
    {"axis": "gamma"},
    {"trials": 0},
    {"rho": [0.1, 1.5]},
    {"pt_dbm": [0.0, 1.0]},
])
def test_invalid_specs(raw):
    with pytest.raises(ConfigError):
        _small(**raw)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_config_round_trip(name, tmp_path):
    spec = load_preset(name, trials=1234, seed=5)
    path = tmp_path / f"{name}.toml"
    dump_config(spec, path)
    again = load_config(path)
    assert again == spec
    assert dump_config(again) == path.read_text()


def test_table1_literal_sets_coefficients():
    spec = load_preset("fig4", table1_literal=True)
    p, _ = spec.base
    assert (p.alpha1, p.alpha2) == (0.9, 0.1)


def test_rows_in_grid_order_and_analytic_csv_layout():
    spec = _small()
    rows = run_sweep(spec)
    assert [r.axis_value for r in rows] == [0.0, 10.0, 20.0]
    buf = io.StringIO()
    write_csv(rows, buf, spec)
    text = buf.getvalue()
    lines = text.split("\n")
    assert text.endswith("\n") and len(lines) == 5 and lines[-1] == ""
    table = list(csv.reader(io.StringIO(text)))
    assert table[0] == ["pt_dbm", "op_d1_analytic", "op_d2_analytic", "validity"]
    assert all(len(r) == 4 for r in table)
    assert "stderr" not in text


def test_mc_columns_and_byte_identical_rerun(tmp_path):
    spec = _small(modes=["analytic", "mc"], trials=3000, seed=11)
    assert spec.columns() == ["pt_dbm", "op_d1_analytic", "op_d1_mc", "op_d1_mc_stderr",
                              "op_d2_analytic", "op_d2_mc", "op_d2_mc_stderr", "validity"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(run_sweep(spec), a, spec)
    write_csv(run_sweep(spec), b, spec)
    assert a.read_bytes() == b.read_bytes()
    row = next(csv.DictReader(io.StringIO(a.read_text())))
    assert float(row["op_d1_mc_stderr"]) >= 0.0


def test_ten_significant_digits():
    spec = _small(metrics=["er_d1"])
    buf = io.StringIO()
    rows = run_sweep(spec)
    write_csv(rows, buf, spec)
    cell = list(csv.reader(io.StringIO(buf.getvalue())))[2][1]
    assert cell == "%.10g" % rows[1].values["er_d1_analytic"]


def test_series_columns_lead_the_row():
    spec = _small(rho=[0.0, 0.2])
    rows = run_sweep(spec)
    assert len(rows) == 6
    assert spec.columns()[:2] == ["rho", "pt_dbm"]
    assert [dict(r.series)["rho"] for r in rows] == [0.0] * 3 + [0.2] * 3


def test_row_errors_do_not_abort():
    spec = build_spec({"axis": "pt_dbm", "grid": [10.0, 55.0], "rho": 1.0, "n_elements": 100,
                       "metrics": ["op_d2", "mean_ph"], "modes": ["analytic"]})
    rows = run_sweep(spec)
    assert len(rows) == 2
    assert rows[1].errors and "op_d2_analytic" not in rows[1].values
    buf = io.StringIO()
    write_csv(rows, buf, spec)
    last = buf.getvalue().strip().split("\n")[-1].split(",")
    assert last[1] == "" and last[-1] == "II"


def test_write_error_names_path(tmp_path):
    spec = _small()
    target = tmp_path / "missing" / "x.csv"
    with pytest.raises(OSError, match="missing"):
        write_csv(run_sweep(spec), target, spec)


def test_fig3_growth_then_saturation():
    spec = load_preset("fig3", modes=["mc"], trials=20_000, seed=3)
    rows = run_sweep(spec)
    for n in (30, 65, 100):
        vals = [r.values["mean_ph_mc"] for r in rows if dict(r.series)["n_elements"] == n]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert vals[0] < 0.05 * 24e-3
    top = [r.values["mean_ph_mc"] for r in rows if r.axis_value == 50.0]
    assert max(top) == pytest.approx(24e-3, rel=0.02)
    # low-power slope is one decade per 10 dB while the rectifier is linear-ish
    low = [r.values["mean_ph_mc"] for r in rows if dict(r.series)["n_elements"] == 30][:3]
    assert np.log10(low[2] / low[0]) > 1.0


def test_fig7_preset_runs():
    spec = load_preset("fig7", trials=2000)
    assert spec.grid[0] == 0.0 and spec.grid[-1] == 1.0 and len(spec.grid) == 21
    assert dict(spec.series)["omega_db"] == (-5.0, -15.0, -30.0)
    assert dict(spec.series)["pt_dbm"] == (15.0, 30.0)
    rows = run_sweep(spec)
    assert len(rows) == 6 * 21
    full_split = [r for r in rows if r.axis_value == 1.0]
    assert all(r.values["op_d1_analytic"] == 1.0 and r.values["op_d1_mc"] == 1.0 for r in full_split)


# --- command line ------------------------------------------------------------------

def test_cli_success_writes_csv_and_manifest(tmp_path, capsys):
    out = tmp_path / "fig4.csv"
    assert main(["--preset", "fig4", "--analytic-only", "--out", str(out)]) == 0
    err = capsys.readouterr().err
    assert "alpha1=0.1" in err and "alpha2=0.9" in err
    assert out.read_text().startswith("n_elements,rho,pt_dbm,op_d1_analytic,op_d2_analytic,validity\n")
    assert out.with_suffix(".manifest.json").exists()


def test_cli_banner_reports_literal_mode(capsys):
    assert main(["--preset", "fig4", "--analytic-only", "--table1-literal"]) == 0
    cap = capsys.readouterr()
    assert "literal" in cap.err and "alpha1=0.9" in cap.err
    assert cap.out.count("\n") == 1 + 3 * 2 * 13


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text('preset = "fig4"\nalpha3 = 1\n')
    assert main(["--config", str(path)]) == 1
    assert "alpha3" in capsys.readouterr().err
    assert main([]) == 1


def test_cli_row_error_exit_code(tmp_path, capsys):
    path = tmp_path / "deg.toml"
    path.write_text('axis = "pt_dbm"\ngrid = [55.0]\nrho = 1.0\nn_elements = 100\n'
                    'metrics = ["op_d2"]\nmodes = ["analytic"]\n')
    assert main(["--config", str(path)]) == 2
    assert "row 0" in capsys.readouterr().err


def test_module_entry_point_is_main():
    import risnoma.__main__  # noqa: F401
    assert sweep.main is main
