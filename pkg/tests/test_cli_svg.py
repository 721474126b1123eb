import json
import re
import xml.etree.ElementTree as ET

import pytest

from gridsim import cli, grid
from gridsim.errors import DomainError
from gridsim.powerflow import BusInjection
from gridsim.svg import PlotSpec, Series, emit_svg, render_svg

SVG_NS = "{http://www.w3.org/2000/svg}"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_writes_four_files(tmp_path, capsys):
    out = tmp_path / "results"
    code, text, _ = run(capsys, "simulate", "--network", str(grid.bundled_network_path()),
                        "--scenario", str(grid.data_dir() / "scenario_10pv.toml"),
                        "--out", str(out))
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == ["flows.csv", "pv.csv", "summary.json",
                                                     "voltages.csv"]
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["hours"]) == 24
    assert "files=4" in text


def test_mpp_dark(capsys):
    code, out, _ = run(capsys, "mpp", "--g", "0", "--t-air", "15")
    assert code == 0
    assert "P = 0 W" in out


def test_mpp_stc(capsys):
    code, out, _ = run(capsys, "mpp", "--g", "1000", "--t-cell", "298")
    assert code == 0
    assert re.search(r"P = 200\.15\d* W", out)


def test_missing_network_exit_1(tmp_path, capsys):
    code, _, err = run(capsys, "powerflow", "--network", str(tmp_path / "missing.json"))
    assert code == 1
    assert "missing.json" in err


def test_unknown_subcommand_exit_1(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1
    assert "usage" in err


def test_unknown_flag_exit_1(capsys):
    code, _, err = run(capsys, "mpp", "--g", "1000", "--bogus")
    assert code == 1 and "usage" in err


def test_numeric_error_exit_2(tmp_path, capsys):
    inj = tmp_path / "inj.csv"
    inj.write_text("bus,p_kw,q_kvar\n741,-500000,-500000\n")
    code, _, err = run(capsys, "powerflow", "--injections", str(inj))
    assert code == 2
    assert "numeric error" in err


def test_reduce(capsys):
    code, out, _ = run(capsys, "reduce")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("config,z1_re")
    assert lines[1].startswith("721,0.227166666667,0.2333,")


def test_pv_curve_csv(tmp_path, capsys):
    csv_path = tmp_path / "iv.csv"
    svg_path = tmp_path / "iv.svg"
    code, _, _ = run(capsys, "pv-curve", "--g", "800", "--points", "25", "--csv", str(csv_path),
                     "--svg", str(svg_path))
    assert code == 0
    assert len(csv_path.read_text().splitlines()) == 26
    ET.parse(svg_path)


def test_inverter_cli(capsys):
    code, out, _ = run(capsys, "inverter", "--p-star", "4000", "--v-mv", "2771.28")
    assert code == 0
    rows = dict(line.split(",") for line in out.strip().splitlines()[1:])
    assert float(rows["i_l_mv_star_a"]) == pytest.approx(1.4434, abs=5e-5)


def test_inverter_time_domain(tmp_path, capsys):
    code, _, err = run(capsys, "inverter", "--p-star", "4000", "--time-domain",
                       "--csv", str(tmp_path / "t.csv"), "--svg", str(tmp_path / "t.svg"))
    assert code == 0
    assert "settled_period," in err
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 21


def test_powerflow_round_trip(tmp_path, capsys):
    inj = [BusInjection(741, -0.004, -0.002), BusInjection(712, 0.001, 0.0)]
    inj_path = tmp_path / "inj.csv"
    cli.write_injections_csv(inj, 2.5e6, inj_path)
    back = cli.read_injections_csv(inj_path, 2.5e6)
    assert [b.bus for b in back] == [b.bus for b in inj]
    for a, b in zip(back, inj):
        assert (a.p, a.q) == pytest.approx((b.p, b.q), rel=1e-11)
    out = tmp_path / "v.csv"
    code, text, _ = run(capsys, "powerflow", "--injections", str(inj_path), "--out", str(out))
    assert code == 0 and text.startswith("iterations=")
    table = cli.read_voltage_table(out)
    assert len(table) == 37 and table[799] == (1.0, 0.0)


def test_powerflow_sweep(capsys):
    code, out, _ = run(capsys, "powerflow", "--sweep")
    assert code == 0 and "iterations=" in out


def test_injections_bad_header(tmp_path, capsys):
    path = tmp_path / "inj.csv"
    path.write_text("bus,p\n741,1\n")
    code, _, _ = run(capsys, "powerflow", "--injections", str(path))
    assert code == 1


@pytest.mark.parametrize("kind", ["load", "irradiance", "temperature"])
def test_plot_profiles_have_24_points(tmp_path, capsys, kind):
    out = tmp_path / f"{kind}.svg"
    code, _, _ = run(capsys, "plot", "--kind", kind, "--out", str(out))
    assert code == 0
    root = ET.parse(out).getroot()
    lines = root.findall(f".//{SVG_NS}polyline")
    assert len(lines) == 1
    assert len(lines[0].get("points").split()) == 24


def test_plot_iv(tmp_path, capsys):
    out = tmp_path / "iv.svg"
    assert run(capsys, "plot", "--kind", "iv", "--points", "30", "--out", str(out))[0] == 0
    assert len(ET.parse(out).getroot().findall(f".//{SVG_NS}polyline")) == 5


def test_plot_voltages_requires_results(tmp_path, capsys):
    code, _, err = run(capsys, "plot", "--kind", "voltages", "--out", str(tmp_path / "v.svg"))
    assert code == 1 and "--results" in err


def test_empty_series_renders_axes():
    text = render_svg(PlotSpec([], "x", "y", "empty"))
    root = ET.fromstring(text)
    assert root.findall(f".//{SVG_NS}polyline") == []
    assert len(root.findall(f".//{SVG_NS}line")) == 2


def test_svg_deterministic(tmp_path):
    spec = PlotSpec([Series("a", [1, 2, 3], [0.5, 0.25, 0.75])], "x", "y", "t <&>")
    a = emit_svg(spec, tmp_path / "a.svg").read_bytes()
    b = emit_svg(spec, tmp_path / "b.svg").read_bytes()
    assert a == b
    ET.fromstring(a)


def test_svg_constant_series():
    ET.fromstring(render_svg(PlotSpec([Series("flat", [1, 2], [3.0, 3.0])])))


def test_svg_spec_validation(tmp_path):
    with pytest.raises(DomainError):
        PlotSpec([Series("bad", [1, 2], [1])])
    with pytest.raises(DomainError):
        PlotSpec([Series("a", [1, 2], [1, 2]), Series("b", [1], [1])])
    with pytest.raises(DomainError):
        emit_svg(PlotSpec([]))


def test_svg_unwritable(tmp_path):
    with pytest.raises(OSError):
        emit_svg(PlotSpec([]), tmp_path / "no" / "such" / "dir.svg")


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.startswith("gridsim ")
